#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lbemc/bdd.hpp"
#include "lbemc/program.hpp"
#include "lbemc/smt.hpp"
#include "lbemc/sp.hpp"

namespace lbemc {

using PredicateId = std::uint32_t;

// Interns predicates (canonical atoms over current-state variables) and
// hands out ids in first-seen order. Ids double as BDD variables and as
// proposition ids in Boolean-abstraction queries.
class PredicateTable {
 public:
  PredicateId intern(const Atom& a) {
    auto [it, fresh] = ids_.emplace(a, static_cast<PredicateId>(atoms_.size()));
    if (fresh) atoms_.push_back(a);
    return it->second;
  }

  const Atom& atom(PredicateId id) const { return atoms_.at(id); }
  Formula formula(PredicateId id) const { return Formula::atom(atoms_.at(id)); }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::map<Atom, PredicateId> ids_;
  std::vector<Atom> atoms_;
};

// Predicates tracked at one location, in insertion order, without duplicates.
class Precision {
 public:
  Precision() = default;
  Precision(std::initializer_list<PredicateId> ids) {
    for (auto id : ids) add(id);
  }

  bool add(PredicateId id) {
    if (contains(id)) return false;
    ids_.push_back(id);
    return true;
  }
  bool contains(PredicateId id) const { return std::find(ids_.begin(), ids_.end(), id) != ids_.end(); }
  const std::vector<PredicateId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  friend bool operator==(const Precision&, const Precision&) = default;

 private:
  std::vector<PredicateId> ids_;
};

// Total map from locations to precisions; absent locations have the empty
// precision.
class ProgramPrecision {
 public:
  const Precision& at(LocationId l) const {
    static const Precision empty;
    auto it = map_.find(l);
    return it == map_.end() ? empty : it->second;
  }
  bool add(LocationId l, PredicateId id) { return map_[l].add(id); }
  const std::map<LocationId, Precision>& entries() const { return map_; }

 private:
  std::map<LocationId, Precision> map_;
};

enum class AbstractionMode : std::uint8_t { Cartesian, Boolean };

// An abstract state: a BDD over predicate ids of one shared manager.
using AbstractState = BddManager::Node;

// Predicate abstraction and the abstract strongest postoperator. Holds
// references to a solver, a BDD manager and a predicate table that outlive
// it; not thread-safe.
class Abstractor {
 public:
  Abstractor(SmtSolver& solver, BddManager& bdd, PredicateTable& predicates)
      : solver_(solver), bdd_(bdd), predicates_(predicates) {}

  // Strongest conjunction of predicate literals: p when phi entails p, not p
  // when phi entails not p. An unsatisfiable phi entails both and yields
  // false as soon as pi is nonempty.
  AbstractState cartesian(const Formula& phi, const Precision& pi) {
    AbstractState r = BddManager::kTrue;
    for (auto id : pi.ids()) {
      const Formula p = predicates_.formula(id);
      if (solver_.entails(phi, p)) r = bdd_.conj(r, bdd_.var(id));
      if (solver_.entails(phi, !p)) r = bdd_.conj(r, bdd_.nvar(id));
      if (r == BddManager::kFalse) break;
    }
    return r;
  }

  // Strongest Boolean combination: the disjunction of every full minterm
  // over pi consistent with phi, enumerated by all_sat over the
  // propositions v_i <-> p_i.
  AbstractState boolean(const Formula& phi, const Precision& pi) {
    std::vector<Formula> parts{phi};
    for (auto id : pi.ids()) parts.push_back(Formula::iff(Formula::prop(id), predicates_.formula(id)));
    AbstractState r = BddManager::kFalse;
    for (const auto& assignment : solver_.all_sat(Formula::conjunction(std::move(parts)), pi.ids())) {
      AbstractState minterm = BddManager::kTrue;
      for (const auto& [id, value] : assignment) minterm = bdd_.conj(minterm, bdd_.literal(id, value));
      r = bdd_.disj(r, minterm);
    }
    return r;
  }

  AbstractState abstract(const Formula& phi, const Precision& pi, AbstractionMode mode) {
    return mode == AbstractionMode::Boolean ? boolean(phi, pi) : cartesian(phi, pi);
  }

  Formula concretize(AbstractState s) {
    if (auto it = concrete_.find(s); it != concrete_.end()) return it->second;
    Formula f = bdd_.to_formula(s, [&](std::uint32_t id) { return predicates_.formula(id); });
    concrete_.emplace(s, f);
    return f;
  }

  // Abstraction (under pi) of the strongest postcondition of op applied to
  // the concretization of state.
  AbstractState post(AbstractState state, const Operation& op, const Precision& pi, AbstractionMode mode) {
    if (state == BddManager::kFalse) return state;
    return abstract(sp(op, concretize(state)), pi, mode);
  }

  // Renders an abstract state over predicate text, e.g. "(x > 0) && !(y == 1)".
  std::string to_string(AbstractState s) { return to_infix(concretize(s)); }

  BddManager& bdd() { return bdd_; }
  PredicateTable& predicates() { return predicates_; }
  SmtSolver& solver() { return solver_; }

 private:
  SmtSolver& solver_;
  BddManager& bdd_;
  PredicateTable& predicates_;
  std::map<AbstractState, Formula> concrete_;
};

}  // namespace lbemc
