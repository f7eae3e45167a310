#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lbemc/fourier_motzkin.hpp"
#include "lbemc/sat.hpp"

namespace lbemc {

class SolverError : public Error {
 public:
  using Error::Error;
};

struct SatResult {
  bool sat = false;
  std::map<VarRef, Rational> model;           // rational witness; absent variables are unconstrained
  std::map<std::uint32_t, bool> propositions;  // values of the formula's propositions

  explicit operator bool() const { return sat; }
};

using Assignment = std::map<std::uint32_t, bool>;

// Satisfiability modulo linear rational arithmetic over formulas that may
// also contain propositional variables.
class SmtSolver {
 public:
  virtual ~SmtSolver() = default;

  virtual SatResult check_sat(const Formula& phi) = 0;

  // Every total assignment to `important` that extends to a model of phi,
  // in enumeration order.
  virtual std::vector<Assignment> all_sat(const Formula& phi, const std::vector<std::uint32_t>& important) {
    std::vector<Assignment> out;
    std::vector<Formula> blocks{phi};
    for (;;) {
      SatResult r = check_sat(Formula::conjunction(blocks));
      if (!r) return out;
      Assignment a;
      std::vector<Formula> differ;
      for (auto id : important) {
        auto it = r.propositions.find(id);
        const bool value = it != r.propositions.end() && it->second;
        a.emplace(id, value);
        differ.push_back(value ? !Formula::prop(id) : Formula::prop(id));
      }
      out.push_back(std::move(a));
      if (differ.empty()) return out;
      blocks.push_back(Formula::disjunction(std::move(differ)));
    }
  }

  bool entails(const Formula& a, const Formula& b) { return !check_sat(a && !b).sat; }

  std::uint64_t queries() const { return queries_; }
  void reset_queries() { queries_ = 0; }

 protected:
  std::uint64_t queries_ = 0;
};

// NNF in which every disequality is replaced by its integer split
// (t <= -1) or (t >= 1); the result has no negated atoms.
inline Formula split_disequalities(const Formula& f) {
  std::unordered_map<const void*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula r = g;
    if (g.kind() == Formula::Kind::Not && g.operand().kind() == Formula::Kind::Atom) {
      const LinearTerm& t = g.operand().as_atom().term;
      r = Formula::atom(Relation::Le, t.plus_constant(1)) || Formula::atom(Relation::Le, (-t).plus_constant(1));
    } else if (g.kind() == Formula::Kind::And || g.kind() == Formula::Kind::Or) {
      std::vector<Formula> parts;
      for (const auto& c : g.children()) parts.push_back(go(c));
      r = g.kind() == Formula::Kind::And ? Formula::conjunction(std::move(parts))
                                         : Formula::disjunction(std::move(parts));
    }
    memo.emplace(g.id(), r);
    return r;
  };
  return go(to_nnf(f));
}

namespace detail {

// Tseitin encoding of one formula into a CDCL instance, with the theory
// hook that checks the currently assigned atoms.
class SmtInstance {
 public:
  explicit SmtInstance(const Formula& phi) {
    const sat::Lit root = encode(phi);
    sat_.add_clause({root});
  }

  sat::Lit prop_lit(std::uint32_t id) {
    auto [it, fresh] = props_.emplace(id, 0);
    if (fresh) it->second = sat_.new_var();
    return sat::pos(it->second);
  }

  bool solve() {
    return sat_.solve([this](const sat::Solver& s) { return theory_conflict(s); });
  }

  bool block(const std::vector<sat::Lit>& clause) { return sat_.add_clause(clause); }

  sat::Value value(sat::Lit l) const { return sat_.value_lit(l); }

  SatResult result() {
    SatResult r;
    r.sat = true;
    std::vector<Literal> lits = assigned_atoms(sat_);
    TheoryResult t = theory_check(std::span<const Literal>(lits));
    if (!t.sat) throw SolverError("lbemc: theory assignment became inconsistent");
    r.model = std::move(t.model);
    for (const auto& [id, var] : props_) r.propositions.emplace(id, sat_.value(var) == sat::Value::True);
    return r;
  }

 private:
  sat::Lit fresh() { return sat::pos(sat_.new_var()); }

  sat::Lit encode(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    sat::Lit out = 0;
    switch (f.kind()) {
      case Formula::Kind::True:
      case Formula::Kind::False: {
        out = fresh();
        sat_.add_clause({f.is_true() ? out : sat::negate(out)});
        break;
      }
      case Formula::Kind::Atom: {
        auto [it, is_new] = atom_vars_.emplace(f.as_atom(), 0);
        if (is_new) {
          it->second = sat_.new_var();
          atoms_.emplace_back(it->second, f.as_atom());
        }
        out = sat::pos(it->second);
        break;
      }
      case Formula::Kind::Prop:
        out = prop_lit(f.prop_id());
        break;
      case Formula::Kind::Not:
        out = sat::negate(encode(f.operand()));
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        const bool conj = f.kind() == Formula::Kind::And;
        std::vector<sat::Lit> kids;
        for (const auto& c : f.children()) kids.push_back(encode(c));
        out = fresh();
        // conj: out -> kid_i, (and kids) -> out;  disj: kid_i -> out, out -> (or kids)
        std::vector<sat::Lit> big{conj ? out : sat::negate(out)};
        for (auto k : kids) {
          if (conj) {
            sat_.add_clause({sat::negate(out), k});
            big.push_back(sat::negate(k));
          } else {
            sat_.add_clause({out, sat::negate(k)});
            big.push_back(k);
          }
        }
        sat_.add_clause(std::move(big));
        break;
      }
    }
    memo_.emplace(f.id(), out);
    keep_alive_.push_back(f);
    return out;
  }

  std::vector<Literal> assigned_atoms(const sat::Solver& s) const {
    std::vector<Literal> lits;
    for (const auto& [var, atom] : atoms_) {
      const sat::Value v = s.value(var);
      if (v != sat::Value::Unassigned) lits.push_back(Literal{atom, v == sat::Value::True});
    }
    return lits;
  }

  std::optional<std::vector<sat::Lit>> theory_conflict(const sat::Solver& s) {
    std::vector<Literal> lits;
    std::vector<sat::Lit> as_sat;
    for (const auto& [var, atom] : atoms_) {
      const sat::Value v = s.value(var);
      if (v == sat::Value::Unassigned) continue;
      lits.push_back(Literal{atom, v == sat::Value::True});
      as_sat.push_back(v == sat::Value::True ? sat::pos(var) : sat::neg(var));
    }
    if (lits.empty()) return std::nullopt;
    TheoryResult t = theory_check(std::span<const Literal>(lits));
    if (t.sat) return std::nullopt;
    std::vector<sat::Lit> clause;
    for (auto i : t.core) clause.push_back(sat::negate(as_sat[i]));
    return clause;
  }

  sat::Solver sat_;
  std::unordered_map<const void*, sat::Lit> memo_;
  std::vector<Formula> keep_alive_;  // pins memo keys
  std::map<Atom, std::uint32_t> atom_vars_;
  std::vector<std::pair<std::uint32_t, Atom>> atoms_;
  std::map<std::uint32_t, std::uint32_t> props_;
};

}  // namespace detail

// In-process DPLL(T): CDCL over the Tseitin encoding with Fourier-Motzkin
// as the theory solver.
class InternalSolver : public SmtSolver {
 public:
  SatResult check_sat(const Formula& phi) override {
    ++queries_;
    if (phi.is_true()) return SatResult{true, {}, {}};
    if (phi.is_false()) return SatResult{};
    detail::SmtInstance inst(phi);
    if (!inst.solve()) return SatResult{};
    return inst.result();
  }

  std::vector<Assignment> all_sat(const Formula& phi, const std::vector<std::uint32_t>& important) override {
    std::vector<Assignment> out;
    detail::SmtInstance inst(phi);
    std::vector<sat::Lit> lits;
    for (auto id : important) lits.push_back(inst.prop_lit(id));
    for (;;) {
      ++queries_;
      if (!inst.solve()) return out;
      Assignment a;
      std::vector<sat::Lit> blocking;
      for (std::size_t i = 0; i < important.size(); ++i) {
        const bool v = inst.value(lits[i]) == sat::Value::True;
        a.emplace(important[i], v);
        blocking.push_back(v ? sat::negate(lits[i]) : lits[i]);
      }
      out.push_back(std::move(a));
      if (!inst.block(blocking)) return out;
    }
  }
};

}  // namespace lbemc
