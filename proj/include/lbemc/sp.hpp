#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lbemc/operation.hpp"

namespace lbemc {

// Current SSA index per program variable; variables never mentioned are at
// index 0.
class SsaMap {
 public:
  SsaMap() = default;
  SsaMap(std::initializer_list<std::pair<const std::string, std::uint32_t>> init) : index_(init) {}

  std::uint32_t get(const std::string& var) const {
    auto it = index_.find(var);
    return it == index_.end() ? base_ : it->second;
  }
  void set(const std::string& var, std::uint32_t i) { index_[var] = i; }
  VarRef ref(const std::string& var) const { return VarRef::indexed(var, get(var)); }

  // Index used for variables that are not listed explicitly.
  void set_base(std::uint32_t b) { base_ = b; }
  std::uint32_t base() const { return base_; }

  const std::map<std::string, std::uint32_t>& entries() const { return index_; }

  friend bool operator==(const SsaMap& a, const SsaMap& b) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.index_) keys.insert(k);
    for (const auto& [k, v] : b.index_) keys.insert(k);
    if (a.base_ != b.base_) return false;
    return std::all_of(keys.begin(), keys.end(), [&](const std::string& k) { return a.get(k) == b.get(k); });
  }

 private:
  std::map<std::string, std::uint32_t> index_;
  std::uint32_t base_ = 0;
};

struct EdgeEncoding {
  Formula formula;
  SsaMap ssa;
};

// Instantiates a current-state term/formula at the indices of `ssa`.
inline LinearTerm instantiate(const LinearTerm& t, const SsaMap& ssa) {
  return t.map_vars([&](const VarRef& v) { return v.is_current() ? ssa.ref(v.name) : v; });
}

inline Formula instantiate(const Formula& f, const SsaMap& ssa) {
  return map_leaves(f, [&](const Formula& leaf) {
    if (leaf.kind() != Formula::Kind::Atom) return leaf;
    return Formula::atom(leaf.as_atom().relation, instantiate(leaf.as_atom().term, ssa));
  });
}

namespace detail {

inline EdgeEncoding encode(const Operation& op, const SsaMap& ssa) {
  switch (op.kind()) {
    case Operation::Kind::Assign: {
      SsaMap out = ssa;
      const LinearTerm rhs = instantiate(op.rhs(), ssa);
      out.set(op.var(), ssa.get(op.var()) + 1);
      return {Formula::atom(Relation::Eq, LinearTerm::variable(out.ref(op.var())) - rhs), out};
    }
    case Operation::Kind::Assume:
      return {instantiate(op.condition(), ssa), ssa};
    case Operation::Kind::Havoc: {
      SsaMap out = ssa;
      out.set(op.var(), ssa.get(op.var()) + 1);
      return {Formula::truth(), out};
    }
    case Operation::Kind::Seq: {
      EdgeEncoding a = encode(op.first(), ssa);
      EdgeEncoding b = encode(op.second(), a.ssa);
      return {a.formula && b.formula, b.ssa};
    }
    case Operation::Kind::Choice: {
      EdgeEncoding a = encode(op.first(), ssa);
      EdgeEncoding b = encode(op.second(), ssa);
      SsaMap out = ssa;
      std::vector<Formula> pad_a{a.formula}, pad_b{b.formula};
      std::set<std::string> vars;
      for (const auto& [k, v] : a.ssa.entries()) vars.insert(k);
      for (const auto& [k, v] : b.ssa.entries()) vars.insert(k);
      for (const auto& var : vars) {
        const std::uint32_t ia = a.ssa.get(var), ib = b.ssa.get(var);
        if (ia == ib) {
          out.set(var, ia);
          continue;
        }
        // branches disagree: both are joined into a fresh index
        const std::uint32_t fresh = std::max(ia, ib) + 1;
        out.set(var, fresh);
        const LinearTerm target = LinearTerm::variable(VarRef::indexed(var, fresh));
        pad_a.push_back(Formula::atom(Relation::Eq, target - LinearTerm::variable(VarRef::indexed(var, ia))));
        pad_b.push_back(Formula::atom(Relation::Eq, target - LinearTerm::variable(VarRef::indexed(var, ib))));
      }
      return {Formula::conjunction(std::move(pad_a)) || Formula::conjunction(std::move(pad_b)), out};
    }
  }
  throw Error("lbemc: bad operation");
}

}  // namespace detail

// SSA encoding of one edge: satisfiable together with the incoming
// constraints iff some concrete execution of `op` exists from them.
inline EdgeEncoding encode_edge(const Operation& op, const SsaMap& ssa) { return detail::encode(op, ssa); }

// Strongest postcondition. The result is over current-state variables plus
// indexed variables that stand for existentially quantified intermediate
// values. Current variables of phi are moved to a base index above every
// index already in phi, the edge is SSA-encoded from there, and the final
// index of each variable is renamed back to the current-state variable.
inline Formula sp(const Operation& op, const Formula& phi) {
  const auto top = max_index(phi);
  const std::uint32_t base = top ? *top + 1 : 0;
  SsaMap start;
  start.set_base(base);

  std::set<std::string> names;
  collect_variables(op, names);
  for (const auto& v : variables(phi)) {
    if (v.is_current()) names.insert(v.name);
  }

  std::map<VarRef, VarRef> to_base;
  for (const auto& n : names) to_base.emplace(VarRef::current(n), VarRef::indexed(n, base));
  const Formula pre = rename(phi, to_base);

  EdgeEncoding enc = encode_edge(op, start);
  std::map<VarRef, VarRef> to_current;
  for (const auto& n : names) to_current.emplace(VarRef::indexed(n, enc.ssa.get(n)), VarRef::current(n));
  return rename(pre && enc.formula, to_current);
}

}  // namespace lbemc
