#pragma once

// Brute-force ground truth: explicit-state reachability over bounded
// integer domains, syntactic path enumeration, semantic equivalence of
// formulas with implicitly existential indexed variables, and concrete
// replay of counterexample witnesses.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lbemc/program.hpp"
#include "lbemc/smt.hpp"
#include "lbemc/sp.hpp"

namespace lbemc {

struct DomainBound {
  std::int64_t lo = 0;
  std::int64_t hi = 3;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_variable;  // overrides [lo, hi]
  std::size_t budget = 1'000'000;                                            // concrete states visited

  std::pair<std::int64_t, std::int64_t> range(const std::string& var) const {
    auto it = per_variable.find(var);
    return it == per_variable.end() ? std::make_pair(lo, hi) : it->second;
  }
};

enum class Reachability : std::uint8_t { Reachable, NotReachable, BudgetExceeded };

using Env = std::map<std::string, std::int64_t>;

namespace detail {

inline Rational env_value(const Env& env, const VarRef& v) {
  auto it = env.find(v.name);
  return it == env.end() ? Rational(0) : Rational(it->second);
}

inline bool holds(const Formula& f, const Env& env) {
  return evaluate(f, [&](const VarRef& v) { return env_value(env, v); }, [](std::uint32_t) { return false; });
}

// All successor environments of `op`; values leaving the bound cut the branch.
inline void exec_all(const Operation& op, const Env& env, const DomainBound& b, std::vector<Env>& out) {
  switch (op.kind()) {
    case Operation::Kind::Assign: {
      const Rational v = op.rhs().evaluate([&](const VarRef& r) { return env_value(env, r); });
      const auto [lo, hi] = b.range(op.var());
      if (v < Rational(lo) || v > Rational(hi)) return;
      Env next = env;
      next[op.var()] = v.num();
      out.push_back(std::move(next));
      return;
    }
    case Operation::Kind::Assume:
      if (holds(op.condition(), env)) out.push_back(env);
      return;
    case Operation::Kind::Havoc: {
      const auto [lo, hi] = b.range(op.var());
      for (std::int64_t v = lo; v <= hi; ++v) {
        Env next = env;
        next[op.var()] = v;
        out.push_back(std::move(next));
      }
      return;
    }
    case Operation::Kind::Seq: {
      std::vector<Env> mid;
      exec_all(op.first(), env, b, mid);
      for (const auto& m : mid) exec_all(op.second(), m, b, out);
      return;
    }
    case Operation::Kind::Choice:
      exec_all(op.first(), env, b, out);
      exec_all(op.second(), env, b, out);
      return;
  }
}

}  // namespace detail

// Successor environments of one operation under the bound.
inline std::vector<Env> exec(const Operation& op, const Env& env, const DomainBound& b) {
  std::vector<Env> out;
  detail::exec_all(op, env, b, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Breadth-first search over (location, environment) from every initial
// environment inside the bound.
inline Reachability explicit_reachable(const Program& p, const DomainBound& b) {
  std::vector<Env> initial{Env{}};
  for (const auto& var : p.variables) {
    std::vector<Env> next;
    const auto [lo, hi] = b.range(var);
    for (const auto& e : initial) {
      for (std::int64_t v = lo; v <= hi; ++v) {
        Env x = e;
        x[var] = v;
        next.push_back(std::move(x));
      }
    }
    initial = std::move(next);
  }
  std::map<LocationId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < p.cfa.edges.size(); ++i) out[p.cfa.edges[i].source].push_back(i);

  std::set<std::pair<LocationId, Env>> seen;
  std::deque<std::pair<LocationId, Env>> work;
  for (auto& e : initial) {
    if (seen.emplace(p.entry, e).second) work.emplace_back(p.entry, std::move(e));
  }
  while (!work.empty()) {
    auto [loc, env] = std::move(work.front());
    work.pop_front();
    if (loc == p.error) return Reachability::Reachable;
    if (seen.size() > b.budget) return Reachability::BudgetExceeded;
    auto it = out.find(loc);
    if (it == out.end()) continue;
    for (auto i : it->second) {
      const Edge& e = p.cfa.edges[i];
      for (auto& next : exec(e.op, env, b)) {
        if (seen.emplace(e.target, next).second) work.emplace_back(e.target, std::move(next));
      }
    }
  }
  return Reachability::NotReachable;
}

// A syntactic path as a sequence of edge indices.
using ProgramPath = std::vector<std::size_t>;

// All paths from the entry with 1..max_len edges, shorter first, then
// lexicographic in edge indices.
inline std::vector<ProgramPath> enum_paths(const Program& p, std::size_t max_len) {
  std::vector<ProgramPath> all;
  std::vector<ProgramPath> frontier{ProgramPath{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<ProgramPath> next;
    for (const auto& path : frontier) {
      const LocationId at = path.empty() ? p.entry : p.cfa.edges[path.back()].target;
      for (std::size_t i = 0; i < p.cfa.edges.size(); ++i) {
        if (p.cfa.edges[i].source != at) continue;
        ProgramPath q = path;
        q.push_back(i);
        next.push_back(std::move(q));
      }
    }
    std::sort(next.begin(), next.end());
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return all;
}

// Equivalent formula over current-state variables only: indexed variables
// are existentially projected away (NNF, disequality split, DNF, then
// Fourier-Motzkin per cube).
inline Formula project_existentials(const Formula& f) {
  using Cube = std::vector<Atom>;
  std::function<std::vector<Cube>(const Formula&)> dnf = [&](const Formula& g) -> std::vector<Cube> {
    switch (g.kind()) {
      case Formula::Kind::True:
        return {Cube{}};
      case Formula::Kind::False:
        return {};
      case Formula::Kind::Atom:
        return {Cube{g.as_atom()}};
      case Formula::Kind::Or: {
        std::vector<Cube> out;
        for (const auto& c : g.children()) {
          auto part = dnf(c);
          out.insert(out.end(), part.begin(), part.end());
        }
        return out;
      }
      case Formula::Kind::And: {
        std::vector<Cube> acc{Cube{}};
        for (const auto& c : g.children()) {
          const auto part = dnf(c);
          std::vector<Cube> next;
          for (const auto& a : acc) {
            for (const auto& b : part) {
              Cube m = a;
              m.insert(m.end(), b.begin(), b.end());
              next.push_back(std::move(m));
            }
          }
          acc = std::move(next);
        }
        return acc;
      }
      default:
        throw Error("lbemc: projection supports arithmetic formulas only");
    }
  };
  std::vector<Formula> disjuncts;
  for (const auto& cube : dnf(split_disequalities(f))) {
    auto projected = project(cube, [](const VarRef& v) { return v.is_current(); });
    if (!projected) continue;
    std::vector<Formula> atoms;
    for (const auto& a : *projected) atoms.push_back(Formula::atom(a));
    disjuncts.push_back(Formula::conjunction(std::move(atoms)));
  }
  return Formula::disjunction(std::move(disjuncts));
}

// Both directions of entailment, after projecting existential (indexed)
// variables out of each side.
inline bool semantically_equivalent(const Formula& a, const Formula& b, SmtSolver& solver) {
  const Formula pa = project_existentials(a);
  const Formula pb = project_existentials(b);
  return solver.entails(pa, pb) && solver.entails(pb, pa);
}

namespace detail {

// Executes op along the branch selected by the SSA model; false when an
// assume fails concretely.
inline bool replay_op(const Operation& op, Env& env, SsaMap& ssa, const std::map<VarRef, Rational>& model) {
  auto model_value = [&](const VarRef& v) {
    auto it = model.find(v);
    return it == model.end() ? Rational(0) : it->second;
  };
  switch (op.kind()) {
    case Operation::Kind::Assign: {
      const Rational v = op.rhs().evaluate([&](const VarRef& r) { return env_value(env, r); });
      env[op.var()] = v.num();
      ssa.set(op.var(), ssa.get(op.var()) + 1);
      return true;
    }
    case Operation::Kind::Assume:
      return holds(op.condition(), env);
    case Operation::Kind::Havoc: {
      ssa.set(op.var(), ssa.get(op.var()) + 1);
      const Rational v = model_value(ssa.ref(op.var()));
      if (!v.is_integer()) return false;
      env[op.var()] = v.num();
      return true;
    }
    case Operation::Kind::Seq:
      return replay_op(op.first(), env, ssa, model) && replay_op(op.second(), env, ssa, model);
    case Operation::Kind::Choice: {
      const EdgeEncoding joined = encode_edge(op, ssa);
      const EdgeEncoding left = encode_edge(op.first(), ssa);
      bool take_left = evaluate(left.formula, model_value, [](std::uint32_t) { return false; });
      for (const auto& [var, index] : joined.ssa.entries()) {
        if (take_left && left.ssa.get(var) != index) {
          take_left = model_value(VarRef::indexed(var, index)) == model_value(left.ssa.ref(var));
        }
      }
      SsaMap branch = ssa;
      if (!replay_op(take_left ? op.first() : op.second(), env, branch, model)) return false;
      ssa = joined.ssa;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Concrete execution of a counterexample under an SSA-indexed model:
// initial values come from index 0, havocs read the model, choices follow
// the branch whose encoding the model satisfies. True iff every assume holds.
inline bool replay_witness(const std::vector<Operation>& path, const std::map<VarRef, Rational>& model) {
  Env env;
  SsaMap ssa;
  for (const auto& [v, value] : model) {
    if (v.index && *v.index == 0) {
      if (!value.is_integer()) return false;
      env[v.name] = value.num();
    }
  }
  for (const auto& op : path) {
    if (!detail::replay_op(op, env, ssa, model)) return false;
  }
  return true;
}

}  // namespace lbemc
