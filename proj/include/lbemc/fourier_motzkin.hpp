#pragma once

// Decision procedure for conjunctions of linear literals over the rationals:
// Gaussian substitution of equalities, then Fourier-Motzkin elimination of
// the inequalities. Every derived row carries the set of input literals it
// came from, so an Unsat answer comes with a conflict core.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lbemc/formula.hpp"

namespace lbemc {

// An atom asserted true (positive) or false. A false equality is read as
// the integer split (t <= -1) or (t >= 1).
struct Literal {
  Atom atom;
  bool positive = true;
};

struct TheoryResult {
  bool sat = false;
  std::map<VarRef, Rational> model;  // witness when sat
  std::vector<std::size_t> core;     // indices of input literals when unsat
};

namespace detail {

using Why = std::vector<std::uint32_t>;

// Provenance ids at or above this mark tag case-split rows, not input literals.
inline constexpr std::uint32_t kSplitMark = 0x80000000u;

inline Why merge_why(const Why& a, const Why& b) {
  Why out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// sum(coeffs) + constant  (= or <=)  0 over dense variable ids.
struct Row {
  std::vector<std::pair<std::uint32_t, std::int64_t>> coeffs;
  std::int64_t constant = 0;
  Why why;

  std::int64_t coefficient(std::uint32_t v) const {
    for (const auto& [id, c] : coeffs) {
      if (id == v) return c;
    }
    return 0;
  }

  Rational evaluate(const std::vector<Rational>& values) const {
    Rational r(constant);
    for (const auto& [id, c] : coeffs) r += Rational(c) * values[id];
    return r;
  }
};

// ka*a + kb*b, gcd-normalized.
inline Row combine(const Row& a, std::int64_t ka, const Row& b, std::int64_t kb) {
  Row r;
  r.constant = checked_add(checked_mul(a.constant, ka), checked_mul(b.constant, kb));
  auto x = a.coeffs.begin(), y = b.coeffs.begin();
  while (x != a.coeffs.end() || y != b.coeffs.end()) {
    if (y == b.coeffs.end() || (x != a.coeffs.end() && x->first < y->first)) {
      r.coeffs.emplace_back(x->first, checked_mul(x->second, ka));
      ++x;
    } else if (x == a.coeffs.end() || y->first < x->first) {
      r.coeffs.emplace_back(y->first, checked_mul(y->second, kb));
      ++y;
    } else {
      std::int64_t c = checked_add(checked_mul(x->second, ka), checked_mul(y->second, kb));
      if (c != 0) r.coeffs.emplace_back(x->first, c);
      ++x;
      ++y;
    }
  }
  std::int64_t g = std::llabs(r.constant);
  for (const auto& [id, c] : r.coeffs) g = std::gcd(g, std::llabs(c));
  if (g > 1) {
    r.constant /= g;
    for (auto& [id, c] : r.coeffs) c /= g;
  }
  r.why = merge_why(a.why, b.why);
  return r;
}

struct Elimination {
  std::uint32_t var;
  bool by_equality;
  std::vector<Row> rows;  // the defining equality, or every bound on var
};

struct Outcome {
  bool sat = false;
  std::vector<Rational> values;
  Why core;
};

// Picks a value in [lo, hi] preferring 0, then the integer nearest to 0.
inline Rational pick_value(const std::optional<Rational>& lo, const std::optional<Rational>& hi) {
  const bool zero_ok = (!lo || *lo <= Rational(0)) && (!hi || *hi >= Rational(0));
  if (zero_ok) return Rational(0);
  if (lo && *lo > Rational(0)) {
    Rational c(lo->ceil());
    if (!hi || c <= *hi) return c;
    return (*lo + *hi) * Rational(1, 2);
  }
  Rational f(hi->floor());
  if (!lo || f >= *lo) return f;
  return (*lo + *hi) * Rational(1, 2);
}

class FmSolver {
 public:
  explicit FmSolver(std::size_t num_vars) : num_vars_(num_vars) {}

  Outcome solve(const std::vector<Row>& eqs_in, const std::vector<Row>& les_in, const std::vector<Row>& diseqs,
                std::uint32_t depth = 0) const {
    std::vector<Elimination> trail;
    std::vector<Row> eqs = eqs_in, les = les_in, dis = diseqs;

    // Gaussian substitution.
    while (!eqs.empty()) {
      Row r = std::move(eqs.back());
      eqs.pop_back();
      if (r.coeffs.empty()) {
        if (r.constant != 0) return unsat(r.why);
        continue;
      }
      auto pivot = std::min_element(r.coeffs.begin(), r.coeffs.end(), [](const auto& a, const auto& b) {
        return std::llabs(a.second) < std::llabs(b.second);
      });
      const std::uint32_t var = pivot->first;
      std::int64_t a = pivot->second;
      if (a < 0) {
        r = combine(r, -1, r, 0);
        a = -a;
      }
      auto eliminate = [&](std::vector<Row>& rows) {
        for (auto& s : rows) {
          const std::int64_t c = s.coefficient(var);
          if (c != 0) s = combine(s, a, r, -c);
        }
      };
      eliminate(eqs);
      eliminate(les);
      eliminate(dis);
      trail.push_back({var, true, {r}});
    }

    // Fourier-Motzkin.
    for (;;) {
      std::vector<Row> kept;
      std::map<std::uint32_t, std::pair<int, int>> occurrences;
      for (auto& r : les) {
        if (r.coeffs.empty()) {
          if (r.constant > 0) return unsat(r.why);
          continue;
        }
        for (const auto& [id, c] : r.coeffs) {
          auto& o = occurrences[id];
          (c > 0 ? o.first : o.second)++;
        }
        kept.push_back(std::move(r));
      }
      les = dedup(std::move(kept));
      if (occurrences.empty()) break;

      std::uint32_t var = 0;
      std::optional<long> best;
      for (const auto& [id, o] : occurrences) {
        const long cost = static_cast<long>(o.first) * o.second - o.first - o.second;
        if (!best || cost < *best) {
          best = cost;
          var = id;
        }
      }
      std::vector<Row> upper, lower, rest;
      for (auto& r : les) {
        const std::int64_t c = r.coefficient(var);
        if (c > 0) {
          upper.push_back(std::move(r));
        } else if (c < 0) {
          lower.push_back(std::move(r));
        } else {
          rest.push_back(std::move(r));
        }
      }
      for (const auto& u : upper) {
        for (const auto& l : lower) {
          rest.push_back(combine(u, -l.coefficient(var), l, u.coefficient(var)));
        }
      }
      Elimination e{var, false, {}};
      e.rows.insert(e.rows.end(), upper.begin(), upper.end());
      e.rows.insert(e.rows.end(), lower.begin(), lower.end());
      trail.push_back(std::move(e));
      les = std::move(rest);
    }

    std::vector<Rational> values(num_vars_, Rational(0));
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) assign(*it, values);

    // Disequalities: split lazily on the first one the witness violates.
    for (std::size_t i = 0; i < diseqs.size(); ++i) {
      if (diseqs[i].evaluate(values).sign() == 0) return split(eqs_in, les_in, diseqs, i, depth);
    }
    return Outcome{true, std::move(values), {}};
  }

 private:
  static Outcome unsat(Why why) { return Outcome{false, {}, std::move(why)}; }

  static std::vector<Row> dedup(std::vector<Row> rows) {
    std::map<std::vector<std::pair<std::uint32_t, std::int64_t>>, std::size_t> best;
    std::vector<Row> out;
    for (auto& r : rows) {
      auto [it, fresh] = best.emplace(r.coeffs, out.size());
      if (fresh) {
        out.push_back(std::move(r));
      } else if (r.constant > out[it->second].constant) {
        out[it->second] = std::move(r);
      }
    }
    return out;
  }

  static void assign(const Elimination& e, std::vector<Rational>& values) {
    if (e.by_equality) {
      const Row& r = e.rows.front();
      const std::int64_t a = r.coefficient(e.var);
      values[e.var] = Rational(0);
      values[e.var] = -r.evaluate(values) / Rational(a);
      return;
    }
    std::optional<Rational> lo, hi;
    values[e.var] = Rational(0);
    for (const auto& r : e.rows) {
      const std::int64_t c = r.coefficient(e.var);
      const Rational rest = r.evaluate(values);  // var currently 0
      const Rational bound = -rest / Rational(c);
      if (c > 0) {
        if (!hi || bound < *hi) hi = bound;
      } else {
        if (!lo || bound > *lo) lo = bound;
      }
    }
    values[e.var] = pick_value(lo, hi);
  }

  // Case split on a violated disequality. A branch whose conflict does not
  // involve the split row refutes the parent as well.
  Outcome split(const std::vector<Row>& eqs, const std::vector<Row>& les, const std::vector<Row>& diseqs,
                std::size_t violated, std::uint32_t depth) const {
    const Row& d = diseqs[violated];
    const std::uint32_t mark = kSplitMark + depth;
    std::vector<Row> remaining;
    for (std::size_t i = 0; i < diseqs.size(); ++i) {
      if (i != violated) remaining.push_back(diseqs[i]);
    }
    Row below = d;  // d + 1 <= 0
    below.constant = checked_add(below.constant, 1);
    Row above = combine(d, -1, d, 0);  // -d + 1 <= 0
    above.constant = checked_add(above.constant, 1);
    below.why = merge_why(d.why, {mark});
    above.why = below.why;

    Why core;
    for (Row* side : {&below, &above}) {
      std::vector<Row> branch = les;
      branch.push_back(std::move(*side));
      Outcome o = solve(eqs, branch, remaining, depth + 1);
      if (o.sat) return o;
      if (!std::binary_search(o.core.begin(), o.core.end(), mark)) return o;
      core = merge_why(core, o.core);
    }
    std::erase(core, mark);
    return unsat(std::move(core));
  }

  std::size_t num_vars_;
};

}  // namespace detail

// Rational satisfiability of a conjunction of literals. Sat carries a
// witness by back-substitution; Unsat carries a (not necessarily minimal)
// core of literal indices.
inline TheoryResult theory_check(std::span<const Literal> literals) {
  std::map<VarRef, std::uint32_t> ids;
  std::vector<VarRef> names;
  auto id_of = [&](const VarRef& v) {
    auto [it, fresh] = ids.emplace(v, static_cast<std::uint32_t>(names.size()));
    if (fresh) names.push_back(v);
    return it->second;
  };
  std::vector<detail::Row> eqs, les, diseqs;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    const Literal& lit = literals[i];
    detail::Row row;
    row.constant = lit.atom.term.constant();
    for (const auto& [v, c] : lit.atom.term.monomials()) row.coeffs.emplace_back(id_of(v), c);
    std::sort(row.coeffs.begin(), row.coeffs.end());
    row.why = {static_cast<std::uint32_t>(i)};
    if (lit.atom.relation == Relation::Eq) {
      (lit.positive ? eqs : diseqs).push_back(std::move(row));
    } else if (lit.positive) {
      les.push_back(std::move(row));
    } else {
      // not(t <= 0)  <=>  -t + 1 <= 0 over integers
      detail::Row neg = detail::combine(row, -1, row, 0);
      neg.constant = detail::checked_add(neg.constant, 1);
      neg.why = row.why;
      les.push_back(std::move(neg));
    }
  }
  detail::Outcome out = detail::FmSolver(names.size()).solve(eqs, les, diseqs);
  TheoryResult result;
  result.sat = out.sat;
  if (out.sat) {
    for (std::size_t i = 0; i < names.size(); ++i) result.model.emplace(names[i], out.values[i]);
  } else {
    result.core.assign(out.core.begin(), out.core.end());
  }
  return result;
}

// Conjunction of positive atoms.
inline TheoryResult theory_check(const std::vector<Atom>& atoms) {
  std::vector<Literal> lits;
  lits.reserve(atoms.size());
  for (const auto& a : atoms) lits.push_back(Literal{a, true});
  return theory_check(std::span<const Literal>(lits));
}

// Rational projection of a conjunction of positive atoms onto the
// variables for which `keep` holds. Returns nullopt when the conjunction is
// unsatisfiable.
template <class Keep>
std::optional<std::vector<Atom>> project(const std::vector<Atom>& cube, Keep&& keep) {
  std::map<VarRef, std::uint32_t> ids;
  std::vector<VarRef> names;
  auto to_row = [&](const Atom& a) {
    detail::Row row;
    row.constant = a.term.constant();
    for (const auto& [v, c] : a.term.monomials()) {
      auto [it, fresh] = ids.emplace(v, static_cast<std::uint32_t>(names.size()));
      if (fresh) names.push_back(v);
      row.coeffs.emplace_back(it->second, c);
    }
    std::sort(row.coeffs.begin(), row.coeffs.end());
    return row;
  };
  std::vector<detail::Row> eqs, les;
  for (const auto& a : cube) (a.relation == Relation::Eq ? eqs : les).push_back(to_row(a));
  auto eliminable = [&](std::uint32_t id) { return !keep(names[id]); };

  std::vector<detail::Row> kept_eqs;
  while (!eqs.empty()) {
    detail::Row r = std::move(eqs.back());
    eqs.pop_back();
    std::optional<std::pair<std::uint32_t, std::int64_t>> pivot;
    for (const auto& [id, c] : r.coeffs) {
      if (eliminable(id) && (!pivot || std::llabs(c) < std::llabs(pivot->second))) pivot = std::make_pair(id, c);
    }
    if (!pivot) {
      kept_eqs.push_back(std::move(r));
      continue;
    }
    const auto [var, a0] = *pivot;
    const std::int64_t a = std::llabs(a0);
    if (a0 < 0) r = detail::combine(r, -1, r, 0);
    for (auto* rows : {&eqs, &les, &kept_eqs}) {
      for (auto& s : *rows) {
        const std::int64_t c = s.coefficient(var);
        if (c != 0) s = detail::combine(s, a, r, -c);
      }
    }
  }

  for (;;) {
    std::optional<std::uint32_t> var;
    for (const auto& r : les) {
      for (const auto& [id, c] : r.coeffs) {
        if (eliminable(id) && (!var || id < *var)) var = id;
      }
    }
    if (!var) break;
    std::vector<detail::Row> upper, lower, rest;
    for (auto& r : les) {
      const std::int64_t c = r.coefficient(*var);
      (c > 0 ? upper : c < 0 ? lower : rest).push_back(std::move(r));
    }
    for (const auto& u : upper) {
      for (const auto& l : lower) rest.push_back(detail::combine(u, -l.coefficient(*var), l, u.coefficient(*var)));
    }
    les = std::move(rest);
  }

  std::vector<Atom> out;
  auto emit = [&](const detail::Row& r, Relation rel) {
    LinearTerm t(r.constant);
    for (const auto& [id, c] : r.coeffs) t = t + LinearTerm::variable(names[id], c);
    const Formula f = Formula::atom(rel, t);
    if (f.is_false()) return false;
    if (!f.is_true()) out.push_back(f.as_atom());
    return true;
  };
  for (const auto& r : kept_eqs) {
    if (!emit(r, Relation::Eq)) return std::nullopt;
  }
  for (const auto& r : les) {
    if (!emit(r, Relation::Le)) return std::nullopt;
  }
  return out;
}

}  // namespace lbemc
