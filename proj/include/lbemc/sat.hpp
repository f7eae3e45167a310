#pragma once

// CDCL propositional solver with two watched literals, first-UIP learning
// and non-chronological backjumping. A theory hook is consulted at every
// propagation fixpoint; it may return a clause that is false under the
// current assignment (a theory conflict), which is learned like any other.
// Decisions take the lowest-index unassigned variable with phase false, so
// runs are deterministic.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace lbemc::sat {

// Literal encoding: 2*var for the positive, 2*var+1 for the negative literal.
using Lit = std::uint32_t;

inline Lit pos(std::uint32_t var) { return var << 1; }
inline Lit neg(std::uint32_t var) { return (var << 1) | 1U; }
inline Lit negate(Lit l) { return l ^ 1U; }
inline std::uint32_t var_of(Lit l) { return l >> 1; }
inline bool is_negative(Lit l) { return (l & 1U) != 0; }

enum class Value : std::int8_t { False = 0, True = 1, Unassigned = -1 };

class Solver {
 public:
  using TheoryHook = std::function<std::optional<std::vector<Lit>>(const Solver&)>;

  std::uint32_t new_var() {
    assigns_.push_back(Value::Unassigned);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    seen_.push_back(0);
    watches_.emplace_back();
    watches_.emplace_back();
    return static_cast<std::uint32_t>(assigns_.size() - 1);
  }

  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(assigns_.size()); }

  Value value(std::uint32_t var) const { return assigns_[var]; }
  Value value_lit(Lit l) const {
    const Value v = assigns_[var_of(l)];
    if (v == Value::Unassigned) return v;
    return (v == Value::True) != is_negative(l) ? Value::True : Value::False;
  }

  // Adds a clause at decision level 0 (backtracking first if needed).
  // Returns false once the clause set is known to be unsatisfiable.
  bool add_clause(std::vector<Lit> lits) {
    if (!ok_) return false;
    backtrack(0);
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<Lit> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == negate(lits[i])) return true;  // tautology
      const Value v = value_lit(lits[i]);
      if (v == Value::True) return true;
      if (v == Value::Unassigned) kept.push_back(lits[i]);
    }
    if (kept.empty()) return ok_ = false;
    if (kept.size() == 1) {
      enqueue(kept[0], kNoReason);
      if (propagate() != kNoReason) ok_ = false;
      return ok_;
    }
    attach(std::move(kept));
    return true;
  }

  bool solve(const TheoryHook& theory = {}) {
    if (!ok_) return false;
    backtrack(0);
    for (;;) {
      std::uint32_t conflict = propagate();
      if (conflict == kNoReason && theory) {
        if (auto clause = theory(*this)) {
          conflict = add_conflict_clause(std::move(*clause));
          if (conflict == kUnsat) return ok_ = false;
          if (conflict == kNoReason) continue;
        }
      }
      if (conflict != kNoReason) {
        if (decision_level() == 0) return ok_ = false;
        auto [learnt, back_level] = analyze(conflict);
        backtrack(back_level);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          const Lit asserting = learnt[0];
          const std::uint32_t ci = attach(std::move(learnt));
          enqueue(asserting, ci);
        }
        continue;
      }
      const std::optional<std::uint32_t> next = pick_branch();
      if (!next) return true;
      trail_lim_.push_back(trail_.size());
      enqueue(neg(*next), kNoReason);
    }
  }

  void backtrack(std::uint32_t level) {
    if (decision_level() <= level) return;
    for (std::size_t i = trail_.size(); i > trail_lim_[level]; --i) {
      const std::uint32_t v = var_of(trail_[i - 1]);
      assigns_[v] = Value::Unassigned;
      reason_[v] = kNoReason;
    }
    trail_.resize(trail_lim_[level]);
    trail_lim_.resize(level);
    qhead_ = std::min(qhead_, trail_.size());
    next_branch_hint_ = 0;
  }

  const std::vector<Lit>& trail() const { return trail_; }
  std::uint32_t decision_level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

 private:
  static constexpr std::uint32_t kNoReason = UINT32_MAX;
  static constexpr std::uint32_t kUnsat = UINT32_MAX - 1;

  std::uint32_t attach(std::vector<Lit> lits) {
    const auto ci = static_cast<std::uint32_t>(clauses_.size());
    watches_[negate(lits[0])].push_back(ci);
    watches_[negate(lits[1])].push_back(ci);
    clauses_.push_back(std::move(lits));
    return ci;
  }

  void enqueue(Lit l, std::uint32_t reason) {
    const std::uint32_t v = var_of(l);
    assigns_[v] = is_negative(l) ? Value::False : Value::True;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  // Returns the index of a falsified clause, or kNoReason.
  std::uint32_t propagate() {
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];  // p became true; visit clauses watching -p
      auto& ws = watches_[p];
      std::size_t keep = 0;
      for (std::size_t k = 0; k < ws.size(); ++k) {
        const std::uint32_t ci = ws[k];
        auto& c = clauses_[ci];
        const Lit false_lit = negate(p);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (value_lit(c[0]) == Value::True) {
          ws[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < c.size(); ++j) {
          if (value_lit(c[j]) != Value::False) {
            std::swap(c[1], c[j]);
            watches_[negate(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = ci;
        if (value_lit(c[0]) == Value::False) {
          for (std::size_t r = k + 1; r < ws.size(); ++r) ws[keep++] = ws[r];
          ws.resize(keep);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c[0], ci);
      }
      ws.resize(keep);
    }
    return kNoReason;
  }

  // Stores a clause that is false under the current assignment and returns
  // it as the conflict, after backtracking to the highest level it mentions.
  std::uint32_t add_conflict_clause(std::vector<Lit> lits) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    if (lits.empty()) return kUnsat;
    std::sort(lits.begin(), lits.end(), [&](Lit a, Lit b) {
      const auto la = level_[var_of(a)], lb = level_[var_of(b)];
      return la != lb ? la > lb : a < b;
    });
    const std::uint32_t top = level_[var_of(lits[0])];
    if (top == 0) return kUnsat;
    backtrack(top);
    if (lits.size() == 1) {
      // a unit conflict: learn it directly at level 0
      backtrack(0);
      enqueue(lits[0], kNoReason);
      if (propagate() != kNoReason) return kUnsat;
      return kNoReason;
    }
    return attach(std::move(lits));
  }

  std::pair<std::vector<Lit>, std::uint32_t> analyze(std::uint32_t conflict) {
    std::vector<Lit> learnt{0};  // slot 0 for the asserting literal
    std::vector<std::uint32_t> touched;
    int pending = 0;
    std::size_t index = trail_.size();
    Lit p = 0;
    bool first = true;
    std::uint32_t ci = conflict;
    for (;;) {
      const auto& c = clauses_[ci];
      for (std::size_t j = first ? 0 : 1; j < c.size(); ++j) {
        const Lit q = c[j];
        const std::uint32_t v = var_of(q);
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        touched.push_back(v);
        if (level_[v] >= decision_level()) {
          ++pending;
        } else {
          learnt.push_back(q);
        }
      }
      first = false;
      do {
        p = trail_[--index];
      } while (!seen_[var_of(p)]);
      --pending;
      if (pending == 0) break;
      ci = reason_[var_of(p)];
      // the reason clause has p at position 0
      auto& rc = clauses_[ci];
      if (rc[0] != p) std::swap(*std::find(rc.begin(), rc.end(), p), rc[0]);
    }
    learnt[0] = negate(p);
    for (auto v : touched) seen_[v] = 0;

    std::uint32_t back = 0;
    if (learnt.size() > 1) {
      std::size_t best = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i) {
        if (level_[var_of(learnt[i])] > level_[var_of(learnt[best])]) best = i;
      }
      std::swap(learnt[1], learnt[best]);
      back = level_[var_of(learnt[1])];
    }
    return {std::move(learnt), back};
  }

  std::optional<std::uint32_t> pick_branch() {
    for (std::uint32_t v = next_branch_hint_; v < num_vars(); ++v) {
      if (assigns_[v] == Value::Unassigned) {
        next_branch_hint_ = v;
        return v;
      }
    }
    next_branch_hint_ = num_vars();
    return std::nullopt;
  }

  std::vector<Value> assigns_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::vector<std::uint32_t>> watches_;  // indexed by literal; clauses watching its negation
  std::vector<std::vector<Lit>> clauses_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::uint32_t next_branch_hint_ = 0;
  bool ok_ = true;
};

}  // namespace lbemc::sat
