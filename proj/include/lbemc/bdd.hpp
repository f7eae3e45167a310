#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "lbemc/formula.hpp"

namespace lbemc {

// Reduced ordered BDDs over variables ordered by id. Nodes are never freed;
// one manager lives for one verification run. Node 0 is false, node 1 true.
class BddManager {
 public:
  using Node = std::uint32_t;
  static constexpr Node kFalse = 0;
  static constexpr Node kTrue = 1;

  BddManager() {
    nodes_.push_back({kTerminalVar, 0, 0});
    nodes_.push_back({kTerminalVar, 1, 1});
  }

  Node var(std::uint32_t v) { return make(v, kFalse, kTrue); }
  Node nvar(std::uint32_t v) { return make(v, kTrue, kFalse); }
  Node literal(std::uint32_t v, bool positive) { return positive ? var(v) : nvar(v); }

  bool is_terminal(Node n) const { return n <= kTrue; }
  std::uint32_t top_var(Node n) const { return nodes_[n].var; }
  Node low(Node n) const { return nodes_[n].low; }
  Node high(Node n) const { return nodes_[n].high; }
  std::size_t size() const { return nodes_.size(); }

  Node negate(Node a) {
    if (a == kFalse) return kTrue;
    if (a == kTrue) return kFalse;
    if (auto it = not_cache_.find(a); it != not_cache_.end()) return it->second;
    const Node r = make(top_var(a), negate(low(a)), negate(high(a)));
    not_cache_.emplace(a, r);
    return r;
  }

  Node conj(Node a, Node b) { return apply(Op::And, a, b); }
  Node disj(Node a, Node b) { return apply(Op::Or, a, b); }

  // a -> b is valid
  bool entails(Node a, Node b) { return conj(a, negate(b)) == kFalse; }

  // Rebuilds the Boolean function as a formula, mapping each variable
  // through `leaf` (ite expanded as (v and hi) or (not v and lo)).
  Formula to_formula(Node n, const std::function<Formula(std::uint32_t)>& leaf) const {
    std::unordered_map<Node, Formula> memo;
    std::function<Formula(Node)> go = [&](Node m) -> Formula {
      if (m == kFalse) return Formula::falsity();
      if (m == kTrue) return Formula::truth();
      if (auto it = memo.find(m); it != memo.end()) return it->second;
      const Formula v = leaf(top_var(m));
      const Formula r = (v && go(high(m))) || (!v && go(low(m)));
      memo.emplace(m, r);
      return r;
    };
    return go(n);
  }

 private:
  static constexpr std::uint32_t kTerminalVar = UINT32_MAX;
  enum class Op : std::uint8_t { And, Or };

  struct Entry {
    std::uint32_t var;
    Node low;
    Node high;
  };

  Node make(std::uint32_t v, Node lo, Node hi) {
    if (lo == hi) return lo;
    const auto key = std::make_tuple(v, lo, hi);
    if (auto it = unique_.find(key); it != unique_.end()) return it->second;
    const auto id = static_cast<Node>(nodes_.size());
    nodes_.push_back({v, lo, hi});
    unique_.emplace(key, id);
    return id;
  }

  Node apply(Op op, Node a, Node b) {
    if (op == Op::And) {
      if (a == kFalse || b == kFalse) return kFalse;
      if (a == kTrue) return b;
      if (b == kTrue || a == b) return a;
    } else {
      if (a == kTrue || b == kTrue) return kTrue;
      if (a == kFalse) return b;
      if (b == kFalse || a == b) return a;
    }
    if (a > b) std::swap(a, b);
    const auto key = std::make_tuple(static_cast<std::uint8_t>(op), a, b);
    if (auto it = apply_cache_.find(key); it != apply_cache_.end()) return it->second;
    const std::uint32_t va = top_var(a), vb = top_var(b);
    const std::uint32_t v = std::min(va, vb);
    const Node alo = va == v ? low(a) : a, ahi = va == v ? high(a) : a;
    const Node blo = vb == v ? low(b) : b, bhi = vb == v ? high(b) : b;
    const Node r = make(v, apply(op, alo, blo), apply(op, ahi, bhi));
    apply_cache_.emplace(key, r);
    return r;
  }

  std::vector<Entry> nodes_;
  std::map<std::tuple<std::uint32_t, Node, Node>, Node> unique_;
  std::map<std::tuple<std::uint8_t, Node, Node>, Node> apply_cache_;
  std::unordered_map<Node, Node> not_cache_;
};

}  // namespace lbemc
