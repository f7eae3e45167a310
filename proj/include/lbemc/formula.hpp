#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lbemc/term.hpp"

namespace lbemc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Relation : std::uint8_t { Eq, Le };

// Canonical linear constraint `term REL 0` with integer coefficients.
// Construction goes through Formula::atom, which divides out the coefficient
// gcd (rounding the constant for <=), normalizes the sign of equalities and
// folds variable-free constraints to true/false.
struct Atom {
  Relation relation = Relation::Le;
  LinearTerm term;

  bool holds(const Rational& value) const { return relation == Relation::Eq ? value.sign() == 0 : value.sign() <= 0; }

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.relation <=> b.relation; c != 0) return c;
    return a.term <=> b.term;
  }
};

enum class Comparison : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

// Immutable, structurally shared quantifier-free formula. Nodes are shared
// between formulas, so traversals memoize on node identity.
class Formula {
 public:
  enum class Kind : std::uint8_t { True, False, Atom, Prop, Not, And, Or };

  Formula() : Formula(truth()) {}

  static Formula truth() {
    static const Formula f(std::make_shared<const Node>(Node{Kind::True, {}, 0, {}}));
    return f;
  }
  static Formula falsity() {
    static const Formula f(std::make_shared<const Node>(Node{Kind::False, {}, 0, {}}));
    return f;
  }
  static Formula constant(bool b) { return b ? truth() : falsity(); }

  static Formula atom(Relation rel, LinearTerm term);
  static Formula atom(const Atom& a) { return atom(a.relation, a.term); }
  static Formula prop(std::uint32_t id) { return Formula(std::make_shared<const Node>(Node{Kind::Prop, {}, id, {}})); }
  static Formula negation(const Formula& f);
  static Formula conjunction(std::vector<Formula> parts) { return junction(Kind::And, std::move(parts)); }
  static Formula disjunction(std::vector<Formula> parts) { return junction(Kind::Or, std::move(parts)); }
  static Formula compare(const LinearTerm& lhs, Comparison cmp, const LinearTerm& rhs);
  static Formula iff(const Formula& a, const Formula& b) {
    return disjunction({conjunction({a, b}), conjunction({negation(a), negation(b)})});
  }

  Kind kind() const { return node_->kind; }
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  const Atom& as_atom() const { return node_->atom; }
  std::uint32_t prop_id() const { return node_->prop; }
  const std::vector<Formula>& children() const { return node_->children; }
  const Formula& operand() const { return node_->children.front(); }

  // Identity of the shared node; equal ids imply equal formulas.
  const void* id() const { return node_.get(); }

  friend Formula operator&&(const Formula& a, const Formula& b) { return conjunction({a, b}); }
  friend Formula operator||(const Formula& a, const Formula& b) { return disjunction({a, b}); }
  friend Formula operator!(const Formula& a) { return negation(a); }

 private:
  struct Node {
    Kind kind;
    Atom atom;
    std::uint32_t prop;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula junction(Kind kind, std::vector<Formula> parts) {
    const Kind unit = kind == Kind::And ? Kind::True : Kind::False;
    const Kind zero = kind == Kind::And ? Kind::False : Kind::True;
    std::vector<Formula> flat;
    flat.reserve(parts.size());
    for (auto& p : parts) {
      if (p.kind() == zero) return p;
      if (p.kind() == unit) continue;
      if (p.kind() == kind) {
        for (const auto& c : p.children()) flat.push_back(c);
      } else {
        flat.push_back(std::move(p));
      }
    }
    if (flat.empty()) return constant(kind == Kind::And);
    if (flat.size() == 1) return flat.front();
    return Formula(std::make_shared<const Node>(Node{kind, {}, 0, std::move(flat)}));
  }

  std::shared_ptr<const Node> node_;
};

inline Formula Formula::atom(Relation rel, LinearTerm term) {
  if (term.is_constant()) {
    return constant(rel == Relation::Eq ? term.constant() == 0 : term.constant() <= 0);
  }
  const std::int64_t g = term.coefficient_gcd();
  if (rel == Relation::Eq) {
    if (term.constant() % g != 0) return falsity();
    LinearTerm scaled = LinearTerm(term.constant() / g);
    for (const auto& [v, c] : term.monomials()) scaled = scaled + LinearTerm::variable(v, c / g);
    if (scaled.monomials().front().second < 0) scaled = -scaled;
    term = std::move(scaled);
  } else if (g != 1) {
    // sum(a*x) + c <= 0 over integers  <=>  sum(a/g*x) + ceil(c/g) <= 0
    LinearTerm scaled = LinearTerm(detail::ceil_div(term.constant(), g));
    for (const auto& [v, c] : term.monomials()) scaled = scaled + LinearTerm::variable(v, c / g);
    term = std::move(scaled);
  }
  return Formula(std::make_shared<const Node>(Node{Kind::Atom, Atom{rel, std::move(term)}, 0, {}}));
}

inline Formula Formula::negation(const Formula& f) {
  switch (f.kind()) {
    case Kind::True:
      return falsity();
    case Kind::False:
      return truth();
    case Kind::Not:
      return f.operand();
    default:
      return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, 0, {f}}));
  }
}

inline Formula Formula::compare(const LinearTerm& lhs, Comparison cmp, const LinearTerm& rhs) {
  const LinearTerm d = lhs - rhs;
  switch (cmp) {
    case Comparison::Eq:
      return atom(Relation::Eq, d);
    case Comparison::Ne:
      return negation(atom(Relation::Eq, d));
    case Comparison::Le:
      return atom(Relation::Le, d);
    case Comparison::Lt:  // d < 0  <=>  d + 1 <= 0 over integers
      return atom(Relation::Le, d.plus_constant(1));
    case Comparison::Ge:
      return atom(Relation::Le, -d);
    case Comparison::Gt:
      return atom(Relation::Le, (-d).plus_constant(1));
  }
  throw Error("lbemc: bad comparison");
}

// ---------------------------------------------------------------------------
// Traversals

namespace detail {

// Rebuilds a formula bottom-up, memoizing per shared node.
class FormulaRewriter {
 public:
  using LeafFn = std::function<Formula(const Formula&)>;
  explicit FormulaRewriter(LeafFn leaf) : leaf_(std::move(leaf)) {}

  Formula operator()(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    Formula r;
    switch (f.kind()) {
      case Formula::Kind::True:
      case Formula::Kind::False:
        r = f;
        break;
      case Formula::Kind::Atom:
      case Formula::Kind::Prop:
        r = leaf_(f);
        break;
      case Formula::Kind::Not:
        r = Formula::negation((*this)(f.operand()));
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        std::vector<Formula> parts;
        parts.reserve(f.children().size());
        for (const auto& c : f.children()) parts.push_back((*this)(c));
        r = f.kind() == Formula::Kind::And ? Formula::conjunction(std::move(parts))
                                           : Formula::disjunction(std::move(parts));
        break;
      }
    }
    memo_.emplace(f.id(), r);
    return r;
  }

 private:
  LeafFn leaf_;
  std::unordered_map<const void*, Formula> memo_;
};

template <class Visit>
void for_each_leaf(const Formula& f, Visit&& visit) {
  std::unordered_map<const void*, bool> seen;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (!seen.emplace(cur->id(), true).second) continue;
    switch (cur->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Prop:
        visit(*cur);
        break;
      case Formula::Kind::Not:
      case Formula::Kind::And:
      case Formula::Kind::Or:
        for (const auto& c : cur->children()) stack.push_back(&c);
        break;
      default:
        break;
    }
  }
}

}  // namespace detail

// Distinct atoms exactly as they occur (SSA indices kept).
inline std::set<Atom> raw_atoms(const Formula& f) {
  std::set<Atom> out;
  detail::for_each_leaf(f, [&](const Formula& leaf) {
    if (leaf.kind() == Formula::Kind::Atom) out.insert(leaf.as_atom());
  });
  return out;
}

// Distinct atoms with SSA indices stripped to current-state form.
inline std::set<Atom> atoms(const Formula& f) {
  std::set<Atom> out;
  for (const auto& a : raw_atoms(f)) {
    Formula stripped = Formula::atom(a.relation, a.term.map_vars([](const VarRef& v) { return v.stripped(); }));
    if (stripped.kind() == Formula::Kind::Atom) out.insert(stripped.as_atom());
  }
  return out;
}

inline std::set<VarRef> variables(const Formula& f) {
  std::set<VarRef> out;
  detail::for_each_leaf(f, [&](const Formula& leaf) {
    if (leaf.kind() != Formula::Kind::Atom) return;
    for (const auto& m : leaf.as_atom().term.monomials()) out.insert(m.first);
  });
  return out;
}

inline std::set<std::uint32_t> props(const Formula& f) {
  std::set<std::uint32_t> out;
  detail::for_each_leaf(f, [&](const Formula& leaf) {
    if (leaf.kind() == Formula::Kind::Prop) out.insert(leaf.prop_id());
  });
  return out;
}

// Largest SSA index occurring in f, if any.
inline std::optional<std::uint32_t> max_index(const Formula& f) {
  std::optional<std::uint32_t> best;
  for (const auto& v : variables(f)) {
    if (v.index && (!best || *v.index > *best)) best = v.index;
  }
  return best;
}

// Rebuilds every atom through `leaf` (atoms and props; structure kept).
inline Formula map_leaves(const Formula& f, std::function<Formula(const Formula&)> leaf) {
  return detail::FormulaRewriter(std::move(leaf))(f);
}

// Simultaneous, capture-free variable substitution. Variables absent from
// the map are kept; the resulting map on f's variables must be injective.
inline Formula rename(const Formula& f, const std::map<VarRef, VarRef>& mapping) {
  const auto vars = variables(f);
  std::set<VarRef> images;
  for (const auto& v : vars) {
    auto it = mapping.find(v);
    if (!images.insert(it == mapping.end() ? v : it->second).second) {
      throw Error("lbemc: rename map is not injective on the formula's variables (" + v.to_string() + ")");
    }
  }
  return map_leaves(f, [&](const Formula& leaf) {
    if (leaf.kind() != Formula::Kind::Atom) return leaf;
    const Atom& a = leaf.as_atom();
    return Formula::atom(a.relation, a.term.map_vars([&](const VarRef& v) {
      auto it = mapping.find(v);
      return it == mapping.end() ? v : it->second;
    }));
  });
}

// Negation normal form: Not only above equality atoms and propositions;
// a negated <= atom is rewritten to the complementary integer atom.
inline Formula to_nnf(const Formula& f) {
  std::unordered_map<const void*, Formula> pos_memo, neg_memo;
  std::function<Formula(const Formula&, bool)> go = [&](const Formula& g, bool negate) -> Formula {
    auto& memo = negate ? neg_memo : pos_memo;
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula r;
    switch (g.kind()) {
      case Formula::Kind::True:
      case Formula::Kind::False:
        r = negate ? Formula::negation(g) : g;
        break;
      case Formula::Kind::Prop:
        r = negate ? Formula::negation(g) : g;
        break;
      case Formula::Kind::Atom:
        if (!negate) {
          r = g;
        } else if (g.as_atom().relation == Relation::Le) {
          r = Formula::atom(Relation::Le, (-g.as_atom().term).plus_constant(1));
        } else {
          r = Formula::negation(g);
        }
        break;
      case Formula::Kind::Not:
        r = go(g.operand(), !negate);
        break;
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        std::vector<Formula> parts;
        for (const auto& c : g.children()) parts.push_back(go(c, negate));
        const bool conj = (g.kind() == Formula::Kind::And) != negate;
        r = conj ? Formula::conjunction(std::move(parts)) : Formula::disjunction(std::move(parts));
        break;
      }
    }
    memo.emplace(g.id(), r);
    return r;
  };
  return go(f, false);
}

// Evaluates f under a rational valuation and a proposition valuation.
template <class VarValue, class PropValue>
bool evaluate(const Formula& f, VarValue&& var_value, PropValue&& prop_value) {
  std::unordered_map<const void*, bool> memo;
  std::function<bool(const Formula&)> go = [&](const Formula& g) -> bool {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    bool r = false;
    switch (g.kind()) {
      case Formula::Kind::True:
        r = true;
        break;
      case Formula::Kind::False:
        r = false;
        break;
      case Formula::Kind::Atom:
        r = g.as_atom().holds(g.as_atom().term.evaluate(var_value));
        break;
      case Formula::Kind::Prop:
        r = prop_value(g.prop_id());
        break;
      case Formula::Kind::Not:
        r = !go(g.operand());
        break;
      case Formula::Kind::And:
        r = true;
        for (const auto& c : g.children()) {
          if (!go(c)) {
            r = false;
            break;
          }
        }
        break;
      case Formula::Kind::Or:
        r = false;
        for (const auto& c : g.children()) {
          if (go(c)) {
            r = true;
            break;
          }
        }
        break;
    }
    memo.emplace(g.id(), r);
    return r;
  };
  return go(f);
}

}  // namespace lbemc
