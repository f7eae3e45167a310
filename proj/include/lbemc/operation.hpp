#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>

#include "lbemc/formula_io.hpp"

namespace lbemc {

// Edge label algebra: leaves are assignments, assumes and havocs; Seq and
// Choice are introduced by summarization. Seq is kept right-associated.
class Operation {
 public:
  enum class Kind : std::uint8_t { Assign, Assume, Havoc, Seq, Choice };

  static Operation assign(std::string var, LinearTerm rhs, std::string label = {}) {
    return Operation(std::make_shared<const Node>(
        Node{Kind::Assign, std::move(var), std::move(rhs), Formula::truth(), std::move(label), {}, {}}));
  }
  static Operation assume(Formula cond, std::string label = {}) {
    return Operation(std::make_shared<const Node>(
        Node{Kind::Assume, {}, {}, std::move(cond), std::move(label), {}, {}}));
  }
  static Operation havoc(std::string var) {
    return Operation(
        std::make_shared<const Node>(Node{Kind::Havoc, std::move(var), {}, Formula::truth(), {}, {}, {}}));
  }
  static Operation seq(const Operation& first, const Operation& second) {
    if (first.kind() == Kind::Seq) return seq(first.first(), seq(first.second(), second));
    return Operation(
        std::make_shared<const Node>(Node{Kind::Seq, {}, {}, Formula::truth(), {}, first.node_, second.node_}));
  }
  static Operation choice(const Operation& a, const Operation& b) {
    return Operation(
        std::make_shared<const Node>(Node{Kind::Choice, {}, {}, Formula::truth(), {}, a.node_, b.node_}));
  }

  Kind kind() const { return node_->kind; }
  bool is_leaf() const { return kind() != Kind::Seq && kind() != Kind::Choice; }
  const std::string& var() const { return node_->var; }
  const LinearTerm& rhs() const { return node_->rhs; }
  const Formula& condition() const { return node_->cond; }
  Operation first() const { return Operation(node_->left); }
  Operation second() const { return Operation(node_->right); }
  const void* id() const { return node_.get(); }

  // Label of a leaf: assignments as "x=e", assumes as "[p]".
  std::string leaf_label() const {
    switch (kind()) {
      case Kind::Assign:
        return node_->label.empty() ? var() + "=" + rhs().to_string() : node_->label;
      case Kind::Assume:
        return "[" + (node_->label.empty() ? to_infix(condition()) : node_->label) + "]";
      case Kind::Havoc:
        return var() + "=nondet()";
      default:
        return {};
    }
  }

  // One-line rendering: Seq as "a; b", Choice as "{a || b}".
  std::string to_string() const {
    switch (kind()) {
      case Kind::Seq:
        return first().to_string() + "; " + second().to_string();
      case Kind::Choice:
        return "{" + first().to_string() + " || " + second().to_string() + "}";
      default:
        return leaf_label();
    }
  }

  // Structural tree rendering, e.g. Seq([x>0], Choice(z=0, z=1)).
  std::string to_tree_string() const {
    switch (kind()) {
      case Kind::Seq:
        return "Seq(" + first().to_tree_string() + ", " + second().to_tree_string() + ")";
      case Kind::Choice:
        return "Choice(" + first().to_tree_string() + ", " + second().to_tree_string() + ")";
      default:
        return leaf_label();
    }
  }

  std::size_t leaf_count() const { return is_leaf() ? 1 : first().leaf_count() + second().leaf_count(); }

 private:
  struct Node {
    Kind kind;
    std::string var;
    LinearTerm rhs;
    Formula cond;
    std::string label;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit Operation(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

// Program variables mentioned by an operation (assigned, havocked or read).
inline void collect_variables(const Operation& op, std::set<std::string>& out) {
  switch (op.kind()) {
    case Operation::Kind::Assign:
      out.insert(op.var());
      for (const auto& m : op.rhs().monomials()) out.insert(m.first.name);
      break;
    case Operation::Kind::Havoc:
      out.insert(op.var());
      break;
    case Operation::Kind::Assume:
      for (const auto& v : variables(op.condition())) out.insert(v.name);
      break;
    default:
      collect_variables(op.first(), out);
      collect_variables(op.second(), out);
  }
}

}  // namespace lbemc
