#pragma once

// Seeded generators for property tests and the acceptance runner, plus a
// literal fresh-variable strongest postcondition used as a reference.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lbemc/lbemc.hpp"

namespace lbemc::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [lo, hi]; modulo reduction keeps sequences identical across
  // standard libraries.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(int percent) { return between(0, 99) < percent; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Source programs: <= 4 variables, <= 12 statements, loops nested at most once.

class ProgramGenerator {
 public:
  explicit ProgramGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string next() {
    vars_.clear();
    const auto n = rng_.between(1, 4);
    for (std::int64_t i = 0; i < n; ++i) vars_.push_back(std::string(1, static_cast<char>('a' + i)));
    budget_ = rng_.between(3, 12);
    std::string s;
    for (const auto& v : vars_) s += "int " + v + ";\n";
    while (budget_ > 0) s += stmt(0, false, "");
    return s;
  }

 private:
  std::string var() { return rng_.pick(vars_); }

  std::string expr() {
    switch (rng_.between(0, 5)) {
      case 0:
        return std::to_string(rng_.between(0, 3));
      case 1:
        return var();
      case 2:
        return var() + " + 1";
      case 3:
        return var() + " - 1";
      case 4:
        return var() + " + " + var();
      default:
        return std::to_string(rng_.between(0, 3)) + " - " + var();
    }
  }

  std::string comparison() {
    static const std::vector<std::string> ops = {"==", "!=", "<", "<=", ">", ">="};
    const std::string rhs = rng_.chance(60) ? std::to_string(rng_.between(0, 3)) : var();
    return var() + " " + rng_.pick(ops) + " " + rhs;
  }

  std::string cond() {
    switch (rng_.between(0, 5)) {
      case 0:
        return comparison() + " && " + comparison();
      case 1:
        return comparison() + " || " + comparison();
      case 2:
        return "!(" + comparison() + ")";
      default:
        return comparison();
    }
  }

  std::string block(int depth, bool in_loop, const std::string& indent) {
    std::string s = "{\n";
    const auto n = rng_.between(1, 3);
    for (std::int64_t i = 0; i < n && budget_ > 0; ++i) s += stmt(depth + 1, in_loop, indent + "  ");
    return s + indent + "}";
  }

  std::string stmt(int depth, bool in_loop, const std::string& indent) {
    --budget_;
    const auto roll = rng_.between(0, 99);
    if (roll < 30) return indent + var() + " = " + expr() + ";\n";
    if (roll < 38) return indent + var() + " = nondet();\n";
    if (roll < 46) return indent + "assume(" + cond() + ");\n";
    if (roll < 64 && depth < 2) {
      std::string s = indent + "if (" + (rng_.chance(20) ? "*" : cond()) + ") " + block(depth, in_loop, indent);
      if (rng_.chance(50) && budget_ > 0) s += " else " + block(depth, in_loop, indent);
      return s + "\n";
    }
    if (roll < 76 && !in_loop) {
      return indent + "while (" + (rng_.chance(25) ? "*" : cond()) + ") " + block(depth, true, indent) + "\n";
    }
    if (roll < 90) return indent + "assert(" + cond() + ");\n";
    if (roll < 95) return indent + "error();\n";
    return indent + "skip;\n";
  }

  Rng rng_;
  std::vector<std::string> vars_;
  std::int64_t budget_ = 0;
};

// ---------------------------------------------------------------------------
// Formulas and operations over current-state variables.

class FormulaGenerator {
 public:
  FormulaGenerator(std::uint64_t seed, std::vector<std::string> vars) : rng_(seed), vars_(std::move(vars)) {}

  Rng& rng() { return rng_; }

  LinearTerm term() {
    LinearTerm t(rng_.between(-3, 3));
    const auto n = rng_.between(1, 2);
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t c = 0;
      while (c == 0) c = rng_.between(-2, 2);
      t = t + LinearTerm::variable(VarRef::current(rng_.pick(vars_)), c);
    }
    return t;
  }

  Formula atom() {
    static const std::vector<Comparison> cmps = {Comparison::Eq, Comparison::Ne, Comparison::Lt,
                                                 Comparison::Le, Comparison::Gt, Comparison::Ge};
    return Formula::compare(term(), rng_.pick(cmps), LinearTerm(rng_.between(-2, 2)));
  }

  Formula formula(int depth) {
    if (depth == 0 || rng_.chance(35)) return atom();
    switch (rng_.between(0, 2)) {
      case 0:
        return formula(depth - 1) && formula(depth - 1);
      case 1:
        return formula(depth - 1) || formula(depth - 1);
      default:
        return !formula(depth - 1);
    }
  }

  // Assignments use unit coefficients so rational and integer existential
  // projection agree.
  Operation leaf() {
    const std::string x = rng_.pick(vars_);
    switch (rng_.between(0, 4)) {
      case 0:
        return Operation::assign(x, LinearTerm(rng_.between(-2, 2)));
      case 1:
        return Operation::assign(x, LinearTerm::variable(VarRef::current(rng_.pick(vars_))).plus_constant(rng_.between(-1, 1)));
      case 2:
        return Operation::assign(
            x, LinearTerm::variable(VarRef::current(x)) + LinearTerm::variable(VarRef::current(rng_.pick(vars_))));
      case 3:
        return Operation::havoc(x);
      default:
        return Operation::assume(formula(1));
    }
  }

  Operation operation(int depth) {
    if (depth == 0 || rng_.chance(30)) return leaf();
    if (rng_.chance(50)) return Operation::seq(operation(depth - 1), operation(depth - 1));
    return Operation::choice(operation(depth - 1), operation(depth - 1));
  }

 private:
  Rng rng_;
  std::vector<std::string> vars_;
};

// ---------------------------------------------------------------------------
// Reference strongest postcondition, literally: each assignment or havoc
// renames the old value of its variable to a fresh indexed copy; Seq
// composes, Choice disjoins (duplicating phi). Fresh indices start at
// `next`, which must exceed every index occurring in phi.

inline Formula reference_sp(const Operation& op, const Formula& phi, std::uint32_t& next) {
  switch (op.kind()) {
    case Operation::Kind::Assume:
      return phi && op.condition();
    case Operation::Kind::Assign: {
      const VarRef old = VarRef::indexed(op.var(), next++);
      const std::map<VarRef, VarRef> m{{VarRef::current(op.var()), old}};
      const LinearTerm rhs = op.rhs().map_vars([&](const VarRef& v) { return v == VarRef::current(op.var()) ? old : v; });
      return rename(phi, m) && Formula::compare(LinearTerm::variable(VarRef::current(op.var())), Comparison::Eq, rhs);
    }
    case Operation::Kind::Havoc:
      return rename(phi, {{VarRef::current(op.var()), VarRef::indexed(op.var(), next++)}});
    case Operation::Kind::Seq:
      return reference_sp(op.second(), reference_sp(op.first(), phi, next), next);
    case Operation::Kind::Choice: {
      const Formula a = reference_sp(op.first(), phi, next);
      return a || reference_sp(op.second(), phi, next);
    }
  }
  return phi;
}

inline Formula reference_sp(const Operation& op, const Formula& phi) {
  std::uint32_t next = 1000;
  return reference_sp(op, phi, next);
}

// ---------------------------------------------------------------------------
// Hand-built CFAs: entry 0, error 1.

struct EdgeSpec {
  std::uint32_t from;
  Operation op;
  std::uint32_t to;
};

inline Program make_program(const std::vector<EdgeSpec>& edges, std::vector<std::string> vars = {"x"}) {
  Program p;
  p.entry = LocationId{0};
  p.error = LocationId{1};
  p.variables = std::move(vars);
  p.cfa.locations = {p.entry, p.error};
  for (const auto& e : edges) {
    p.cfa.locations.insert(LocationId{e.from});
    p.cfa.locations.insert(LocationId{e.to});
    p.cfa.edges.push_back(Edge{LocationId{e.from}, e.op, LocationId{e.to}});
  }
  return p;
}

inline Formula parse(std::string_view sexpr) { return parse_sexpr(sexpr); }

inline LinearTerm var(const std::string& name) { return LinearTerm::variable(VarRef::current(name)); }

}  // namespace lbemc::testing
