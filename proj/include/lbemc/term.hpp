#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lbemc/rational.hpp"

namespace lbemc {

// A program variable, optionally carrying an SSA index. An absent index
// denotes the current-state variable; indexed copies stand for earlier
// (existentially quantified) values.
struct VarRef {
  std::string name;
  std::optional<std::uint32_t> index;

  static VarRef current(std::string n) { return VarRef{std::move(n), std::nullopt}; }
  static VarRef indexed(std::string n, std::uint32_t i) { return VarRef{std::move(n), i}; }

  bool is_current() const { return !index.has_value(); }
  VarRef stripped() const { return VarRef{name, std::nullopt}; }

  std::string to_string() const { return index ? name + "@" + std::to_string(*index) : name; }

  friend bool operator==(const VarRef&, const VarRef&) = default;
  friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

// constant + sum(coefficient * variable), one entry per variable, no zero
// coefficients, entries sorted by variable.
class LinearTerm {
 public:
  using Monomial = std::pair<VarRef, std::int64_t>;

  LinearTerm() = default;
  explicit LinearTerm(std::int64_t constant) : constant_(constant) {}

  static LinearTerm variable(VarRef v, std::int64_t coefficient = 1) {
    LinearTerm t;
    if (coefficient != 0) t.monomials_.emplace_back(std::move(v), coefficient);
    return t;
  }

  std::int64_t constant() const { return constant_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  bool is_constant() const { return monomials_.empty(); }

  std::int64_t coefficient(const VarRef& v) const {
    auto it = std::lower_bound(monomials_.begin(), monomials_.end(), v,
                               [](const Monomial& m, const VarRef& key) { return m.first < key; });
    return (it != monomials_.end() && it->first == v) ? it->second : 0;
  }

  LinearTerm operator+(const LinearTerm& o) const {
    LinearTerm r;
    r.constant_ = detail::checked_add(constant_, o.constant_);
    r.monomials_.reserve(monomials_.size() + o.monomials_.size());
    auto a = monomials_.begin(), b = o.monomials_.begin();
    while (a != monomials_.end() || b != o.monomials_.end()) {
      if (b == o.monomials_.end() || (a != monomials_.end() && a->first < b->first)) {
        r.monomials_.push_back(*a++);
      } else if (a == monomials_.end() || b->first < a->first) {
        r.monomials_.push_back(*b++);
      } else {
        std::int64_t c = detail::checked_add(a->second, b->second);
        if (c != 0) r.monomials_.emplace_back(a->first, c);
        ++a;
        ++b;
      }
    }
    return r;
  }

  LinearTerm scaled(std::int64_t k) const {
    if (k == 0) return LinearTerm{};
    LinearTerm r;
    r.constant_ = detail::checked_mul(constant_, k);
    r.monomials_.reserve(monomials_.size());
    for (const auto& [v, c] : monomials_) r.monomials_.emplace_back(v, detail::checked_mul(c, k));
    return r;
  }

  LinearTerm operator-() const { return scaled(-1); }
  LinearTerm operator-(const LinearTerm& o) const { return *this + (-o); }

  LinearTerm plus_constant(std::int64_t k) const {
    LinearTerm r = *this;
    r.constant_ = detail::checked_add(constant_, k);
    return r;
  }

  // Replaces every variable through f; colliding images are summed.
  template <class F>
  LinearTerm map_vars(F&& f) const {
    LinearTerm r(constant_);
    for (const auto& [v, c] : monomials_) r = r + variable(f(v), c);
    return r;
  }

  LinearTerm substitute(const VarRef& v, const LinearTerm& replacement) const {
    std::int64_t c = coefficient(v);
    if (c == 0) return *this;
    LinearTerm rest = *this;
    std::erase_if(rest.monomials_, [&](const Monomial& m) { return m.first == v; });
    return rest + replacement.scaled(c);
  }

  // gcd of the variable coefficients (0 for a constant term).
  std::int64_t coefficient_gcd() const {
    std::int64_t g = 0;
    for (const auto& m : monomials_) g = std::gcd(g, std::llabs(m.second));
    return g;
  }

  template <class Valuation>
  Rational evaluate(Valuation&& value_of) const {
    Rational r(constant_);
    for (const auto& [v, c] : monomials_) r += Rational(c) * value_of(v);
    return r;
  }

  // Human-readable infix form, e.g. "2*x - y + 3".
  std::string to_string() const {
    std::string s;
    for (const auto& [v, c] : monomials_) {
      std::int64_t mag = c < 0 ? -c : c;
      if (s.empty()) {
        if (c < 0) s += "-";
      } else {
        s += c < 0 ? " - " : " + ";
      }
      if (mag != 1) s += std::to_string(mag) + "*";
      s += v.to_string();
    }
    if (s.empty()) return std::to_string(constant_);
    if (constant_ > 0) s += " + " + std::to_string(constant_);
    if (constant_ < 0) s += " - " + std::to_string(-constant_);
    return s;
  }

  friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
  friend auto operator<=>(const LinearTerm& a, const LinearTerm& b) {
    if (auto c = a.monomials_ <=> b.monomials_; c != 0) return c;
    return a.constant_ <=> b.constant_;
  }

 private:
  std::int64_t constant_ = 0;
  std::vector<Monomial> monomials_;
};

}  // namespace lbemc
