#pragma once

// Textual formula syntax (S-expressions) used for debugging, tests and the
// regression corpus:
//
//   formula := "true" | "false"
//            | "(" "and" formula* ")" | "(" "or" formula* ")" | "(" "not" formula ")"
//            | "(" REL term term ")"          REL in  =  distinct  <=  <  >=  >
//            | "(" "prop" INT ")"
//   term    := INT | VAR | "(" "+" term* ")" | "(" "-" term term? ")" | "(" "*" INT term ")"
//   VAR     := identifier, optionally suffixed "@" INT for an SSA index
//
// INT may carry a leading '-'. Atoms are printed in canonical form, e.g.
// x > 0 prints as (<= (+ (* -1 x) 1) 0).

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lbemc/formula.hpp"

namespace lbemc {

inline std::string term_to_sexpr(const LinearTerm& t) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : t.monomials()) {
    parts.push_back(c == 1 ? v.to_string() : "(* " + std::to_string(c) + " " + v.to_string() + ")");
  }
  if (t.constant() != 0 || parts.empty()) parts.push_back(std::to_string(t.constant()));
  if (parts.size() == 1) return parts.front();
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

inline std::string to_sexpr(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Atom:
      return std::string(f.as_atom().relation == Relation::Eq ? "(= " : "(<= ") + term_to_sexpr(f.as_atom().term) +
             " 0)";
    case Formula::Kind::Prop:
      return "(prop " + std::to_string(f.prop_id()) + ")";
    case Formula::Kind::Not:
      return "(not " + to_sexpr(f.operand()) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string s = f.kind() == Formula::Kind::And ? "(and" : "(or";
      for (const auto& c : f.children()) s += " " + to_sexpr(c);
      return s + ")";
    }
  }
  return "?";
}

inline std::string atom_to_string(const Atom& a) {
  return a.term.to_string() + (a.relation == Relation::Eq ? " == 0" : " <= 0");
}

// Compact infix rendering for labels and diagnostics.
inline std::string to_infix(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Atom:
      return atom_to_string(f.as_atom());
    case Formula::Kind::Prop:
      return "v" + std::to_string(f.prop_id());
    case Formula::Kind::Not:
      return "!(" + to_infix(f.operand()) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string s;
      for (const auto& c : f.children()) {
        if (!s.empty()) s += f.kind() == Formula::Kind::And ? " && " : " || ";
        s += "(" + to_infix(c) + ")";
      }
      return s;
    }
  }
  return "?";
}

class SexprParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  Formula parse_formula_top() {
    Formula f = formula();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SexprParseError("sexpr: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string token() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected token");
    return std::string(text_.substr(start, pos_ - start));
  }

  static bool is_int(const std::string& s) {
    std::size_t i = (s[0] == '-' && s.size() > 1) ? 1 : 0;
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  }

  LinearTerm term() {
    if (!peek('(')) {
      std::string t = token();
      if (is_int(t)) return LinearTerm(std::stoll(t));
      auto at = t.find('@');
      if (at == std::string::npos) return LinearTerm::variable(VarRef::current(t));
      return LinearTerm::variable(VarRef::indexed(t.substr(0, at), static_cast<std::uint32_t>(std::stoul(t.substr(at + 1)))));
    }
    expect('(');
    std::string op = token();
    LinearTerm r;
    if (op == "+") {
      while (!peek(')')) r = r + term();
    } else if (op == "-") {
      r = term();
      if (peek(')')) {
        r = -r;
      } else {
        r = r - term();
      }
    } else if (op == "*") {
      std::string k = token();
      if (!is_int(k)) fail("'*' needs an integer coefficient");
      r = term().scaled(std::stoll(k));
    } else {
      fail("unknown term operator '" + op + "'");
    }
    expect(')');
    return r;
  }

  Formula formula() {
    if (!peek('(')) {
      std::string t = token();
      if (t == "true") return Formula::truth();
      if (t == "false") return Formula::falsity();
      fail("unexpected token '" + t + "'");
    }
    expect('(');
    std::string op = token();
    Formula r;
    if (op == "and" || op == "or") {
      std::vector<Formula> parts;
      while (!peek(')')) parts.push_back(formula());
      r = op == "and" ? Formula::conjunction(std::move(parts)) : Formula::disjunction(std::move(parts));
    } else if (op == "not") {
      r = Formula::negation(formula());
    } else if (op == "prop") {
      std::string k = token();
      if (!is_int(k)) fail("prop needs an integer id");
      r = Formula::prop(static_cast<std::uint32_t>(std::stoul(k)));
    } else {
      static const std::unordered_map<std::string, Comparison> rels = {
          {"=", Comparison::Eq},  {"distinct", Comparison::Ne}, {"<=", Comparison::Le},
          {"<", Comparison::Lt},  {">=", Comparison::Ge},       {">", Comparison::Gt}};
      auto it = rels.find(op);
      if (it == rels.end()) fail("unknown operator '" + op + "'");
      LinearTerm lhs = term();
      LinearTerm rhs = term();
      r = Formula::compare(lhs, it->second, rhs);
    }
    expect(')');
    return r;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_sexpr(std::string_view text) { return detail::SexprParser(text).parse_formula_top(); }

}  // namespace lbemc
