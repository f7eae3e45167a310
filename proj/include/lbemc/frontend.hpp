#pragma once

// Input language:
//
//   program := decl* stmt*
//   decl    := "int" IDENT ";"
//   stmt    := IDENT "=" (expr | "nondet" "(" ")") ";"
//            | "assume" "(" cond ")" ";"  |  "assert" "(" cond ")" ";"
//            | "if" "(" ("*" | cond) ")" block ("else" block)?
//            | "while" "(" ("*" | cond) ")" block
//            | "error" "(" ")" ";"  |  "skip" ";"
//   block   := "{" stmt* "}"
//   expr    := linear integer expression over + - unary-minus, parentheses,
//              and products with at least one constant factor
//   cond    := comparisons (== != < <= > >=) combined with ! && || and parentheses
//
// Comments run from "//" to the end of the line.

#include <cctype>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lbemc/program.hpp"

namespace lbemc {

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Stmt {
  enum class Kind : std::uint8_t { Assign, Havoc, Assume, Assert, If, While, Error, Skip };
  Kind kind = Kind::Skip;
  std::string var;           // Assign, Havoc
  LinearTerm rhs;            // Assign
  Formula cond;              // Assume, Assert, If, While; true for "*"
  bool star = false;         // If/While on "*"
  std::string text;          // compact source text of the assignment or condition
  std::vector<Stmt> body;    // If-then, While
  std::vector<Stmt> orelse;  // If-else
  int line = 0;
  int column = 0;
};

struct SourceProgram {
  std::vector<std::string> declarations;
  std::vector<Stmt> body;
};

namespace detail {

struct Token {
  enum class Kind : std::uint8_t { Ident, Int, Punct, End };
  Kind kind;
  std::string text;
  int line;
  int column;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const std::vector<std::string> two = {"==", "!=", "<=", ">=", "&&", "||"};
  static const std::string one = "(){};=<>!+-*";
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Token::Kind::Int, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
    } else if (i + 1 < src.size() &&
               std::find(two.begin(), two.end(), std::string(src.substr(i, 2))) != two.end()) {
      out.push_back({Token::Kind::Punct, std::string(src.substr(i, 2)), line, col});
      advance(2);
    } else if (one.find(c) != std::string::npos) {
      out.push_back({Token::Kind::Punct, std::string(1, c), line, col});
      advance(1);
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SourceProgram program() {
    SourceProgram p;
    while (peek().kind == Token::Kind::Ident && peek().text == "int") {
      next();
      const Token& name = expect_ident();
      if (keywords().count(name.text)) fail(name, "'" + name.text + "' is a keyword");
      if (!declared_.insert(name.text).second) fail(name, "redeclaration of '" + name.text + "'");
      p.declarations.push_back(name.text);
      expect(";");
    }
    while (peek().kind != Token::Kind::End) p.body.push_back(statement());
    return p;
  }

 private:
  static const std::set<std::string>& keywords() {
    static const std::set<std::string> k = {"int", "assume", "assert", "if", "else", "while", "error", "skip", "nondet"};
    return k;
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at(const std::string& text) const { return peek().kind == Token::Kind::Punct && peek().text == text; }
  bool at_word(const std::string& w) const { return peek().kind == Token::Kind::Ident && peek().text == w; }

  [[noreturn]] static void fail(const Token& t, const std::string& what) { throw ParseError(t.line, t.column, what); }

  const Token& expect(const std::string& text) {
    if (!at(text)) fail(peek(), "expected '" + text + "', found " + describe(peek()));
    return next();
  }
  const Token& expect_word(const std::string& w) {
    if (!at_word(w)) fail(peek(), "expected '" + w + "', found " + describe(peek()));
    return next();
  }
  const Token& expect_ident() {
    if (peek().kind != Token::Kind::Ident) fail(peek(), "expected identifier, found " + describe(peek()));
    return next();
  }
  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? std::string("end of input") : "'" + t.text + "'";
  }

  std::string text_from(std::size_t start) const {
    std::string s;
    for (std::size_t i = start; i < pos_; ++i) s += toks_[i].text;
    return s;
  }

  const Token& variable() {
    const Token& t = expect_ident();
    if (keywords().count(t.text)) fail(t, "unexpected keyword '" + t.text + "'");
    if (!declared_.count(t.text)) fail(t, "undeclared variable '" + t.text + "'");
    return t;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!at("}")) {
      if (peek().kind == Token::Kind::End) fail(peek(), "unterminated block");
      out.push_back(statement());
    }
    expect("}");
    return out;
  }

  // "(" ("*" | cond) ")"; sets star/cond/text
  void guard(Stmt& s) {
    expect("(");
    if (at("*") && peek(1).kind == Token::Kind::Punct && peek(1).text == ")") {
      next();
      s.star = true;
      s.cond = Formula::truth();
      s.text = "*";
    } else {
      const std::size_t start = pos_;
      s.cond = condition();
      s.text = text_from(start);
    }
    expect(")");
  }

  Stmt statement() {
    const Token& head = peek();
    Stmt s;
    s.line = head.line;
    s.column = head.column;
    if (head.kind != Token::Kind::Ident) fail(head, "expected a statement, found " + describe(head));
    if (head.text == "assume" || head.text == "assert") {
      next();
      s.kind = head.text == "assume" ? Stmt::Kind::Assume : Stmt::Kind::Assert;
      expect("(");
      const std::size_t start = pos_;
      s.cond = condition();
      s.text = text_from(start);
      expect(")");
      expect(";");
    } else if (head.text == "if") {
      next();
      s.kind = Stmt::Kind::If;
      guard(s);
      s.body = block();
      if (at_word("else")) {
        next();
        s.orelse = block();
      }
    } else if (head.text == "while") {
      next();
      s.kind = Stmt::Kind::While;
      guard(s);
      s.body = block();
    } else if (head.text == "error") {
      next();
      s.kind = Stmt::Kind::Error;
      expect("(");
      expect(")");
      expect(";");
    } else if (head.text == "skip") {
      next();
      s.kind = Stmt::Kind::Skip;
      expect(";");
    } else {
      const std::size_t start = pos_;
      s.var = variable().text;
      expect("=");
      if (at_word("nondet")) {
        next();
        expect("(");
        expect(")");
        s.kind = Stmt::Kind::Havoc;
      } else {
        s.kind = Stmt::Kind::Assign;
        s.rhs = expression();
      }
      s.text = text_from(start);
      expect(";");
    }
    return s;
  }

  // cond := conj ("||" conj)*
  Formula condition() {
    std::vector<Formula> parts{conjunction()};
    while (at("||")) {
      next();
      parts.push_back(conjunction());
    }
    return parts.size() == 1 ? parts.front() : Formula::disjunction(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{negation()};
    while (at("&&")) {
      next();
      parts.push_back(negation());
    }
    return parts.size() == 1 ? parts.front() : Formula::conjunction(std::move(parts));
  }

  Formula negation() {
    if (at("!")) {
      next();
      return Formula::negation(negation());
    }
    if (at("(")) {
      // either a parenthesized condition or a comparison whose left operand
      // starts with a parenthesis; try the comparison first
      const std::size_t save = pos_;
      try {
        return comparison();
      } catch (const ParseError&) {
        pos_ = save;
      }
      next();
      Formula f = condition();
      expect(")");
      return f;
    }
    return comparison();
  }

  Formula comparison() {
    const LinearTerm lhs = expression();
    static const std::map<std::string, Comparison> ops = {{"==", Comparison::Eq}, {"!=", Comparison::Ne},
                                                          {"<", Comparison::Lt},  {"<=", Comparison::Le},
                                                          {">", Comparison::Gt},  {">=", Comparison::Ge}};
    const Token& op = peek();
    auto it = op.kind == Token::Kind::Punct ? ops.find(op.text) : ops.end();
    if (it == ops.end()) fail(op, "expected a comparison operator, found " + describe(op));
    next();
    const LinearTerm rhs = expression();
    return Formula::compare(lhs, it->second, rhs);
  }

  // expr := term (("+"|"-") term)*
  LinearTerm expression() {
    LinearTerm t = product();
    while (at("+") || at("-")) {
      const bool minus = next().text == "-";
      const LinearTerm r = product();
      t = minus ? t - r : t + r;
    }
    return t;
  }

  LinearTerm product() {
    LinearTerm t = unary();
    while (at("*")) {
      const Token& star = next();
      const LinearTerm r = unary();
      if (t.is_constant()) {
        t = r.scaled(t.constant());
      } else if (r.is_constant()) {
        t = t.scaled(r.constant());
      } else {
        fail(star, "non-linear product");
      }
    }
    return t;
  }

  LinearTerm unary() {
    if (at("-")) {
      next();
      return -unary();
    }
    if (at("(")) {
      next();
      LinearTerm t = expression();
      expect(")");
      return t;
    }
    if (peek().kind == Token::Kind::Int) {
      const Token& t = next();
      try {
        return LinearTerm(std::stoll(t.text));
      } catch (const std::out_of_range&) {
        fail(t, "integer literal out of range");
      }
    }
    const Token& v = variable();
    return LinearTerm::variable(VarRef::current(v.text));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> declared_;
};

class CfaBuilder {
 public:
  static constexpr LocationId kEntry{0};
  static constexpr LocationId kError{1};
  static constexpr LocationId kExit{2};

  Program build(const SourceProgram& src) {
    next_id_ = 3;
    sequence(src.body, kEntry, kExit);
    Program p;
    p.entry = kEntry;
    p.error = kError;
    p.variables = src.declarations;
    prune(p);
    return p;
  }

 private:
  LocationId fresh() { return LocationId{next_id_++}; }

  void edge(LocationId from, Operation op, LocationId to) { edges_.push_back({from, std::move(op), to}); }

  void sequence(const std::vector<Stmt>& stmts, LocationId entry, LocationId exit) {
    if (stmts.empty()) {
      if (entry != exit) edge(entry, Operation::assume(Formula::truth(), "true"), exit);
      return;
    }
    LocationId cur = entry;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      const LocationId target = i + 1 == stmts.size() ? exit : fresh();
      statement(stmts[i], cur, target);
      cur = target;
    }
  }

  // A branch body; an empty one lets the guard edge go straight to exit.
  void branch(const Formula& guard, const std::string& label, const std::vector<Stmt>& body, LocationId entry,
              LocationId exit) {
    if (body.empty()) {
      edge(entry, Operation::assume(guard, label), exit);
      return;
    }
    const LocationId start = fresh();
    edge(entry, Operation::assume(guard, label), start);
    sequence(body, start, exit);
  }

  void statement(const Stmt& s, LocationId entry, LocationId exit) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
        edge(entry, Operation::assign(s.var, s.rhs, s.text), exit);
        break;
      case Stmt::Kind::Havoc:
        edge(entry, Operation::havoc(s.var), exit);
        break;
      case Stmt::Kind::Assume:
        edge(entry, Operation::assume(s.cond, s.text), exit);
        break;
      case Stmt::Kind::Skip:
        edge(entry, Operation::assume(Formula::truth(), "true"), exit);
        break;
      case Stmt::Kind::Error:
        edge(entry, Operation::assume(Formula::truth(), "true"), kError);
        break;
      case Stmt::Kind::Assert: {
        // if (!(c)) { error(); }
        const LocationId fail_loc = fresh();
        edge(entry, Operation::assume(Formula::negation(s.cond), "!(" + s.text + ")"), fail_loc);
        edge(fail_loc, Operation::assume(Formula::truth(), "true"), kError);
        edge(entry, Operation::assume(s.cond, s.text), exit);
        break;
      }
      case Stmt::Kind::If:
        branch(s.cond, label(s), s.body, entry, exit);
        branch(s.star ? Formula::truth() : Formula::negation(s.cond), negated_label(s), s.orelse, entry, exit);
        break;
      case Stmt::Kind::While: {
        LocationId head = entry;
        if (entry == kEntry) {
          // the entry location must not receive the back edge
          head = fresh();
          edge(entry, Operation::assume(Formula::truth(), "true"), head);
        }
        branch(s.cond, label(s), s.body, head, head);
        edge(head, Operation::assume(s.star ? Formula::truth() : Formula::negation(s.cond), negated_label(s)), exit);
        break;
      }
    }
  }

  static std::string label(const Stmt& s) { return s.star ? "true" : s.text; }
  static std::string negated_label(const Stmt& s) { return s.star ? "true" : "!(" + s.text + ")"; }

  // Keeps the locations reachable from the entry, plus the error location.
  void prune(Program& p) {
    std::set<LocationId> reach{kEntry};
    std::deque<LocationId> work{kEntry};
    while (!work.empty()) {
      const LocationId l = work.front();
      work.pop_front();
      for (const auto& e : edges_) {
        if (e.source == l && reach.insert(e.target).second) work.push_back(e.target);
      }
    }
    reach.insert(kError);
    p.cfa.locations = reach;
    for (auto& e : edges_) {
      if (reach.count(e.source)) p.cfa.edges.push_back(std::move(e));
    }
  }

  std::vector<Edge> edges_;
  std::uint32_t next_id_ = 3;
};

}  // namespace detail

inline SourceProgram parse(std::string_view source) { return detail::Parser(source).program(); }

// Builds the single-operation-per-edge CFA. Location ids: 0 is the entry,
// 1 the error location, 2 the program exit, then creation order. Code that
// cannot be reached from the entry is dropped.
inline Program to_cfa(const SourceProgram& p) { return detail::CfaBuilder().build(p); }

inline Program parse_program(std::string_view source) { return to_cfa(parse(source)); }

}  // namespace lbemc
