#pragma once

// SMT-LIB2 process backend. One solver process per instance; every query is
// wrapped in (push 1)/(pop 1). Variables are declared as Real (QF_LRA).

#include <cctype>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "lbemc/smt.hpp"

namespace lbemc {

namespace smtlib {

inline std::string symbol(const VarRef& v) { return "|" + v.to_string() + "|"; }
inline std::string prop_symbol(std::uint32_t id) { return "|prop!" + std::to_string(id) + "|"; }

inline std::string real(std::int64_t k) {
  return k < 0 ? "(- " + std::to_string(detail::checked_neg(k)) + ".0)" : std::to_string(k) + ".0";
}

inline std::string term(const LinearTerm& t) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : t.monomials()) parts.push_back(c == 1 ? symbol(v) : "(* " + real(c) + " " + symbol(v) + ")");
  if (t.constant() != 0 || parts.empty()) parts.push_back(real(t.constant()));
  if (parts.size() == 1) return parts.front();
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

inline std::string formula(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Atom:
      return std::string(f.as_atom().relation == Relation::Eq ? "(= " : "(<= ") + term(f.as_atom().term) + " 0.0)";
    case Formula::Kind::Prop:
      return prop_symbol(f.prop_id());
    case Formula::Kind::Not:
      return "(not " + formula(f.operand()) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string s = f.kind() == Formula::Kind::And ? "(and" : "(or";
      for (const auto& c : f.children()) s += " " + formula(c);
      return s + ")";
    }
  }
  return "true";
}

// Minimal S-expression tree for solver replies.
struct Sexpr {
  std::string atom;
  std::vector<Sexpr> list;
  bool is_list = false;
};

inline Rational parse_number(const Sexpr& e) {
  if (!e.is_list) {
    const std::string& s = e.atom;
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(s));
    std::string frac = s.substr(dot + 1);
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den = detail::checked_mul(den, 10);
    const std::int64_t whole = std::stoll(s.substr(0, dot));
    const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
    return Rational(whole) + Rational(part, den);
  }
  if (e.list.size() == 2 && e.list[0].atom == "-") return -parse_number(e.list[1]);
  if (e.list.size() == 3 && e.list[0].atom == "/") return parse_number(e.list[1]) / parse_number(e.list[2]);
  throw SolverError("lbemc: unexpected numeral in solver model");
}

}  // namespace smtlib

// Talks SMT-LIB2 to a child process over pipes. `command` is run through
// /bin/sh. Writing to a dead solver raises SolverError, so SIGPIPE is
// ignored process-wide while an instance exists.
class ExternalSolver : public SmtSolver {
 public:
  explicit ExternalSolver(std::string command) : command_(std::move(command)) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw SolverError("lbemc: pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw SolverError("lbemc: fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      if (FILE* null = std::fopen("/dev/null", "w")) dup2(fileno(null), STDERR_FILENO);
      close(to_child[1]);
      close(from_child[0]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    if (!out_ || !in_) throw SolverError("lbemc: fdopen() failed");
    send("(set-option :print-success false)");
    send("(set-option :produce-models true)");
    send("(set-logic QF_LRA)");
  }

  ExternalSolver(const ExternalSolver&) = delete;
  ExternalSolver& operator=(const ExternalSolver&) = delete;

  ~ExternalSolver() override {
    if (out_) {
      std::fputs("(exit)\n", out_);
      std::fclose(out_);
    }
    if (in_) std::fclose(in_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
  }

  SatResult check_sat(const Formula& phi) override {
    ++queries_;
    const Formula f = split_disequalities(phi);
    send("(push 1)");
    const auto vars = variables(f);
    const auto ps = props(f);
    for (const auto& v : vars) send("(declare-fun " + smtlib::symbol(v) + " () Real)");
    for (auto id : ps) send("(declare-fun " + smtlib::prop_symbol(id) + " () Bool)");
    send("(assert " + smtlib::formula(f) + ")");
    send("(check-sat)");
    const smtlib::Sexpr answer = read();
    SatResult r;
    if (answer.is_list || (answer.atom != "sat" && answer.atom != "unsat")) {
      throw SolverError("lbemc: solver answered '" + (answer.is_list ? std::string("(...)") : answer.atom) +
                        "' to check-sat");
    }
    if (answer.atom == "sat") {
      r.sat = true;
      if (!vars.empty() || !ps.empty()) {
        send("(get-model)");
        read_model(read(), vars, ps, r);
      }
    }
    send("(pop 1)");
    return r;
  }

  const std::string& command() const { return command_; }

 private:
  void send(const std::string& line) {
    if (std::fputs(line.c_str(), out_) < 0 || std::fputc('\n', out_) == EOF || std::fflush(out_) != 0) {
      throw SolverError("lbemc: cannot write to solver process '" + command_ + "'");
    }
  }

  int next_char() {
    const int c = std::fgetc(in_);
    if (c == EOF) throw SolverError("lbemc: solver process '" + command_ + "' closed its output");
    return c;
  }

  smtlib::Sexpr read() {
    int c = next_char();
    while (std::isspace(c)) c = next_char();
    smtlib::Sexpr e;
    if (c == '(') {
      e.is_list = true;
      for (;;) {
        c = next_char();
        while (std::isspace(c)) c = next_char();
        if (c == ')') return e;
        std::ungetc(c, in_);
        e.list.push_back(read());
      }
    }
    if (c == ')') throw SolverError("lbemc: unbalanced solver reply");
    if (c == '|') {
      e.atom = "|";
      do {
        c = next_char();
        e.atom += static_cast<char>(c);
      } while (c != '|');
      return e;
    }
    if (c == '"') {
      do {
        c = next_char();
        e.atom += static_cast<char>(c);
      } while (c != '"');
      e.atom.pop_back();
      return e;
    }
    while (!std::isspace(c) && c != '(' && c != ')') {
      e.atom += static_cast<char>(c);
      c = next_char();
    }
    std::ungetc(c, in_);
    return e;
  }

  static void read_model(const smtlib::Sexpr& model, const std::set<VarRef>& vars, const std::set<std::uint32_t>& ps,
                         SatResult& r) {
    if (!model.is_list) throw SolverError("lbemc: malformed model: " + model.atom);
    std::map<std::string, VarRef> by_symbol;
    for (const auto& v : vars) by_symbol.emplace(smtlib::symbol(v), v);
    std::map<std::string, std::uint32_t> prop_by_symbol;
    for (auto id : ps) prop_by_symbol.emplace(smtlib::prop_symbol(id), id);
    auto plain = [](std::string s) { return s.size() >= 2 && s.front() == '|' ? s.substr(1, s.size() - 2) : s; };
    for (const auto& def : model.list) {
      if (!def.is_list || def.list.size() != 5 || def.list[0].atom != "define-fun") continue;
      const std::string name = plain(def.list[1].atom);
      const smtlib::Sexpr& value = def.list[4];
      if (auto it = by_symbol.find("|" + name + "|"); it != by_symbol.end()) {
        r.model[it->second] = smtlib::parse_number(value);
      } else if (auto pt = prop_by_symbol.find("|" + name + "|"); pt != prop_by_symbol.end()) {
        r.propositions[pt->second] = !value.is_list && value.atom == "true";
      }
    }
    // unconstrained symbols may be omitted from the model
    for (const auto& v : vars) r.model.try_emplace(v, Rational(0));
    for (auto id : ps) r.propositions.try_emplace(id, false);
  }

  std::string command_;
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  FILE* in_ = nullptr;
};

// Solver command from LBEMC_SOLVER, else the first of z3 / cvc5 found on
// PATH; empty when none is available.
inline std::string find_external_solver() {
  if (const char* env = std::getenv("LBEMC_SOLVER"); env && *env) return env;
  const char* path = std::getenv("PATH");
  if (!path) return {};
  const std::vector<std::pair<std::string, std::string>> known = {
      {"z3", " -in -smt2"}, {"cvc5", " --lang=smt2 --incremental --produce-models"}};
  for (const auto& [exe, args] : known) {
    std::stringstream dirs(path);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      const std::filesystem::path candidate = std::filesystem::path(dir.empty() ? "." : dir) / exe;
      if (access(candidate.c_str(), X_OK) == 0) return candidate.string() + args;
    }
  }
  return {};
}

}  // namespace lbemc
