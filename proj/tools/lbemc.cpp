#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lbemc/lbemc.hpp"

namespace {

enum Exit { kSafe = 0, kUnsafe = 1, kUnknown = 2, kUsage = 3, kDisagree = 4 };

struct RunConfig {
  std::string input;
  lbemc::Encoding encoding = lbemc::Encoding::Lbe;
  lbemc::AbstractionMode abstraction = lbemc::AbstractionMode::Boolean;
  std::size_t max_refinements = 100;
  std::string solver = "internal";
  std::string solver_cmd;
  std::string stats_path, dot_cfa_path, dot_art_path, trace_path;
  std::optional<std::int64_t> crosscheck;
};

std::string read_input(const std::string& path) {
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

void print_counterexample(const lbemc::Program& p, const lbemc::VerificationResult& r) {
  std::cout << "counterexample:\n";
  for (auto ei : r.counterexample->edges) {
    const lbemc::Edge& e = p.cfa.edges[ei];
    std::cout << "  " << e.source.to_string() << " -> " << e.target.to_string() << ": " << e.op.to_string() << "\n";
  }
  std::cout << "witness" << (r.integral ? "" : " (not replayed)") << ":";
  for (const auto& [v, value] : r.witness) std::cout << " " << v.to_string() << "=" << value.to_string();
  std::cout << "\n";
}

int run(const RunConfig& cfg) {
  const lbemc::Program original = lbemc::parse_program(read_input(cfg.input));
  lbemc::Program program = original;
  lbemc::SummarizationTrace trace;
  if (cfg.encoding == lbemc::Encoding::Lbe) std::tie(program, trace) = lbemc::summarize(original);
  if (!cfg.trace_path.empty()) write_file(cfg.trace_path, trace.to_json_lines());
  if (!cfg.dot_cfa_path.empty()) write_file(cfg.dot_cfa_path, lbemc::to_dot(program));

  std::unique_ptr<lbemc::SmtSolver> solver;
  if (cfg.solver == "external") {
    const std::string cmd = cfg.solver_cmd.empty() ? lbemc::find_external_solver() : cfg.solver_cmd;
    if (cmd.empty()) throw std::runtime_error("no external solver found (set LBEMC_SOLVER or --solver-cmd)");
    solver = std::make_unique<lbemc::ExternalSolver>(cmd);
  } else {
    solver = std::make_unique<lbemc::InternalSolver>();
  }

  lbemc::VerifyConfig vc;
  vc.mode = cfg.abstraction;
  vc.max_refinements = cfg.max_refinements;
  lbemc::ModelChecker checker(program, *solver, vc);
  lbemc::VerificationResult r = checker.verify();
  r.stats.rule_applications = trace.rule_applications();

  if (!cfg.stats_path.empty()) write_file(cfg.stats_path, r.stats.to_json(r.verdict).dump(2) + "\n");
  if (!cfg.dot_art_path.empty()) write_file(cfg.dot_art_path, lbemc::to_dot(r.art, program, checker.abstractor()));

  std::cout << "verdict: " << lbemc::to_string(r.verdict);
  if (r.verdict == lbemc::Verdict::Unknown) std::cout << " (" << r.reason << ")";
  std::cout << "\n";
  if (r.verdict == lbemc::Verdict::Unsafe) print_counterexample(program, r);

  if (cfg.crosscheck) {
    lbemc::DomainBound bound;
    bound.lo = 0;
    bound.hi = *cfg.crosscheck;
    const lbemc::Reachability reach = lbemc::explicit_reachable(original, bound);
    // the bounded search under-approximates: an unsafe verdict only
    // contradicts it when the replayed witness stays inside the bound
    const bool in_bound = r.integral && std::ranges::all_of(r.witness, [&](const auto& kv) {
                            return kv.second >= lbemc::Rational(bound.lo) && kv.second <= lbemc::Rational(bound.hi);
                          });
    const bool disagree = (r.verdict == lbemc::Verdict::Safe && reach == lbemc::Reachability::Reachable) ||
                          (r.verdict == lbemc::Verdict::Unsafe && reach == lbemc::Reachability::NotReachable &&
                           in_bound);
    std::cout << "crosscheck [0," << *cfg.crosscheck << "]: "
              << (reach == lbemc::Reachability::Reachable      ? "reachable"
                  : reach == lbemc::Reachability::NotReachable ? "not reachable"
                                                               : "budget exceeded")
              << (disagree ? " (DISAGREES)" : "") << "\n";
    if (disagree) return kDisagree;
  }

  switch (r.verdict) {
    case lbemc::Verdict::Safe:
      return kSafe;
    case lbemc::Verdict::Unsafe:
      return kUnsafe;
    case lbemc::Verdict::Unknown:
      return kUnknown;
  }
  return kUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicate-abstraction model checker with large-block encoding"};
  RunConfig cfg;
  std::optional<std::size_t> gen;
  bool bug = false;
  std::string gen_out;

  app.add_option("input", cfg.input, "Program file (.imp), or - for stdin");
  std::string encoding = "lbe", abstraction = "boolean";
  app.add_option("--encoding", encoding, "Block encoding")->check(CLI::IsMember({"sbe", "lbe"}))->capture_default_str();
  app.add_option("--abstraction", abstraction, "Predicate abstraction")
      ->check(CLI::IsMember({"cartesian", "boolean"}))
      ->capture_default_str();
  app.add_option("--max-refinements", cfg.max_refinements, "Refinement bound")->capture_default_str();
  app.add_option("--solver", cfg.solver, "SMT backend")->check(CLI::IsMember({"internal", "external"}))->capture_default_str();
  app.add_option("--solver-cmd", cfg.solver_cmd, "External solver command (default: $LBEMC_SOLVER, z3, cvc5)");
  app.add_option("--stats", cfg.stats_path, "Write run statistics as JSON");
  app.add_option("--dot-cfa", cfg.dot_cfa_path, "Write the (summarized) CFA as DOT");
  app.add_option("--dot-art", cfg.dot_art_path, "Write the final ART as DOT");
  app.add_option("--trace", cfg.trace_path, "Write summarization steps as JSON lines");
  app.add_option("--crosscheck", cfg.crosscheck,
                 "Compare against explicit-state search with every variable in [0,B]; exit 4 on disagreement");
  app.add_option("--gen-test-locks", gen, "Print the test_locks benchmark with N locks and exit");
  app.add_flag("--bug", bug, "With --gen-test-locks: make the error reachable");
  app.add_option("-o,--output", gen_out, "With --gen-test-locks: output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  cfg.encoding = encoding == "sbe" ? lbemc::Encoding::Sbe : lbemc::Encoding::Lbe;
  cfg.abstraction = abstraction == "cartesian" ? lbemc::AbstractionMode::Cartesian : lbemc::AbstractionMode::Boolean;

  try {
    if (gen) {
      const std::string text = lbemc::gen_test_locks(*gen, bug);
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        write_file(gen_out, text);
      }
      return 0;
    }
    if (cfg.input.empty()) {
      std::cerr << "lbemc: no input file\n" << app.help();
      return kUsage;
    }
    return run(cfg);
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << (what.starts_with("lbemc: ") ? "" : "lbemc: ") << what << "\n";
    return kUsage;
  }
}
