#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "lbemc/abstraction.hpp"
#include "lbemc/oracle.hpp"
#include "lbemc/summarize.hpp"

namespace lbemc {

enum class Encoding : std::uint8_t { Sbe, Lbe };

struct VerifyConfig {
  AbstractionMode mode = AbstractionMode::Boolean;
  std::size_t max_refinements = 100;
};

struct ArtNode {
  std::uint32_t id = 0;
  LocationId location;
  AbstractState abstract = BddManager::kTrue;
  std::optional<std::uint32_t> parent;
  std::optional<std::size_t> edge;  // CFA edge index from the parent
  std::optional<std::uint32_t> covered_by;
  std::vector<std::uint32_t> children;
};

struct Art {
  std::vector<ArtNode> nodes;  // node 0 is the root
  std::vector<std::uint32_t> waitlist;

  std::size_t size() const { return nodes.size(); }
  bool complete() const { return waitlist.empty(); }
};

// Edges (CFA indices) and ART nodes from the root; nodes has one more entry.
struct CounterexamplePath {
  std::vector<std::size_t> edges;
  std::vector<std::uint32_t> nodes;
};

struct BuildResult {
  Art art;
  std::optional<CounterexamplePath> error_path;  // set when an error node was reached
};

struct PathCheck {
  bool feasible = false;
  std::map<VarRef, Rational> model;  // over SSA-indexed variables
  std::vector<SsaMap> ssa;           // SSA map at each path position
  std::vector<Formula> formulas;     // encoding of each edge
};

enum class Verdict : std::uint8_t { Safe, Unsafe, Unknown };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Safe:
      return "safe";
    case Verdict::Unsafe:
      return "unsafe";
    case Verdict::Unknown:
      return "unknown";
  }
  return "unknown";
}

struct Stats {
  std::size_t art_size = 0;  // nodes of the last ART; abstract-false successors are never added
  std::size_t refinement_steps = 0;
  std::size_t predicates_total = 0;
  std::size_t predicates_avg = 0;  // floor of the mean over locations with a nonempty precision
  std::size_t predicates_max = 0;
  std::uint64_t solver_queries = 0;
  std::size_t rule_applications = 0;
  double wall_time_ms = 0;

  nlohmann::json to_json(Verdict verdict) const {
    return {{"verdict", to_string(verdict)},
            {"art_size", art_size},
            {"refinement_steps", refinement_steps},
            {"predicates", {{"total", predicates_total}, {"avg", predicates_avg}, {"max", predicates_max}}},
            {"solver_queries", solver_queries},
            {"rule_applications", rule_applications},
            {"wall_time_ms", wall_time_ms}};
  }
};

struct VerificationResult {
  Verdict verdict = Verdict::Unknown;
  Stats stats;
  std::string reason;                             // for Unknown
  std::optional<CounterexamplePath> counterexample;  // for Unsafe
  std::map<VarRef, Rational> witness;
  bool integral = false;  // witness is integral and replays concretely to the error location
  Art art;
  ProgramPrecision precision;
};

// Lazy predicate abstraction with CEGAR over one program. The solver is
// borrowed; the BDD manager and predicate table live as long as the checker.
class ModelChecker {
 public:
  ModelChecker(Program program, SmtSolver& solver, VerifyConfig config = {})
      : program_(std::move(program)), solver_(solver), config_(config), abstractor_(solver_, bdd_, predicates_) {
    for (std::size_t i = 0; i < program_.cfa.edges.size(); ++i) out_[program_.cfa.edges[i].source].push_back(i);
  }

  const Program& program() const { return program_; }
  Abstractor& abstractor() { return abstractor_; }
  PredicateTable& predicates() { return predicates_; }
  BddManager& bdd() { return bdd_; }

  // Depth-first ART construction. Children are created in CFA edge order
  // and explored last-in-first-out; coverage is checked before expansion;
  // abstract-false successors are dropped; construction stops at the first
  // node at the error location.
  BuildResult build_art(const ProgramPrecision& pi) {
    BuildResult r;
    Art& art = r.art;
    add_node(art, program_.entry, BddManager::kTrue, std::nullopt, std::nullopt);
    art.waitlist.push_back(0);
    while (!art.waitlist.empty()) {
      const std::uint32_t n = art.waitlist.back();
      art.waitlist.pop_back();
      if (auto coverer = is_covered(art, n)) {
        art.nodes[n].covered_by = *coverer;
        continue;
      }
      const LocationId here = art.nodes[n].location;
      auto it = out_.find(here);
      if (it == out_.end()) continue;
      std::vector<std::uint32_t> created;
      for (auto ei : it->second) {
        const Edge& e = program_.cfa.edges[ei];
        const AbstractState s = post(art.nodes[n].abstract, ei, pi.at(e.target));
        if (s == BddManager::kFalse) continue;
        const std::uint32_t child = add_node(art, e.target, s, n, ei);
        if (e.target == program_.error) {
          for (auto c : created) art.waitlist.push_back(c);
          r.error_path = path_to(art, child);
          return r;
        }
        created.push_back(child);
      }
      for (auto c : created) art.waitlist.push_back(c);
    }
    return r;
  }

  // Lowest-id node at the same location, not covered, not n itself and not
  // below n, whose abstract state is entailed by n's.
  std::optional<std::uint32_t> is_covered(const Art& art, std::uint32_t n) {
    const ArtNode& node = art.nodes[n];
    for (const ArtNode& c : art.nodes) {
      if (c.location != node.location || c.id == n || c.covered_by || is_descendant(art, c.id, n)) continue;
      if (bdd_.entails(node.abstract, c.abstract)) return c.id;
    }
    return std::nullopt;
  }

  // SSA path formula from the all-zero map; feasible iff satisfiable.
  PathCheck check_path(const CounterexamplePath& path) {
    PathCheck c;
    c.ssa.emplace_back();
    for (auto ei : path.edges) {
      EdgeEncoding enc = encode_edge(program_.cfa.edges[ei].op, c.ssa.back());
      c.formulas.push_back(enc.formula);
      c.ssa.push_back(enc.ssa);
    }
    SatResult r = solver_.check_sat(Formula::conjunction(c.formulas));
    c.feasible = r.sat;
    c.model = std::move(r.model);
    return c;
  }

  // Atoms of the path formula attached to interior path positions: an atom
  // goes to position i when each of its variables is at its current SSA
  // index there. Indices are stripped; duplicates dropped.
  std::map<LocationId, std::vector<Atom>> harvest(const CounterexamplePath& path, const PathCheck& check) const {
    if (check.feasible) throw Error("lbemc: predicate extraction needs an infeasible path");
    std::set<Atom> all;
    for (const auto& f : check.formulas) {
      const auto a = raw_atoms(f);
      all.insert(a.begin(), a.end());
    }
    std::map<LocationId, std::vector<Atom>> out;
    for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
      const SsaMap& ssa = check.ssa[i];
      const LocationId loc = program_.cfa.edges[path.edges[i - 1]].target;
      for (const auto& a : all) {
        const bool live = std::all_of(a.term.monomials().begin(), a.term.monomials().end(), [&](const auto& m) {
          return m.first.index && *m.first.index == ssa.get(m.first.name);
        });
        if (!live) continue;
        const Formula stripped = Formula::atom(a.relation, a.term.map_vars([](const VarRef& v) { return v.stripped(); }));
        if (stripped.kind() != Formula::Kind::Atom) continue;
        auto& bucket = out[loc];
        if (std::find(bucket.begin(), bucket.end(), stripped.as_atom()) == bucket.end()) {
          bucket.push_back(stripped.as_atom());
        }
      }
    }
    return out;
  }

  // Harvested predicates not yet tracked by pi; nullopt when there are none
  // (refinement cannot make progress).
  std::optional<std::map<LocationId, std::vector<Atom>>> extract_predicates(const CounterexamplePath& path,
                                                                            const PathCheck& check,
                                                                            const ProgramPrecision& pi) {
    std::map<LocationId, std::vector<Atom>> fresh;
    for (const auto& [loc, atoms] : harvest(path, check)) {
      for (const auto& a : atoms) {
        if (!pi.at(loc).contains(predicates_.intern(a))) fresh[loc].push_back(a);
      }
    }
    if (fresh.empty()) return std::nullopt;
    return fresh;
  }

  VerificationResult verify() {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t queries_before = solver_.queries();
    VerificationResult result;
    ProgramPrecision pi;
    for (;;) {
      BuildResult built = build_art(pi);
      result.stats.art_size = built.art.size();
      if (!built.error_path) {
        result.verdict = Verdict::Safe;
        result.art = std::move(built.art);
        break;
      }
      const CounterexamplePath& path = *built.error_path;
      PathCheck check = check_path(path);
      if (check.feasible) {
        result.verdict = Verdict::Unsafe;
        result.counterexample = path;
        result.witness = check.model;
        result.integral = std::all_of(check.model.begin(), check.model.end(),
                                      [](const auto& kv) { return kv.second.is_integer(); }) &&
                          replay_witness(path_operations(path), check.model);
        result.art = std::move(built.art);
        break;
      }
      if (result.stats.refinement_steps >= config_.max_refinements) {
        result.verdict = Verdict::Unknown;
        result.reason = "refinement bound reached";
        result.art = std::move(built.art);
        break;
      }
      auto fresh = extract_predicates(path, check, pi);
      if (!fresh) {
        result.verdict = Verdict::Unknown;
        result.reason = "no new predicates";
        result.art = std::move(built.art);
        break;
      }
      for (const auto& [loc, atoms] : *fresh) {
        for (const auto& a : atoms) pi.add(loc, predicates_.intern(a));
      }
      ++result.stats.refinement_steps;
    }
    fill_precision_stats(pi, result.stats);
    result.precision = std::move(pi);
    result.stats.solver_queries = solver_.queries() - queries_before;
    result.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  std::vector<Operation> path_operations(const CounterexamplePath& path) const {
    std::vector<Operation> ops;
    for (auto ei : path.edges) ops.push_back(program_.cfa.edges[ei].op);
    return ops;
  }

 private:
  std::uint32_t add_node(Art& art, LocationId loc, AbstractState s, std::optional<std::uint32_t> parent,
                         std::optional<std::size_t> edge) {
    const auto id = static_cast<std::uint32_t>(art.nodes.size());
    art.nodes.push_back(ArtNode{id, loc, s, parent, edge, std::nullopt, {}});
    if (parent) art.nodes[*parent].children.push_back(id);
    return id;
  }

  static bool is_descendant(const Art& art, std::uint32_t candidate, std::uint32_t ancestor) {
    for (std::optional<std::uint32_t> cur = art.nodes[candidate].parent; cur; cur = art.nodes[*cur].parent) {
      if (*cur == ancestor) return true;
    }
    return false;
  }

  static CounterexamplePath path_to(const Art& art, std::uint32_t n) {
    CounterexamplePath p;
    for (std::optional<std::uint32_t> cur = n; cur; cur = art.nodes[*cur].parent) {
      p.nodes.push_back(*cur);
      if (art.nodes[*cur].edge) p.edges.push_back(*art.nodes[*cur].edge);
    }
    std::reverse(p.nodes.begin(), p.nodes.end());
    std::reverse(p.edges.begin(), p.edges.end());
    return p;
  }

  AbstractState post(AbstractState s, std::size_t edge, const Precision& pi) {
    const auto key = std::make_tuple(s, edge, pi.ids());
    if (auto it = post_cache_.find(key); it != post_cache_.end()) return it->second;
    const AbstractState r = abstractor_.post(s, program_.cfa.edges[edge].op, pi, config_.mode);
    post_cache_.emplace(key, r);
    return r;
  }

  static void fill_precision_stats(const ProgramPrecision& pi, Stats& stats) {
    std::set<PredicateId> distinct;
    std::size_t sum = 0, nonempty = 0;
    for (const auto& [loc, prec] : pi.entries()) {
      if (prec.empty()) continue;
      ++nonempty;
      sum += prec.size();
      stats.predicates_max = std::max(stats.predicates_max, prec.size());
      distinct.insert(prec.ids().begin(), prec.ids().end());
    }
    stats.predicates_total = distinct.size();
    stats.predicates_avg = nonempty == 0 ? 0 : sum / nonempty;
  }

  Program program_;
  SmtSolver& solver_;
  VerifyConfig config_;
  BddManager bdd_;
  PredicateTable predicates_;
  Abstractor abstractor_;
  std::map<LocationId, std::vector<std::size_t>> out_;
  std::map<std::tuple<AbstractState, std::size_t, std::vector<PredicateId>>, AbstractState> post_cache_;
};

// Full pipeline on a program: optional summarization, then CEGAR.
inline VerificationResult check_program(const Program& p, Encoding encoding, SmtSolver& solver,
                                        VerifyConfig config = {}) {
  Program input = p;
  std::size_t rules = 0;
  if (encoding == Encoding::Lbe) {
    auto [summarized, trace] = summarize(p);
    input = std::move(summarized);
    rules = trace.rule_applications();
  }
  ModelChecker checker(std::move(input), solver, config);
  VerificationResult r = checker.verify();
  r.stats.rule_applications = rules;
  return r;
}

}  // namespace lbemc
