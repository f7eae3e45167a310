#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lbemc/program.hpp"

namespace lbemc {

struct RuleApplication {
  int rule = 0;
  std::optional<LocationId> removed_location;  // Rule 1
  std::optional<LocationId> source;            // Rule 1: l1; Rule 2: l1
  std::optional<LocationId> target;            // Rule 2: l2
  std::size_t removed_edges = 0;
  std::vector<Edge> new_edges;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["rule"] = rule;
    if (removed_location) j["removed_loc"] = removed_location->value;
    if (source) j["source"] = source->value;
    if (target) j["target"] = target->value;
    j["removed_edges"] = removed_edges;
    nlohmann::json added = nlohmann::json::array();
    for (const auto& e : new_edges) {
      added.push_back({{"source", e.source.value}, {"target", e.target.value}, {"op", e.op.to_tree_string()}});
    }
    j["new_edges"] = std::move(added);
    return j;
  }
};

struct SummarizationTrace {
  std::vector<RuleApplication> steps;

  std::size_t count(int rule) const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.rule == rule ? 1 : 0;
    return n;
  }

  // Rule 1 and Rule 2 applications.
  std::size_t rule_applications() const { return count(1) + count(2); }

  std::string to_json_lines() const {
    std::string out;
    for (const auto& s : steps) out += s.to_json().dump() + "\n";
    return out;
  }
};

namespace detail {

inline void require_location(const Program& p, LocationId l) {
  if (!p.cfa.contains(l)) throw Error("lbemc: unknown location " + l.to_string());
}

inline std::optional<RuleApplication> rule1_in_place(Program& p, LocationId l2) {
  if (l2 == p.entry || l2 == p.error) return std::nullopt;
  const auto in = p.cfa.incoming(l2);
  if (in.size() != 1) return std::nullopt;
  const Edge incoming = p.cfa.edges[in.front()];
  if (incoming.source == l2) return std::nullopt;
  const auto out = p.cfa.outgoing(l2);
  // keeps sinks such as the program exit
  if (out.empty()) return std::nullopt;

  RuleApplication app;
  app.rule = 1;
  app.removed_location = l2;
  app.source = incoming.source;
  app.removed_edges = 1 + out.size();
  for (auto i : out) {
    const Edge& e = p.cfa.edges[i];
    app.new_edges.push_back({incoming.source, Operation::seq(incoming.op, e.op), e.target});
  }
  std::vector<Edge> next;
  next.reserve(p.cfa.edges.size() + out.size());
  for (std::size_t i = 0; i < p.cfa.edges.size(); ++i) {
    if (i == in.front()) {
      next.insert(next.end(), app.new_edges.begin(), app.new_edges.end());
    } else if (p.cfa.edges[i].source != l2) {
      next.push_back(std::move(p.cfa.edges[i]));
    }
  }
  p.cfa.edges = std::move(next);
  p.cfa.locations.erase(l2);
  return app;
}

inline std::optional<RuleApplication> rule2_in_place(Program& p, LocationId l1, LocationId l2) {
  std::optional<std::size_t> first, second;
  for (std::size_t i = 0; i < p.cfa.edges.size() && !second; ++i) {
    const Edge& e = p.cfa.edges[i];
    if (e.source != l1 || e.target != l2) continue;
    (first ? second : first) = i;
  }
  if (!second) return std::nullopt;
  RuleApplication app;
  app.rule = 2;
  app.source = l1;
  app.target = l2;
  app.removed_edges = 2;
  Edge merged{l1, Operation::choice(p.cfa.edges[*first].op, p.cfa.edges[*second].op), l2};
  app.new_edges.push_back(merged);
  p.cfa.edges[*first] = std::move(merged);
  p.cfa.edges.erase(p.cfa.edges.begin() + static_cast<std::ptrdiff_t>(*second));
  return app;
}

}  // namespace detail

// Rule 0: the error location becomes a sink.
inline Program apply_rule0(Program p) {
  std::erase_if(p.cfa.edges, [&](const Edge& e) { return e.source == p.error; });
  return p;
}

// Rule 1 at l2, or nullopt when it does not apply.
inline std::optional<Program> try_rule1(Program p, LocationId l2) {
  detail::require_location(p, l2);
  if (!detail::rule1_in_place(p, l2)) return std::nullopt;
  return p;
}

// Rule 2 on the two earliest parallel edges l1 -> l2, or nullopt.
inline std::optional<Program> try_rule2(Program p, LocationId l1, LocationId l2) {
  detail::require_location(p, l1);
  detail::require_location(p, l2);
  if (!detail::rule2_in_place(p, l1, l2)) return std::nullopt;
  return p;
}

// Large-block encoding: Rule 0 once, then Rules 1 and 2 to a fixpoint.
// Locations are scanned from the highest id down; at each location all
// parallel outgoing edges are merged first, then Rule 1 is tried; the
// scan restarts after every change.
inline std::pair<Program, SummarizationTrace> summarize(Program p) {
  SummarizationTrace trace;
  const std::size_t before = p.cfa.edges.size();
  p = apply_rule0(std::move(p));
  if (p.cfa.edges.size() != before) {
    RuleApplication r0;
    r0.rule = 0;
    r0.source = p.error;
    r0.removed_edges = before - p.cfa.edges.size();
    trace.steps.push_back(std::move(r0));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    const std::vector<LocationId> order(p.cfa.locations.rbegin(), p.cfa.locations.rend());
    for (const LocationId l : order) {
      if (changed) break;
      for (;;) {
        std::optional<RuleApplication> app;
        const auto out = p.cfa.outgoing(l);
        for (std::size_t a = 0; a < out.size() && !app; ++a) {
          for (std::size_t b = a + 1; b < out.size(); ++b) {
            if (p.cfa.edges[out[a]].target == p.cfa.edges[out[b]].target) {
              app = detail::rule2_in_place(p, l, p.cfa.edges[out[a]].target);
              break;
            }
          }
        }
        if (!app) break;
        trace.steps.push_back(std::move(*app));
        changed = true;
      }
      if (auto app = detail::rule1_in_place(p, l)) {
        trace.steps.push_back(std::move(*app));
        changed = true;
      }
    }
  }
  return {std::move(p), std::move(trace)};
}

}  // namespace lbemc
