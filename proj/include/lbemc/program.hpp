#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lbemc/operation.hpp"

namespace lbemc {

struct LocationId {
  std::uint32_t value = 0;

  friend bool operator==(LocationId, LocationId) = default;
  friend auto operator<=>(LocationId, LocationId) = default;
  std::string to_string() const { return std::to_string(value); }
};

struct Edge {
  LocationId source;
  Operation op;
  LocationId target;
};

// Locations plus an ordered edge sequence. Edge order is significant: it
// fixes rule scheduling and ART expansion order.
struct Cfa {
  std::set<LocationId> locations;
  std::vector<Edge> edges;

  std::vector<std::size_t> outgoing(LocationId l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].source == l) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> incoming(LocationId l) const {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].target == l) in.push_back(i);
    }
    return in;
  }

  bool contains(LocationId l) const { return locations.count(l) != 0; }
};

struct Program {
  Cfa cfa;
  LocationId entry;
  LocationId error;
  std::vector<std::string> variables;  // declaration order

  // Throws Error when a structural invariant is violated.
  void validate() const {
    if (!cfa.contains(entry)) throw Error("lbemc: entry location missing from CFA");
    if (!cfa.contains(error)) throw Error("lbemc: error location missing from CFA");
    const std::set<std::string> declared(variables.begin(), variables.end());
    for (const auto& e : cfa.edges) {
      if (!cfa.contains(e.source) || !cfa.contains(e.target)) {
        throw Error("lbemc: edge " + e.source.to_string() + "->" + e.target.to_string() + " leaves the CFA");
      }
      if (e.target == entry) throw Error("lbemc: edge into the entry location");
      std::set<std::string> used;
      collect_variables(e.op, used);
      for (const auto& v : used) {
        if (!declared.count(v)) throw Error("lbemc: undeclared variable '" + v + "' on an edge");
      }
    }
  }
};

}  // namespace lbemc
