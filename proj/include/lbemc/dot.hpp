#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include "lbemc/engine.hpp"

namespace lbemc {

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Locations as circles (entry bold, error doubled), edges labeled with their
// operation. Output depends only on the program.
inline std::string to_dot(const Program& p) {
  std::ostringstream o;
  o << "digraph cfa {\n  node [shape=circle];\n";
  for (const auto& l : p.cfa.locations) {
    o << "  l" << l.value << " [label=" << detail::dot_quote(l.to_string());
    if (l == p.entry) o << ", style=bold";
    if (l == p.error) o << ", shape=doublecircle";
    o << "];\n";
  }
  for (const auto& e : p.cfa.edges) {
    o << "  l" << e.source.value << " -> l" << e.target.value << " [label=" << detail::dot_quote(e.op.to_string())
      << "];\n";
  }
  o << "}\n";
  return o.str();
}

// ART nodes labeled "id @ location" over the abstract state; covered nodes
// are dashed with a dotted link to their coverer.
inline std::string to_dot(const Art& art, const Program& p, Abstractor& abs) {
  std::ostringstream o;
  o << "digraph art {\n  node [shape=box];\n";
  for (const auto& n : art.nodes) {
    o << "  n" << n.id << " [label="
      << detail::dot_quote(std::to_string(n.id) + " @ " + n.location.to_string() + "\n" + abs.to_string(n.abstract));
    if (n.covered_by) o << ", style=dashed";
    if (n.location == p.error) o << ", color=red";
    o << "];\n";
  }
  for (const auto& n : art.nodes) {
    if (n.parent) {
      o << "  n" << *n.parent << " -> n" << n.id << " [label="
        << detail::dot_quote(p.cfa.edges[*n.edge].op.to_string()) << "];\n";
    }
    if (n.covered_by) o << "  n" << n.id << " -> n" << *n.covered_by << " [style=dotted, constraint=false];\n";
  }
  o << "}\n";
  return o.str();
}

}  // namespace lbemc
