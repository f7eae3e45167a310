#pragma once

#include <cstddef>
#include <string>

#include "lbemc/formula.hpp"

namespace lbemc {

// Lock-discipline benchmark with n locks. Each iteration of a
// nondeterministic loop releases all locks, acquires lock i when p_i is
// set, then checks and releases it under the same guard. The flags p_i are
// chosen once before the loop, so every path through the body re-tests
// them consistently. With `bug`, the release guard of the last lock is
// inverted and the check can fail.
inline std::string gen_test_locks(std::size_t n, bool bug = false) {
  if (n < 1) throw Error("lbemc: test_locks needs at least one lock");
  std::string s = "// test_locks_" + std::to_string(n) + (bug ? " (bug)" : "") + "\n";
  for (std::size_t i = 1; i <= n; ++i) s += "int p" + std::to_string(i) + ";\n";
  for (std::size_t i = 1; i <= n; ++i) s += "int lk" + std::to_string(i) + ";\n";
  s += "\n";
  for (std::size_t i = 1; i <= n; ++i) s += "p" + std::to_string(i) + " = nondet();\n";
  s += "while (*) {\n";
  for (std::size_t i = 1; i <= n; ++i) s += "  lk" + std::to_string(i) + " = 0;\n";
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string k = std::to_string(i);
    s += "  if (p" + k + " != 0) {\n    lk" + k + " = 1;\n  }\n";
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string k = std::to_string(i);
    const bool flipped = bug && i == n;
    s += "  if (p" + k + (flipped ? " == 0" : " != 0") + ") {\n    assert(lk" + k + " == 1);\n    lk" + k +
         " = 0;\n  }\n";
  }
  s += "}\n";
  return s;
}

}  // namespace lbemc
