#pragma once

#include "lbemc/abstraction.hpp"
#include "lbemc/benchmarks.hpp"
#include "lbemc/dot.hpp"
#include "lbemc/engine.hpp"
#include "lbemc/formula_io.hpp"
#include "lbemc/frontend.hpp"
#include "lbemc/oracle.hpp"
#include "lbemc/smtlib.hpp"
#include "lbemc/summarize.hpp"
