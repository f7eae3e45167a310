#include <gtest/gtest.h>

#include "support/generators.hpp"

namespace lbemc {
namespace {

using testing::parse;

std::vector<Atom> atoms_of(std::initializer_list<std::string_view> sexprs) {
  std::vector<Atom> out;
  for (auto s : sexprs) out.push_back(parse(s).as_atom());
  return out;
}

bool model_satisfies(const Formula& f, const SatResult& r) {
  return evaluate(
      f,
      [&](const VarRef& v) {
        auto it = r.model.find(v);
        return it == r.model.end() ? Rational(0) : it->second;
      },
      [&](std::uint32_t id) {
        auto it = r.propositions.find(id);
        return it != r.propositions.end() && it->second;
      });
}

// --- theory ------------------------------------------------------------------

TEST(TheoryCheck, Contradiction) {
  const TheoryResult r = theory_check(atoms_of({"(<= x 0)", "(<= (- 0 x) -1)"}));
  EXPECT_FALSE(r.sat);
  EXPECT_EQ(r.core, (std::vector<std::size_t>{0, 1}));
}

TEST(TheoryCheck, BackSubstitutedWitness) {
  const TheoryResult r = theory_check(atoms_of({"(= x (+ y 1))", "(>= y 0)"}));
  ASSERT_TRUE(r.sat);
  EXPECT_EQ(r.model.at(VarRef::current("y")), Rational(0));
  EXPECT_EQ(r.model.at(VarRef::current("x")), Rational(1));
}

TEST(TheoryCheck, EmptyConjunction) { EXPECT_TRUE(theory_check(std::vector<Atom>{}).sat); }

TEST(TheoryCheck, RationalRelaxation) {
  // 2x = 2y + 1 has no integer solution but the equality atom itself folds
  // to false only when constant; with two variables FM finds x - y = 1/2.
  const TheoryResult r = theory_check(atoms_of({"(= (* 2 x) (+ (* 2 y) 1))"}));
  EXPECT_TRUE(r.sat);
}

TEST(TheoryCheck, DisequalitySplitsOverIntegers) {
  // 0 <= x <= 1, x != 0, x != 1 is unsatisfiable once x != c reads as x <= c-1 or x >= c+1.
  std::vector<Literal> lits{{parse("(>= x 0)").as_atom(), true},
                            {parse("(<= x 1)").as_atom(), true},
                            {parse("(= x 0)").as_atom(), false},
                            {parse("(= x 1)").as_atom(), false}};
  EXPECT_FALSE(theory_check(std::span<const Literal>(lits)).sat);
  lits.pop_back();
  const TheoryResult r = theory_check(std::span<const Literal>(lits));
  ASSERT_TRUE(r.sat);
  EXPECT_EQ(r.model.at(VarRef::current("x")), Rational(1));
}

TEST(TheoryCheck, CoreIsItselfUnsatAndIgnoresIrrelevantSplits) {
  std::vector<Literal> lits;
  for (int i = 0; i < 12; ++i) {
    lits.push_back({Formula::atom(Relation::Eq, testing::var("p" + std::to_string(i))).as_atom(), false});
  }
  lits.push_back({parse("(<= x 0)").as_atom(), true});
  lits.push_back({parse("(>= x 1)").as_atom(), true});
  const TheoryResult r = theory_check(std::span<const Literal>(lits));
  ASSERT_FALSE(r.sat);
  EXPECT_EQ(r.core, (std::vector<std::size_t>{12, 13}));
}

TEST(TheoryCheck, RandomModelsAndCoresAreSound) {
  testing::FormulaGenerator gen(31, {"x", "y", "z"});
  for (int i = 0; i < 300; ++i) {
    std::vector<Literal> lits;
    const auto n = gen.rng().between(1, 6);
    for (std::int64_t k = 0; k < n; ++k) {
      const Formula a = gen.atom();
      const Formula f = a.kind() == Formula::Kind::Not ? a.operand() : a;
      if (f.kind() != Formula::Kind::Atom) continue;
      lits.push_back({f.as_atom(), a.kind() != Formula::Kind::Not});
    }
    const TheoryResult r = theory_check(std::span<const Literal>(lits));
    if (r.sat) {
      for (const auto& l : lits) {
        const Rational v = l.atom.term.evaluate([&](const VarRef& x) {
          auto it = r.model.find(x);
          return it == r.model.end() ? Rational(0) : it->second;
        });
        ASSERT_EQ(l.atom.holds(v), l.positive);
      }
    } else {
      std::vector<Literal> core;
      for (auto idx : r.core) core.push_back(lits.at(idx));
      ASSERT_FALSE(theory_check(std::span<const Literal>(core)).sat);
    }
  }
}

TEST(Project, EliminatesIndexedVariables) {
  const auto out = project(atoms_of({"(= x@0 0)", "(= x (+ x@0 1))"}), [](const VarRef& v) { return v.is_current(); });
  ASSERT_TRUE(out);
  ASSERT_EQ(out->size(), 1u);
  EXPECT_EQ(to_sexpr(Formula::atom(out->front())), "(= (+ x -1) 0)");
}

// --- SAT ---------------------------------------------------------------------

TEST(Sat, PigeonholeThreeIntoTwoIsUnsat) {
  sat::Solver s;
  std::uint32_t v[3][2];
  for (auto& p : v) {
    for (auto& h : p) h = s.new_var();
  }
  for (auto& p : v) s.add_clause({sat::pos(p[0]), sat::pos(p[1])});
  for (int h = 0; h < 2; ++h) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) s.add_clause({sat::neg(v[a][h]), sat::neg(v[b][h])});
    }
  }
  EXPECT_FALSE(s.solve());
}

TEST(Sat, ModelSatisfiesClauses) {
  testing::Rng rng(5);
  for (int round = 0; round < 100; ++round) {
    sat::Solver s;
    const int n = 8;
    for (int i = 0; i < n; ++i) s.new_var();
    std::vector<std::vector<sat::Lit>> clauses;
    for (int c = 0; c < 30; ++c) {
      std::vector<sat::Lit> cl;
      for (int k = 0; k < 3; ++k) {
        const auto var = static_cast<std::uint32_t>(rng.between(0, n - 1));
        cl.push_back(rng.chance(50) ? sat::pos(var) : sat::neg(var));
      }
      clauses.push_back(cl);
      s.add_clause(cl);
    }
    // brute force
    bool any = false;
    for (int m = 0; m < (1 << n) && !any; ++m) {
      any = std::ranges::all_of(clauses, [&](const auto& cl) {
        return std::ranges::any_of(cl, [&](sat::Lit l) { return (((m >> sat::var_of(l)) & 1) != 0) != sat::is_negative(l); });
      });
    }
    const bool result = s.solve();
    ASSERT_EQ(result, any);
    if (result) {
      for (const auto& cl : clauses) {
        ASSERT_TRUE(std::ranges::any_of(cl, [&](sat::Lit l) { return s.value_lit(l) == sat::Value::True; }));
      }
    }
  }
}

// --- SMT ---------------------------------------------------------------------

class SmtTest : public ::testing::Test {
 protected:
  InternalSolver solver;
};

TEST_F(SmtTest, CheckSatExamples) {
  EXPECT_FALSE(solver.check_sat(parse("(and (> x 0) (< x 0))")).sat);
  const Formula f = parse("(and (or (= x 2) (= x 7)) (< x 5))");
  const SatResult r = solver.check_sat(f);
  ASSERT_TRUE(r.sat);
  EXPECT_EQ(r.model.at(VarRef::current("x")), Rational(2));
  const SatResult t = solver.check_sat(Formula::truth());
  EXPECT_TRUE(t.sat);
  EXPECT_TRUE(t.model.empty());
}

TEST_F(SmtTest, EntailsExamples) {
  EXPECT_TRUE(solver.entails(parse("(= x 1)"), parse("(> x 0)")));
  EXPECT_FALSE(solver.entails(parse("(> x 0)"), parse("(= x 1)")));
  EXPECT_TRUE(solver.entails(Formula::falsity(), parse("(= y 3)")));
}

TEST_F(SmtTest, AllSatExamples) {
  const Formula v1 = Formula::prop(1), v2 = Formula::prop(2);
  const auto both = solver.all_sat(v1 || v2, {1, 2});
  const std::set<Assignment> expected{{{1, true}, {2, true}}, {{1, true}, {2, false}}, {{1, false}, {2, true}}};
  EXPECT_EQ(std::set<Assignment>(both.begin(), both.end()), expected);
  EXPECT_EQ(both.size(), 3u);

  EXPECT_TRUE(solver.all_sat(v1 && !v1, {1}).empty());

  const Formula f = Formula::iff(v1, parse("(> x 0)")) && Formula::iff(v2, parse("(< x 5)")) && parse("(= x 2)");
  const auto only = solver.all_sat(f, {1, 2});
  EXPECT_EQ(only, (std::vector<Assignment>{{{1, true}, {2, true}}}));
}

TEST_F(SmtTest, AllSatMatchesTruthTable) {
  testing::FormulaGenerator gen(41, {"x", "y"});
  for (int i = 0; i < 60; ++i) {
    const auto k = static_cast<std::uint32_t>(gen.rng().between(1, 4));
    std::vector<std::uint32_t> ids;
    std::vector<Formula> parts{gen.formula(2)};
    for (std::uint32_t j = 0; j < k; ++j) {
      ids.push_back(j);
      parts.push_back(Formula::iff(Formula::prop(j), gen.atom()));
    }
    const Formula phi = Formula::conjunction(parts);
    std::set<Assignment> expected;
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      Assignment a;
      std::vector<Formula> cube{phi};
      for (auto id : ids) {
        const bool on = ((m >> id) & 1u) != 0;
        a.emplace(id, on);
        cube.push_back(on ? Formula::prop(id) : !Formula::prop(id));
      }
      if (solver.check_sat(Formula::conjunction(cube)).sat) expected.insert(a);
    }
    const auto got = solver.all_sat(phi, ids);
    ASSERT_EQ(got.size(), expected.size());
    EXPECT_EQ(std::set<Assignment>(got.begin(), got.end()), expected);
  }
}

TEST_F(SmtTest, ModelsSatisfyFormulas) {
  testing::FormulaGenerator gen(42, {"x", "y", "z"});
  for (int i = 0; i < 300; ++i) {
    const Formula f = gen.formula(3);
    const SatResult r = solver.check_sat(f);
    if (r.sat) {
      ASSERT_TRUE(model_satisfies(split_disequalities(f), r)) << to_sexpr(f);
    }
  }
}

TEST_F(SmtTest, UnsatMeansNoIntegerPointInRange) {
  testing::FormulaGenerator gen(43, {"x", "y"});
  int unsat = 0;
  for (int i = 0; i < 300; ++i) {
    const Formula f = gen.formula(3);
    if (solver.check_sat(f).sat) continue;
    ++unsat;
    for (std::int64_t x = -6; x <= 6; ++x) {
      for (std::int64_t y = -6; y <= 6; ++y) {
        const bool holds = evaluate(
            f, [&](const VarRef& v) { return Rational(v.name == "x" ? x : y); }, [](std::uint32_t) { return false; });
        ASSERT_FALSE(holds) << to_sexpr(f) << " at x=" << x << " y=" << y;
      }
    }
  }
  EXPECT_GT(unsat, 10);
}

TEST_F(SmtTest, QueriesAreCounted) {
  solver.reset_queries();
  solver.check_sat(parse("(> x 0)"));
  solver.entails(parse("(> x 0)"), parse("(> x -1)"));
  EXPECT_EQ(solver.queries(), 2u);
  solver.all_sat(Formula::prop(0) || Formula::prop(1), {0, 1});
  EXPECT_EQ(solver.queries(), 2u + 3u);  // one per model; blocking the third empties the search
}

TEST(SplitDisequalities, NoNegatedAtomsRemain) {
  const Formula f = split_disequalities(parse("(not (and (= x 1) (<= y 0)))"));
  EXPECT_EQ(to_sexpr(f), "(or (<= x 0) (<= (+ (* -1 x) 2) 0) (<= (+ (* -1 y) 1) 0))");
}

TEST(Smtlib, Printing) {
  EXPECT_EQ(smtlib::symbol(VarRef::indexed("x", 3)), "|x@3|");
  EXPECT_EQ(smtlib::formula(parse("(<= (+ (* -2 x) y@1) -3)")), "(<= (+ (* (- 2.0) |x|) |y@1| 3.0) 0.0)");
  smtlib::Sexpr frac{"", {{"/", {}, false}, {"1.0", {}, false}, {"4.0", {}, false}}, true};
  EXPECT_EQ(smtlib::parse_number(frac), Rational(1, 4));
}

TEST(External, AgreesWithInternalWhenAvailable) {
  const std::string cmd = find_external_solver();
  if (cmd.empty()) GTEST_SKIP() << "no external SMT solver";
  ExternalSolver ext(cmd);
  InternalSolver in;
  testing::FormulaGenerator gen(44, {"x", "y", "z"});
  for (int i = 0; i < 100; ++i) {
    const Formula f = gen.formula(3);
    const SatResult a = in.check_sat(f), b = ext.check_sat(f);
    ASSERT_EQ(a.sat, b.sat) << to_sexpr(f);
    if (b.sat) {
      ASSERT_TRUE(model_satisfies(split_disequalities(f), b)) << to_sexpr(f);
    }
  }
  const auto all = ext.all_sat(Formula::prop(1) || Formula::prop(2), {1, 2});
  EXPECT_EQ(all.size(), 3u);
}

TEST(External, BrokenCommandRaises) {
  EXPECT_THROW(
      {
        ExternalSolver ext("exit 0");
        ext.check_sat(parse("(> x 0)"));
      },
      SolverError);
}

}  // namespace
}  // namespace lbemc
