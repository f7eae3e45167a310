#include <gtest/gtest.h>

#include "support/generators.hpp"

namespace lbemc {
namespace {

constexpr std::string_view kLoopProgram = R"(
int i;
int x;
int z;
while (i > 0) {
  if (x == 1) {
    z = 0;
  } else {
    z = 1;
  }
  i = i - 1;
}
)";

std::multiset<std::string> labels(const Program& p) {
  std::multiset<std::string> out;
  for (const auto& e : p.cfa.edges) out.insert(e.op.to_string());
  return out;
}

TEST(Parse, Examples) {
  const SourceProgram p = parse("int x; x = 0; assume(x > 0); error();");
  EXPECT_EQ(p.declarations, std::vector<std::string>{"x"});
  ASSERT_EQ(p.body.size(), 3u);
  EXPECT_EQ(p.body[0].kind, Stmt::Kind::Assign);
  EXPECT_EQ(p.body[1].kind, Stmt::Kind::Assume);
  EXPECT_EQ(p.body[2].kind, Stmt::Kind::Error);

  const SourceProgram h = parse("int x; x = nondet();");
  ASSERT_EQ(h.body.size(), 1u);
  EXPECT_EQ(h.body[0].kind, Stmt::Kind::Havoc);
  EXPECT_EQ(h.body[0].var, "x");
}

TEST(Parse, Errors) {
  try {
    parse("x = 0;");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 1);
    EXPECT_NE(std::string(e.what()).find("undeclared variable 'x'"), std::string::npos);
  }
  EXPECT_THROW(parse("int x; int x;"), ParseError);
  EXPECT_THROW(parse("int x; int y; x = x * y;"), ParseError);
  EXPECT_THROW(parse("int x; x = 1"), ParseError);
  EXPECT_THROW(parse("int x; x = $;"), ParseError);
  EXPECT_THROW(parse("int x; if (x) { }"), ParseError);
  EXPECT_THROW(parse("int x; x = nondet() + 1;"), ParseError);
  EXPECT_THROW(parse("int while;"), ParseError);
}

TEST(Parse, ErrorPositionOnLaterLine) {
  try {
    parse("int x;\nx = 1;\n  y = 2;\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 3);
  }
}

TEST(Parse, ExpressionsAndConditions) {
  const Program p = parse_program(
      "int x; int y;\n"
      "x = 2 * y - (3 - x) + -y; // comment\n"
      "assume(!(x < y) && (y >= 0 || x == 2 * y));\n");
  ASSERT_EQ(p.cfa.edges.size(), 2u);
  const Operation& assign = p.cfa.edges[0].op;
  EXPECT_EQ(assign.rhs().coefficient(VarRef::current("x")), 1);
  EXPECT_EQ(assign.rhs().coefficient(VarRef::current("y")), 1);
  EXPECT_EQ(assign.rhs().constant(), -3);
  InternalSolver solver;
  const Formula cond = p.cfa.edges[1].op.condition();
  EXPECT_TRUE(solver.entails(cond, testing::parse("(>= x y)")));
  EXPECT_TRUE(solver.entails(testing::parse("(and (= x 3) (= y 1))"), cond));
  EXPECT_FALSE(solver.check_sat(cond && testing::parse("(and (= x 3) (= y 4))")).sat);
}

TEST(ToCfa, LoopWithDiamond) {
  const Program p = parse_program(kLoopProgram);
  EXPECT_EQ(p.cfa.locations.size(), 8u);  // seven program locations plus the unused error location
  EXPECT_EQ(labels(p), (std::multiset<std::string>{"[true]", "[i>0]", "[!(i>0)]", "[x==1]", "[!(x==1)]", "z=0", "z=1",
                                                   "i=i-1"}));
  EXPECT_TRUE(p.cfa.incoming(p.error).empty());
  EXPECT_NO_THROW(p.validate());
}

TEST(ToCfa, ErrorOnly) {
  const Program p = parse_program("int x; error();");
  EXPECT_EQ(p.cfa.locations, (std::set<LocationId>{p.entry, p.error}));
  ASSERT_EQ(p.cfa.edges.size(), 1u);
  EXPECT_EQ(p.cfa.edges[0].source, p.entry);
  EXPECT_EQ(p.cfa.edges[0].target, p.error);
  EXPECT_EQ(explicit_reachable(p, DomainBound{}), Reachability::Reachable);
}

TEST(ToCfa, ErrorLocationExistsEvenIfUnused) {
  const Program p = parse_program("int x; x = 1;");
  EXPECT_TRUE(p.cfa.contains(p.error));
  EXPECT_EQ(p.cfa.edges.size(), 1u);
}

TEST(ToCfa, AssertDesugarsToGuardedError) {
  const Program p = parse_program("int x; assert(x == 1);");
  EXPECT_EQ(labels(p), (std::multiset<std::string>{"[!(x==1)]", "[true]", "[x==1]"}));
  EXPECT_EQ(p.cfa.incoming(p.error).size(), 1u);
}

TEST(ToCfa, StarConditionsAreTrueAssumes) {
  const Program p = parse_program("int x; if (*) { x = 1; } else { x = 2; }");
  EXPECT_EQ(labels(p), (std::multiset<std::string>{"[true]", "[true]", "x=1", "x=2"}));
}

// Targets of DFS back edges, i.e. loop heads.
std::set<LocationId> loop_heads(const Program& p) {
  std::map<LocationId, int> state;  // 1 on stack, 2 done
  std::set<LocationId> heads;
  std::function<void(LocationId)> dfs = [&](LocationId l) {
    state[l] = 1;
    for (auto i : p.cfa.outgoing(l)) {
      const LocationId t = p.cfa.edges[i].target;
      if (state[t] == 1) {
        heads.insert(t);
      } else if (state[t] == 0) {
        dfs(t);
      }
    }
    state[l] = 2;
  };
  dfs(p.entry);
  return heads;
}

TEST(ToCfa, TestLocks2Shape) {
  // 2 havocs, loop entry and exit guards, per lock: reset, lock phase (two
  // guards and the assignment), unlock phase (two guards, three assert
  // edges, release).
  const Program p = parse_program(gen_test_locks(2));
  EXPECT_EQ(p.cfa.edges.size(), 2u + 2u + 2u * (1 + 3 + 6));
  EXPECT_EQ(loop_heads(p).size(), 1u);
  EXPECT_EQ(p.cfa.incoming(p.error).size(), 2u);
}

TEST(ToCfa, StructuralProperties) {
  testing::ProgramGenerator gen(61);
  for (int i = 0; i < 200; ++i) {
    const std::string src = gen.next();
    const Program p = parse_program(src);
    ASSERT_NO_THROW(p.validate()) << src;
    EXPECT_TRUE(p.cfa.incoming(p.entry).empty());
    for (const auto l : p.cfa.locations) {
      if (l == p.error || l == LocationId{2}) continue;
      EXPECT_FALSE(p.cfa.outgoing(l).empty()) << src << " at " << l.to_string();
    }
    for (const auto& e : p.cfa.edges) EXPECT_TRUE(e.op.is_leaf()) << src;
  }
}

TEST(ToCfa, OneEdgePerAtomicStatementAndTwoPerCondition) {
  const Program p = parse_program(
      "int x; int y;\n"
      "x = 1; y = nondet(); assume(x > 0);\n"
      "if (x > y) { x = 0; } else { skip; }\n"
      "while (x < 3) { x = x + 1; }\n");
  // 3 atomic + (2 guards + 2 statements) + (2 guards + 1 statement)
  EXPECT_EQ(p.cfa.edges.size(), 10u);
}

}  // namespace
}  // namespace lbemc
