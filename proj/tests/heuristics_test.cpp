#include <gtest/gtest.h>

#include <cmath>

#include "bnsl/heuristics.hpp"
#include "bnsl/search.hpp"
#include "test_support.hpp"

namespace bnsl {
namespace {

using testing::set;

// Golden values from tests/oracles/fixture_oracle.py (permutation enumeration, no shared code).
constexpr double kFixtureSimpleAtStart = 22.75488750216347;
constexpr double kFixturePairCost = 11.75488750216347;
constexpr double kFixtureGreedyAtStart = 29.25488750216347;
constexpr double kFixtureStaticAtStart = 29.25488750216347;

class FixtureHeuristics : public ::testing::Test {
 protected:
  ScoreTables tables = testing::tables_for(load_dataset(testing::data_path("fixture4.csv")));
  SimpleTable simple = make_simple_table(tables);
};

TEST_F(FixtureHeuristics, SimpleValues) {
  EXPECT_EQ(simple_h(tables.all(), simple), 0.0);
  for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(simple_h(tables.all().without(x), simple), tables[x][0].score);
  EXPECT_NEAR(simple_h(VariableSet{}, simple), kFixtureSimpleAtStart, 1e-12);
}

TEST_F(FixtureHeuristics, SingletonPatternCost) {
  for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(pattern_cost_exact(VariableSet::single(x), tables), simple.best[x]);
}

TEST_F(FixtureHeuristics, MutualParentPairBreaksTheCycle) {
  // X1 and X2 each pick the other; the pair cost is the cheaper way to drop one arc.
  const ParentStore store(tables);
  const double b1 = simple.best[0] + store.best_score(1, set({2, 3}));
  const double b2 = simple.best[1] + store.best_score(0, set({2, 3}));
  EXPECT_EQ(pattern_cost_exact(set({0, 1}), tables), std::min(b1, b2));
  EXPECT_NEAR(pattern_cost_exact(set({0, 1}), tables), kFixturePairCost, 1e-12);
}

TEST_F(FixtureHeuristics, PatternCostMatchesBackwardDistances) {
  const ExactDistances exact = exact_distances_to_goal(tables);
  for_each_subset(tables.all(), [&](VariableSet p) {
    if (p.empty()) return;
    EXPECT_NEAR(pattern_cost_exact(p, tables), exact(tables.all() - p), 1e-9) << to_string(p);
  });
}

TEST_F(FixtureHeuristics, DynamicDatabaseContents) {
  const DynamicPDB pdb = build_dynamic_pdb(tables, 2);
  ASSERT_EQ(pdb.size(), 2u);
  const PatternEntry* pair = pdb.find(set({0, 1}));
  ASSERT_NE(pair, nullptr);
  EXPECT_NEAR(pair->cost, kFixturePairCost, 1e-12);
  EXPECT_NEAR(pair->differential, kFixturePairCost - simple.best[0] - simple.best[1], 1e-12);
  EXPECT_GT(pair->differential, 0.0);
  EXPECT_NE(pdb.find(set({2, 3})), nullptr);
  // X1's best parents never include X3 and vice versa: no cycle, differential 0, pruned.
  EXPECT_EQ(pdb.find(set({0, 2})), nullptr);
  EXPECT_EQ(pdb.order().front(), set({0, 1}));
}

TEST_F(FixtureHeuristics, DynamicK3StoresTriples) {
  const DynamicPDB pdb = build_dynamic_pdb(tables, 3);
  ASSERT_EQ(pdb.size(), 4u);
  EXPECT_NE(pdb.find(set({0, 1, 2})), nullptr);
  EXPECT_NE(pdb.find(set({0, 1, 3})), nullptr);
  EXPECT_NEAR(pdb.find(set({0, 1, 3}))->cost, 20.5, 1e-12);
}

TEST_F(FixtureHeuristics, GreedyPartition) {
  const DynamicPDB pdb = build_dynamic_pdb(tables, 2);
  const HeuristicValue start = greedy_partition(tables.all(), pdb, simple);
  EXPECT_NEAR(start.value, kFixtureGreedyAtStart, 1e-12);
  ASSERT_EQ(start.patterns.size(), 2u);
  EXPECT_EQ(start.patterns[0], set({0, 1}));

  // No stored pattern inside R: singleton cover.
  const VariableSet r = set({0, 2});
  EXPECT_EQ(greedy_partition(r, pdb, simple).value, simple.sum_over(r));
  EXPECT_TRUE(greedy_partition(r, pdb, simple).patterns.empty());

  // R is exactly one stored pattern.
  EXPECT_NEAR(greedy_partition(set({0, 1}), pdb, simple).value, kFixturePairCost, 1e-12);
}

TEST_F(FixtureHeuristics, StaticTwoByTwo) {
  const StaticPDB pdb = build_static_pdb(tables, default_grouping(4));
  ASSERT_EQ(pdb.groups().size(), 2u);
  EXPECT_EQ(pdb.size(), 8u);
  for (std::size_t g = 0; g < 2; ++g) {
    const VariableSet members = pdb.groups()[g].members;
    EXPECT_EQ(pdb.cost(g, VariableSet{}), 0.0);
    for (std::size_t x : members) EXPECT_EQ(pdb.cost(g, VariableSet::single(x)), simple.best[x]);
    // Cross-check every entry against a pattern cost computed with out-of-group variables placed.
    for_each_subset(members, [&](VariableSet s) {
      if (s.empty()) return;
      EXPECT_NEAR(pdb.cost(g, s), pattern_cost_exact(s, tables), 1e-12) << to_string(s);
    });
  }
  EXPECT_NEAR(static_h(VariableSet{}, pdb), kFixtureStaticAtStart, 1e-12);
  EXPECT_EQ(static_h(tables.all(), pdb), 0.0);
}

TEST(Grouping, Defaults) {
  EXPECT_EQ(default_grouping(8), (Grouping{set({0, 1, 2, 3}), set({4, 5, 6, 7})}));
  const Grouping g29 = default_grouping(29);
  EXPECT_EQ(g29[0].size(), 15u);
  EXPECT_EQ(g29[1].size(), 14u);
  EXPECT_EQ(default_grouping(2), (Grouping{set({0}), set({1})}));
  EXPECT_THROW(default_grouping(1), PreconditionError);
}

TEST(Grouping, Parse) {
  EXPECT_EQ(parse_grouping("1-4,5-8", 8), default_grouping(8));
  EXPECT_EQ(parse_grouping("auto", 5), default_grouping(5));
  EXPECT_EQ(parse_grouping("1-3,4,5-6", 6), (Grouping{set({0, 1, 2}), set({3}), set({4, 5})}));
  EXPECT_THROW(parse_grouping("1-4,4-8", 8), ConfigError);
  EXPECT_THROW(parse_grouping("1-3,5-8", 8), ConfigError);
  EXPECT_THROW(parse_grouping("1-9", 8), ConfigError);
  EXPECT_THROW(parse_grouping("a-b", 8), ConfigError);
  EXPECT_THROW(parse_grouping("4-1", 4), ConfigError);
  EXPECT_EQ(format_grouping(parse_grouping("1-3,4,5-6", 6)), "1-3,4,5-6");
}

TEST(StaticPDB, EightVariableLookup) {
  const ScoreTables tables = testing::tables_for(testing::random_dataset(8, 150, 21));
  const StaticPDB pdb = build_static_pdb(tables, default_grouping(8));
  const VariableSet placed = set({0, 3, 7});
  EXPECT_EQ(static_h(placed, pdb), pdb.cost(0, set({1, 2})) + pdb.cost(1, set({4, 5, 6})));
}

TEST(StaticPDB, GroupSizeCap) {
  const ScoreTables tables = testing::tables_for(testing::random_dataset(8, 100, 2));
  EXPECT_THROW(build_static_pdb(tables, default_grouping(8), 3), ConfigError);
  EXPECT_THROW(build_static_pdb(tables, Grouping{set({0, 1, 2, 3})}), ConfigError);
}

TEST(DynamicPDB, RedundantSupersetNeverShadowsItsSubset) {
  // Here {V2,V3,V4} has the same differential as {V2,V4} up to rounding; the unpruned greedy
  // once took the superset first and lost the {V3,V5,V6} pattern.
  const ScoreTables tables = testing::tables_for(testing::random_dataset(7, 140, 31));
  const DynamicHeuristic pruned(tables, 3);
  const DynamicHeuristic full(tables, 3, false);
  const PatternEntry* sub = full.pdb().find(set({1, 3}));
  const PatternEntry* super = full.pdb().find(set({1, 2, 3}));
  ASSERT_NE(sub, nullptr);
  ASSERT_NE(super, nullptr);
  EXPECT_EQ(super->differential, sub->differential);
  EXPECT_EQ(pruned.pdb().find(set({1, 2, 3})), nullptr);
  EXPECT_EQ(pruned.value(set({0})), full.value(set({0})));
  EXPECT_EQ(full.evaluate(set({0})).patterns.front(), set({1, 3}));
}

TEST(DynamicPDB, RejectsBadK) {
  const ScoreTables tables = testing::tables_for(testing::random_dataset(4, 50, 2));
  EXPECT_THROW(build_dynamic_pdb(tables, 1), ConfigError);
  EXPECT_THROW(build_dynamic_pdb(tables, 5), ConfigError);
}

// Exhaustive heuristic properties over every order-graph node of random problems.
class HeuristicProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(HeuristicProperties, AdmissibleDominantConsistent) {
  const std::size_t n = 5 + GetParam() % 4;
  const ScoreTables tables = testing::tables_for(testing::random_dataset(n, 100 + 25 * GetParam(), 100 + GetParam()));
  const ExactDistances exact = exact_distances_to_goal(tables);
  const ParentStore store(tables);
  const SimpleHeuristic simple(tables);
  const StaticHeuristic stat(tables, default_grouping(n));
  const DynamicHeuristic dyn2(tables, 2);
  const DynamicHeuristic dyn3(tables, 3);
  const DynamicHeuristic dyn3_full(tables, 3, false);
  const double tol = 1e-9;

  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    const VariableSet u{bits};
    const double d = exact(u);
    const double s = simple.value(u);
    for (double h : {s, stat.value(u), dyn2.value(u), dyn3.value(u)}) {
      EXPECT_LE(h, d + tol) << to_string(u);
      EXPECT_GE(h, s - tol) << to_string(u);
    }
    EXPECT_NEAR(dyn3.value(u), dyn3_full.value(u), tol) << to_string(u);
    for (std::size_t x : tables.all() - u) {
      const double arc = store.best_score(x, u);
      EXPECT_LE(s, arc + simple.value(u.with(x)) + tol);
      EXPECT_LE(stat.value(u), arc + stat.value(u.with(x)) + tol);
      EXPECT_NEAR(stat.child_value(u, stat.value(u), x), stat.value(u.with(x)), tol);
    }
  }
  for (const auto* pdb : {&dyn2.pdb(), &dyn3.pdb()}) {
    for (const auto& [p, e] : pdb->patterns()) {
      EXPECT_NEAR(e.cost, exact(tables.all() - p), tol) << to_string(p);
      EXPECT_GT(e.differential, 0.0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, HeuristicProperties, ::testing::Range<std::uint64_t>(1, 7));

}  // namespace
}  // namespace bnsl
