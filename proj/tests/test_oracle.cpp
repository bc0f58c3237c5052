#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "fixtures.hpp"
#include "mecq/harness.hpp"
#include "mecq/oracle.hpp"
#include "mecq/task_model.hpp"

using namespace mecq;
using mecq::testing::unit_scenario;

namespace {

// Plain nested loops over every BS's catalog.
double brute_force(const NetworkScenario& s) {
  std::vector<ActionCatalog> cats;
  for (int n = 0; n < s.n_bs; ++n) cats.push_back(enumerate_actions(s, n));
  double best = std::numeric_limits<double>::infinity();
  GlobalAllocation g = GlobalAllocation::idle(s);
  std::function<void(int)> rec = [&](int n) {
    if (n == s.n_bs) {
      if (check_global(s, g).has_value()) return;
      best = std::min(best, evaluate(s, g).max_delay);
      return;
    }
    for (const auto& a : cats[n].actions()) {
      g.per_bs[n] = a;
      rec(n + 1);
    }
  };
  rec(0);
  return best;
}

RunConfig tiny(int n_bs, int users, int n_ul, int n_dl, int levels) {
  RunConfig cfg = RunConfig::desk();
  cfg.n_bs = n_bs;
  cfg.n_users = users;
  cfg.n_ul = n_ul;
  cfg.n_dl = n_dl;
  cfg.n_power_levels = levels;
  return cfg;
}

}  // namespace

TEST(Oracle, SingleUserPicksTheServingAction) {
  const NetworkScenario s = unit_scenario(1, 1, 0, 1, 1);
  const OracleResult r = solve_exhaustive(s);
  ASSERT_EQ(r.best_ids.size(), 1u);
  EXPECT_EQ(r.best_ids[0], 1u);
  EXPECT_TRUE(std::isfinite(r.best_max_delay));
  EXPECT_EQ(r.evaluated_count, 2u);
  EXPECT_TRUE(r.best_allocation.per_bs[0].dl_on(0, 0));
}

TEST(Oracle, MatchesNestedLoopsOneBs) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NetworkScenario s = generate_scenario(tiny(1, 2, 2, 2, 2), seed);
    const OracleResult r = solve_exhaustive(s);
    EXPECT_EQ(r.best_max_delay, brute_force(s)) << seed;
    EXPECT_EQ(r.evaluated_count, 169u);
    EXPECT_EQ(evaluate(s, r.best_allocation).max_delay, r.best_max_delay);
  }
}

TEST(Oracle, MatchesNestedLoopsTwoBs) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const NetworkScenario s = generate_scenario(tiny(2, 2, 1, 1, 1), seed);
    const OracleResult r = solve_exhaustive(s);
    EXPECT_EQ(r.best_max_delay, brute_force(s)) << seed;
    EXPECT_EQ(r.evaluated_count + r.skipped_count, 81u);
    EXPECT_FALSE(check_global(s, r.best_allocation).has_value());
  }
}

TEST(Oracle, SameAnswerForAnyThreadCount) {
  const NetworkScenario s = generate_scenario(tiny(2, 2, 2, 1, 1), 4);
  OracleOptions one;
  one.threads = 1;
  OracleOptions four;
  four.threads = 4;
  const OracleResult a = solve_exhaustive(s, one);
  const OracleResult b = solve_exhaustive(s, four);
  EXPECT_EQ(a.best_ids, b.best_ids);
  EXPECT_EQ(a.best_max_delay, b.best_max_delay);
  EXPECT_EQ(a.skipped_count, b.skipped_count);
}

TEST(Oracle, ExtraSubcarrierNeverHurts) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NetworkScenario big = generate_scenario(tiny(1, 2, 2, 2, 2), seed);
    NetworkScenario small = big;
    small.n_dl = 1;
    small.resize();
    for (int m = 0; m < big.n_users; ++m) {
      small.dl_gain_at(0, m, 0) = big.dl_gain_at(0, m, 0);
      for (int i = 0; i < big.n_ul; ++i) small.ul_gain_at(0, m, i) = big.ul_gain_at(0, m, i);
    }
    EXPECT_LE(solve_exhaustive(big).best_max_delay, solve_exhaustive(small).best_max_delay) << seed;
  }
}

TEST(Oracle, CapThrows) {
  const NetworkScenario s = generate_scenario(tiny(2, 2, 2, 2, 2), 1);
  OracleOptions o;
  o.cap = 1000;
  EXPECT_THROW(solve_exhaustive(s, o), std::length_error);
}
