#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>
#include <tuple>

#include "fixtures.hpp"
#include "mecq/action_space.hpp"
#include "mecq/rng.hpp"

using namespace mecq;
using mecq::testing::unit_scenario;

namespace {

// (owner, level) per subcarrier on both links; level 0 means idle.
using Key = std::tuple<std::vector<int>, std::vector<int>, std::vector<int>, std::vector<int>>;

// Every per-subcarrier choice of (owner, level), kept when each link's level
// sum fits the budget.
void link_choices(int slots, int users, int levels, std::vector<std::pair<std::vector<int>, std::vector<int>>>& out) {
  std::vector<int> owner(slots), level(slots);
  std::function<void(int, int)> rec = [&](int pos, int used) {
    if (pos == slots) {
      out.emplace_back(owner, level);
      return;
    }
    owner[pos] = -1;
    level[pos] = 0;
    rec(pos + 1, used);
    for (int m = 0; m < users; ++m)
      for (int l = 1; used + l <= levels; ++l) {
        owner[pos] = m;
        level[pos] = l;
        rec(pos + 1, used + l);
      }
  };
  rec(0, 0);
}

std::set<Key> brute_force(int users, int n_ul, int n_dl, int levels) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> dl, ul;
  link_choices(n_dl, users, levels, dl);
  link_choices(n_ul, users, levels, ul);
  std::set<Key> out;
  for (const auto& d : dl)
    for (const auto& u : ul) out.insert({d.first, d.second, u.first, u.second});
  return out;
}

Key key_of(const Allocation& a, int levels, double p_ul, double p_dl) {
  Key k;
  auto& [down, dlev, up, ulev] = k;
  for (int j = 0; j < a.n_dl; ++j) {
    int o = -1, l = 0;
    for (int m = 0; m < a.users; ++m)
      if (a.dl_on(m, j)) {
        o = m;
        l = static_cast<int>(std::lround(a.dl_power(m, j) * levels / p_dl));
      }
    down.push_back(o);
    dlev.push_back(l);
  }
  for (int i = 0; i < a.n_ul; ++i) {
    int o = -1, l = 0;
    for (int m = 0; m < a.users; ++m)
      if (a.ul_on(m, i)) {
        o = m;
        l = static_cast<int>(std::lround(a.ul_power(m, i) * levels / p_ul));
      }
    up.push_back(o);
    ulev.push_back(l);
  }
  return k;
}

}  // namespace

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(5, 2), Count{10});
  EXPECT_EQ(binomial(2, 3), Count{0});
  EXPECT_EQ(binomial(0, 0), Count{1});
  EXPECT_EQ(to_string(binomial(60, 30)), "118264581564861424");
}

TEST(LevelVectors, CountRankUnrank) {
  for (int levels = 1; levels <= 5; ++levels)
    for (int k = 0; k <= levels + 1; ++k) {
      const std::uint64_t n = level_vector_count(k, levels);
      EXPECT_EQ(Count{n}, binomial(levels, k));
      for (std::uint64_t r = 0; r < n; ++r) {
        const auto lv = level_vector_unrank(r, k, levels);
        ASSERT_EQ(static_cast<int>(lv.size()), k);
        int sum = 0;
        for (int l : lv) {
          EXPECT_GE(l, 1);
          sum += l;
        }
        EXPECT_LE(sum, levels);
        EXPECT_EQ(level_vector_rank(lv, levels), r);
      }
    }
}

TEST(Catalog, SingleDownlinkSubcarrier) {
  NetworkScenario s = unit_scenario(1, 1, 0, 1, 1);
  s.p_max_dl_w = 2.5;
  const ActionCatalog cat = enumerate_actions(s, 0);
  ASSERT_EQ(cat.size(), 2u);
  EXPECT_FALSE(cat.at(0).serves(0));
  EXPECT_TRUE(cat.at(1).dl_on(0, 0));
  EXPECT_DOUBLE_EQ(cat.at(1).dl_power(0, 0), 2.5);
}

TEST(Catalog, NoSubcarriersMeansOneAction) {
  const ActionCatalog cat = enumerate_actions(unit_scenario(1, 3, 0, 0, 4), 0);
  EXPECT_EQ(cat.size(), 1u);
}

TEST(Catalog, MatchesRecursiveGenerator) {
  for (int users = 1; users <= 2; ++users)
    for (int n_ul = 0; n_ul <= 2; ++n_ul)
      for (int n_dl = 0; n_dl <= 2; ++n_dl)
        for (int levels = 1; levels <= 3; ++levels) {
          NetworkScenario s = unit_scenario(1, users, n_ul, n_dl, levels);
          s.p_max_ul_w = 0.5;
          const ActionCatalog cat = enumerate_actions(s, 0);
          const std::set<Key> expected = brute_force(users, n_ul, n_dl, levels);
          std::set<Key> got;
          for (const auto& a : cat.actions()) got.insert(key_of(a, levels, s.p_max_ul_w, s.p_max_dl_w));
          EXPECT_EQ(got.size(), cat.size()) << "duplicate actions";
          EXPECT_EQ(got, expected) << users << ' ' << n_ul << ' ' << n_dl << ' ' << levels;
          EXPECT_EQ(Count{cat.size()}, theorem3_total(ActionDims::of(s)));
        }
}

TEST(Catalog, EveryActionIsFeasibleAndRoundTrips) {
  NetworkScenario s = unit_scenario(1, 3, 2, 3, 2);
  const ActionCatalog cat = enumerate_actions(s, 0);
  const ActionSpace& sp = cat.space();
  for (ActionId id = 0; id < cat.size(); ++id) {
    const Allocation& a = cat.at(id);
    ASSERT_FALSE(check_allocation(s, a).has_value()) << id;
    ASSERT_EQ(sp.encode(a), id);
    const auto [dl, ul] = sp.decode_links(id);
    ASSERT_EQ(sp.encode_links(dl, ul), id);
  }
}

TEST(Catalog, DeskDimensions) {
  NetworkScenario s = unit_scenario(2, 4, 3, 3, 2);
  EXPECT_EQ(ActionSpace::for_scenario(s).size(), 73u * 73u);
  NetworkScenario tiny = unit_scenario(1, 2, 2, 2, 2);
  EXPECT_EQ(ActionSpace::for_scenario(tiny).size(), 169u);
}

TEST(Catalog, CapPointsToSampledMode) {
  NetworkScenario s = unit_scenario(1, 4, 3, 3, 2);
  try {
    enumerate_actions(s, 0, 100);
    FAIL() << "expected length_error";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("sampled"), std::string::npos);
  }
}

TEST(ActionSpace, RejectsNonCanonical) {
  NetworkScenario s = unit_scenario(1, 2, 1, 2, 2);
  const ActionSpace sp = ActionSpace::for_scenario(s);
  Allocation a(2, 1, 2);
  a.assign_dl(0, 0, 0.3);
  EXPECT_THROW(sp.encode(a), std::invalid_argument);
  LinkAction dl{{0, 1}, {2, 1}};
  LinkAction ul{{-1}, {}};
  EXPECT_THROW(sp.encode_links(dl, ul), std::invalid_argument);
}

TEST(ActionSpace, PartialKeysFixTheirHalf) {
  NetworkScenario s = unit_scenario(1, 3, 2, 3, 2);
  const ActionSpace sp = ActionSpace::for_scenario(s);
  Rng rng(4);
  for (std::uint64_t key = 0; key < sp.subcarrier_key_count(); key += 7) {
    const auto [dl0, ul0] = sp.decode_links(sp.complete_subcarrier_key(key, rng));
    for (int t = 0; t < 5; ++t) {
      const auto [dl, ul] = sp.decode_links(sp.complete_subcarrier_key(key, rng));
      EXPECT_EQ(dl.owner, dl0.owner);
      EXPECT_EQ(ul.owner, ul0.owner);
    }
  }
  for (std::uint64_t key = 0; key < sp.power_key_count(); key += 5) {
    const auto [dl0, ul0] = sp.decode_links(sp.complete_power_key(key, rng));
    for (int t = 0; t < 5; ++t) {
      const auto [dl, ul] = sp.decode_links(sp.complete_power_key(key, rng));
      EXPECT_EQ(dl.level, dl0.level);
      EXPECT_EQ(ul.level, ul0.level);
      for (std::size_t j = 0; j < dl.owner.size(); ++j) EXPECT_EQ(dl.owner[j] < 0, dl0.owner[j] < 0);
      for (std::size_t i = 0; i < ul.owner.size(); ++i) EXPECT_EQ(ul.owner[i] < 0, ul0.owner[i] < 0);
    }
  }
}

TEST(CountFormula, TwoUsersOneSubcarrierEach) {
  const std::vector<int> counts{1, 1};
  EXPECT_EQ(theorem3_link_count(2, 1, counts, PowerCounting::PerSubcarrier), Count{2});
  EXPECT_EQ(theorem3_link_count(2, 1, counts, PowerCounting::Budgeted), Count{0});
  EXPECT_EQ(theorem3_link_count(2, 2, counts, PowerCounting::Budgeted), Count{2});
}

TEST(CountFormula, SingleLevelPowerFactorIsOne) {
  const std::vector<int> counts{2, 1};
  EXPECT_EQ(theorem3_link_count(3, 1, counts, PowerCounting::PerSubcarrier), binomial(3, 2) * binomial(1, 1));
}

TEST(CountFormula, MuFactor) {
  ActionDims d{2, 1, 1, 1};
  Theorem3Options o;
  o.include_mu_factor = true;
  o.collaborative_users = 2;
  EXPECT_EQ(theorem3_total(d, o), theorem3_total(d) * Count{4});
}

TEST(WorstCase, Examples) {
  const std::vector<double> ten{10.0};
  EXPECT_DOUBLE_EQ(worst_case_probability(ten, 0.0), 1.0);
  const std::vector<double> one{1.0};
  EXPECT_DOUBLE_EQ(worst_case_probability(one, 0.5), 1.0);
  double hand = 1.0;
  for (int i = 0; i < 9; ++i) hand *= 0.99;
  EXPECT_NEAR(worst_case_probability(ten, 0.1), hand, 1e-15);
  const std::vector<double> two{10.0, 10.0};
  EXPECT_NEAR(worst_case_probability(two, 0.1), hand * hand, 1e-15);
}
