#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "depheavy/adjusted.hpp"
#include "depheavy/error.hpp"

using namespace depheavy;

TEST(AdjustedMhp, Formula) {
  EXPECT_DOUBLE_EQ(adjusted_mhp(10, 5, 70), 5.0);
  EXPECT_DOUBLE_EQ(adjusted_mhp(0, 12, 70), 0.0);
  EXPECT_DOUBLE_EQ(adjusted_mhp(2, 2, 2), 32.0);
  EXPECT_THROW(adjusted_mhp(1, 1, 0), DomainError);
}

TEST(AdjustedPenalized, Formula) {
  EXPECT_DOUBLE_EQ(adjusted_penalized(2, 2, 10), 1.0 / 3.0);
  EXPECT_EQ(adjusted_penalized(5, 0, 10), 0.0);
  EXPECT_THROW(adjusted_penalized(1, 1, 0), DomainError);
  const double a1 = adjusted_penalized(8, 3, 1), a10 = adjusted_penalized(8, 3, 10),
               a100 = adjusted_penalized(8, 3, 100);
  EXPECT_GT(a1, a10);
  EXPECT_GT(a10, a100);
  EXPECT_LT(a100, 0.3);
}

TEST(AdjustedPenalized, BelowRawAndIncreasingInK) {
  for (int a = 1; a <= 30; ++a)
    for (std::int64_t k = 1; k < 200; ++k) {
      EXPECT_LE(adjusted_penalized(7.5, k, a), 7.5);
      EXPECT_LT(adjusted_penalized(7.5, k, a), adjusted_penalized(7.5, k + 1, a));
    }
}

TEST(Stability, IdenticalCountsGiveOne) {
  std::map<std::string, double> h;
  std::map<std::string, std::int64_t> k;
  for (int i = 0; i < 300; ++i) {
    const auto n = "p" + std::to_string(i);
    h[n] = (i * 37) % 101;
    k[n] = 4;
  }
  const auto c = stability_curve(h, k, 1, 30, 50);
  ASSERT_EQ(c.a_values.size(), 30u);
  EXPECT_FALSE(c.s_values[0].has_value());
  for (std::size_t i = 1; i < c.s_values.size(); ++i) EXPECT_EQ(*c.s_values[i], 1.0);
}

TEST(Stability, SmallPopulationNeverMoves) {
  std::map<std::string, double> h;
  std::map<std::string, std::int64_t> k;
  std::mt19937 rng(3);
  for (int i = 0; i < 51; ++i) {
    const auto n = "p" + std::to_string(i);
    h[n] = rng() % 50;
    k[n] = 1 + rng() % 200;
  }
  const auto c = stability_curve(h, k);
  for (std::size_t i = 1; i < c.s_values.size(); ++i) EXPECT_EQ(*c.s_values[i], 1.0);
}

TEST(Stability, Errors) {
  EXPECT_THROW(stability_curve({}, {}), DomainError);
  EXPECT_THROW(stability_curve({{"a", 1.0}}, {{"b", 1}}), DomainError);
  EXPECT_THROW(stability_curve({{"a", 1.0}}, {}), DomainError);
}

TEST(Stability, MatchesIndependentRanking) {
  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> hd(1.5, 1.0), kd(1.0, 1.5);
  std::map<std::string, double> h;
  std::map<std::string, std::int64_t> k;
  for (int i = 0; i < 2000; ++i) {
    const auto n = "pkg" + std::to_string(i);
    h[n] = std::round(hd(rng) * 10) / 10;
    k[n] = static_cast<std::int64_t>(kd(rng));
  }
  const auto c = stability_curve(h, k, 1, 30, 50);

  auto rank_of = [&](int a) {
    std::vector<std::pair<double, std::string>> v;
    for (const auto& [n, x] : h) {
      const double kk = static_cast<double>(k[n]);
      v.push_back({kk == 0 ? 0.0 : x * kk / (kk + a), n});
    }
    std::sort(v.begin(), v.end(), [](const auto& l, const auto& r) {
      return l.first != r.first ? l.first > r.first : l.second < r.second;
    });
    std::map<std::string, long> rk;
    for (std::size_t i = 0; i < v.size(); ++i) rk[v[i].second] = static_cast<long>(i) + 1;
    return rk;
  };
  auto prev = rank_of(1);
  for (int a = 2; a <= 30; ++a) {
    const auto cur = rank_of(a);
    std::size_t stable = 0;
    for (const auto& [n, r] : cur)
      if (std::labs(r - prev.at(n)) <= 50) ++stable;
    EXPECT_DOUBLE_EQ(*c.s_values[a - 1], static_cast<double>(stable) / 2000.0) << "a=" << a;
    prev = cur;
  }
  for (const auto& s : c.s_values)
    if (s) {
      EXPECT_GE(*s, 0.0);
      EXPECT_LE(*s, 1.0);
    }
}

TEST(SelectPenalty, FlatCurvePicksFirstPoint) {
  StabilityCurve c;
  for (int a = 1; a <= 30; ++a) {
    c.a_values.push_back(a);
    c.s_values.push_back(a == 1 ? std::nullopt : std::optional<double>(1.0));
  }
  const auto sel = select_penalty(c, 10);
  EXPECT_TRUE(sel.plateau_found);
  EXPECT_EQ(sel.a, 2);
}

TEST(SelectPenalty, PlateauOnset) {
  StabilityCurve c;
  for (int a = 1; a <= 30; ++a) {
    c.a_values.push_back(a);
    if (a == 1)
      c.s_values.push_back(std::nullopt);
    else
      c.s_values.push_back(a < 12 ? 0.5 + 0.04 * a : 0.5 + 0.04 * 12 + 0.0005 * (a - 12));
  }
  const auto sel = select_penalty(c, 10);
  EXPECT_TRUE(sel.plateau_found);
  EXPECT_EQ(sel.a, 12);
}

TEST(SelectPenalty, NoPlateauFallsBack) {
  StabilityCurve c;
  for (int a = 1; a <= 30; ++a) {
    c.a_values.push_back(a);
    c.s_values.push_back(a == 1 ? std::nullopt : std::optional<double>(0.01 * a));
  }
  EXPECT_EQ(select_penalty(c, 10).a, 10);
  EXPECT_FALSE(select_penalty(c, 6).plateau_found);
  EXPECT_EQ(select_penalty(c, 6).a, 6);
}
