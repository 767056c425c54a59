#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "../support/oracles.hpp"
#include "vplay/error.hpp"
#include "vplay/metrics.hpp"
#include "vplay/random.hpp"

using namespace vplay;
using namespace vplay::metrics;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n, bool discrete) {
  std::vector<double> v(n);
  for (auto& x : v) x = discrete ? 1.0 + static_cast<double>(rng.below(10)) : 1.0 + 9.0 * rng.uniform01();
  return v;
}

}  // namespace

TEST(Mae, IdentityAndSingleGame) {
  GameSamples a{{"g", {7, 8, 9}}};
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_DOUBLE_EQ(mae({{"g", {7}}}, {{"g", {9}}}), 2.0);
}

TEST(Mae, MatchesMeanOfMeansOracle) {
  Rng rng(5);
  GameSamples p, t;
  for (int g = 0; g < 5; ++g) {
    p["g" + std::to_string(g)] = draw(rng, 1 + rng.below(30), false);
    t["g" + std::to_string(g)] = draw(rng, 1 + rng.below(30), false);
  }
  EXPECT_NEAR(mae(p, t), oracle::naive_mae(p, t), 1e-12);
}

TEST(Mae, RejectsDifferentGameSets) {
  EXPECT_THROW(mae({{"a", {1}}}, {{"b", {1}}}), std::invalid_argument);
  EXPECT_THROW(mae({{"a", {}}}, {{"a", {1}}}), UndefinedMetricError);
}

TEST(Wasserstein, Examples) {
  EXPECT_EQ(wasserstein1({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1({1}, {10}), 9.0);
  EXPECT_DOUBLE_EQ(wasserstein1({1, 3}, {2, 4}), 1.0);
  EXPECT_THROW(wasserstein1({}, {1}), UndefinedMetricError);
}

TEST(Wasserstein, AgreesWithBothOracles) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = draw(rng, 1 + rng.below(12), trial % 2 == 0);
    const auto b = draw(rng, 1 + rng.below(12), trial % 2 == 0);
    const double w = wasserstein1(a, b);
    EXPECT_NEAR(w, oracle::w1_grid_cdf(a, b), 1e-9);
    EXPECT_NEAR(w, oracle::w1_quantile(a, b), 1e-9);
  }
}

TEST(Wasserstein, IsAMetricOnSmallInstances) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = draw(rng, 1 + rng.below(8), true);
    const auto b = draw(rng, 1 + rng.below(8), true);
    const auto c = draw(rng, 1 + rng.below(8), true);
    EXPECT_NEAR(wasserstein1(a, b), wasserstein1(b, a), 1e-12);
    EXPECT_EQ(wasserstein1(a, a), 0.0);
    auto sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb && a.size() == b.size()) {
      EXPECT_GT(wasserstein1(a, b), 0.0);
    }
    EXPECT_LE(wasserstein1(a, c), wasserstein1(a, b) + wasserstein1(b, c) + 1e-9);
  }
}

TEST(Wasserstein, MacroAveragesGames) {
  GameSamples p{{"a", {1}}, {"b", {5, 5}}};
  GameSamples t{{"a", {3}}, {"b", {5, 5}}};
  EXPECT_DOUBLE_EQ(wasserstein_macro(p, t), 1.0);
}

TEST(Kendall, Examples) {
  EXPECT_DOUBLE_EQ(kendall_tau_b({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau_b({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_NEAR(kendall_tau_b({1, 2, 3, 4}, {1, 3, 2, 4}), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(kendall_tau_b({1}, {1}), UndefinedMetricError);
  EXPECT_THROW(kendall_tau_b({1, 1, 1}, {1, 2, 3}), UndefinedMetricError);
}

TEST(Kendall, ExactOnAllSmallPermutations) {
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    do {
      EXPECT_EQ(kendall_tau_b(x, y), oracle::kendall_pairs(x, y));
    } while (std::next_permutation(y.begin(), y.end()));
  }
}

TEST(Kendall, ExactOnRandomTiedVectors) {
  Rng rng(17);
  int checked = 0;
  while (checked < 100) {
    const auto n = 2 + rng.below(30);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng.below(4));
    for (auto& v : y) v = static_cast<double>(rng.below(4));
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      continue;
    }
    EXPECT_EQ(kendall_tau_b(x, y), oracle::kendall_pairs(x, y));
    ++checked;
  }
}

TEST(Pearson, MatchesNaive) {
  Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = draw(rng, 3 + rng.below(20), false);
    auto y = x;
    for (auto& v : y) v = 0.5 * v + rng.normal();
    EXPECT_NEAR(*pearson(x, y), oracle::naive_pearson(x, y), 1e-12);
  }
  EXPECT_FALSE(pearson({1}, {2}).has_value());
  EXPECT_FALSE(pearson({1, 1}, {2, 3}).has_value());
}

TEST(Distinct2, Examples) {
  EXPECT_DOUBLE_EQ(distinct2({"a b c"}), 1.0);
  EXPECT_DOUBLE_EQ(distinct2({"a b a b"}), 2.0 / 3.0);
  EXPECT_THROW(distinct2({"x"}), UndefinedMetricError);
  EXPECT_DOUBLE_EQ(distinct2({"A, b!", "a b"}), 0.5);
}

TEST(Distinct2, BigramsNeverSpanTexts) { EXPECT_DOUBLE_EQ(distinct2({"a b", "c d"}), 1.0); }

TEST(Distinct2, DuplicatingTheCorpusNeverIncreasesIt) {
  Rng rng(23);
  const std::vector<std::string> words = {"dice", "cards", "luck", "fun", "slow", "the", "a"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> corpus;
    for (std::size_t t = 0; t < 1 + rng.below(4); ++t) {
      std::string s;
      for (std::size_t w = 0; w < 2 + rng.below(6); ++w) s += words[rng.below(words.size())] + " ";
      corpus.push_back(s);
    }
    const double d = distinct2(corpus);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.0);
    auto twice = corpus;
    twice.insert(twice.end(), corpus.begin(), corpus.end());
    EXPECT_LE(distinct2(twice), d);
  }
}

TEST(Distinct2, MacroSkipsGamesWithoutBigrams) {
  EXPECT_DOUBLE_EQ(distinct2_macro({{"a", {"a b a b"}}, {"b", {"x"}}, {"c", {"a b c"}}}), (2.0 / 3.0 + 1.0) / 2.0);
  EXPECT_THROW(distinct2_macro({{"b", {"x"}}}), UndefinedMetricError);
}

TEST(Ratios, ClosedForms) {
  EXPECT_EQ(fact_accuracy(8, 1, 1), 0.9);
  EXPECT_EQ(op_rec(3, 4), 75.0);
  EXPECT_EQ(op_rec(0, 4), 0.0);
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t c = 0; c < 6; ++c) {
        if (s + i + c == 0) continue;
        const double a = fact_accuracy(s, i, c);
        EXPECT_EQ(a, static_cast<double>(s + i) / static_cast<double>(s + i + c));
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
      }
    }
  }
}

TEST(Tiers, IdentityIsDiagonal) {
  const std::vector<double> m = {9, 8.5, 8, 7.5, 7, 6.5, 6, 5.5, 5, 4.5};
  const auto c = tier_confusion(m, m);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(c[i][j], i == j ? 2 : 0);
  }
}

TEST(Tiers, ConstantPredictionsFillOneColumn) {
  const std::vector<double> truth = {9, 8.5, 8, 7.5, 7, 6.5, 6, 5.5, 5, 4.5};
  const auto c = tier_confusion(std::vector<double>(10, 6.8), truth);
  int col_total = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (j != 2) EXPECT_EQ(c[i][j], 0);
    }
    col_total += c[i][2];
  }
  EXPECT_EQ(col_total, 10);
}

TEST(Tiers, TenGameHandTiered) {
  // Truth sorted descending: 9.1 8.7 | 8.2 7.9 | 7.4 7.0 | 6.6 6.1 | 5.5 4.0.
  // Tier floors: 8.7, 7.9, 7.0, 6.1, 4.0.
  const std::vector<double> truth = {7.0, 9.1, 6.1, 8.2, 4.0, 7.9, 5.5, 8.7, 6.6, 7.4};
  const std::vector<double> pred = {7.2, 8.0, 6.0, 8.8, 3.0, 7.0, 6.2, 9.5, 6.9, 6.5};
  // Pred tiers: 7.2->2, 8.0->1, 6.0->4, 8.8->0, 3.0->4, 7.0->2, 6.2->3, 9.5->0, 6.9->3, 6.5->3.
  // Truth tiers: 7.0->2, 9.1->0, 6.1->3, 8.2->1, 4.0->4, 7.9->1, 5.5->4, 8.7->0, 6.6->3, 7.4->2.
  std::vector<std::vector<int>> expected(5, std::vector<int>(5, 0));
  const int tt[] = {2, 0, 3, 1, 4, 1, 4, 0, 3, 2};
  const int pt[] = {2, 1, 4, 0, 4, 2, 3, 0, 3, 3};
  for (int i = 0; i < 10; ++i) ++expected[tt[i]][pt[i]];
  EXPECT_EQ(tier_confusion(pred, truth), expected);
}

TEST(Metrics, ArePure) {
  const std::vector<double> a = {1, 4, 4, 9}, b = {2, 2, 7};
  EXPECT_EQ(wasserstein1(a, b), wasserstein1(a, b));
  EXPECT_EQ(distinct2({"one two three", "two three"}), distinct2({"one two three", "two three"}));
}
