#include <gtest/gtest.h>

#include <map>
#include <set>

#include "../support/mock.hpp"
#include "../support/oracles.hpp"
#include "../support/synth.hpp"
#include "vplay/apportion.hpp"
#include "vplay/error.hpp"
#include "vplay/metrics.hpp"
#include "vplay/reviews.hpp"

using namespace vplay;
using namespace vplay::reviews;
namespace ts = testing_support;

namespace {

Json item(bool valid = true) {
  return {{"is_valid", valid},
          {"filter_reason", valid ? Json(nullptr) : Json("too short")},
          {"scores", {{"mechanism_anchoring", 4}, {"causal_attribution", 5}, {"constructiveness", 3}}},
          {"facets", {"Luck vs. Strategy"}}};
}

std::string items(std::size_t n) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < n; ++i) arr.push_back(item());
  return arr.dump();
}

std::vector<RawReview> raws(std::size_t n) {
  std::vector<RawReview> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"r" + std::to_string(i), "g", 7.0, "text " + std::to_string(i), "s"});
  return out;
}

std::size_t batch_len(const std::vector<Message>& msgs) {
  const auto& u = msgs.back().content;
  const auto a = u.find('['), b = u.rfind(']');
  return Json::parse(u.substr(a, b - a + 1)).size();
}

}  // namespace

TEST(Annotation, ItemRoundTrip) {
  const auto a = annotation_from_json(item());
  EXPECT_TRUE(a.is_valid);
  EXPECT_EQ(a.causal_attribution, 5);
  EXPECT_EQ(a.facets, std::set<Facet>{*parse_facet("Luck vs. Strategy")});
  auto bad = item();
  bad["filter_reason"] = "x";
  EXPECT_THROW(annotation_from_json(bad), SchemaError);
  bad = item();
  bad["scores"]["constructiveness"] = 6;
  EXPECT_THROW(annotation_from_json(bad), SchemaError);
  bad = item();
  bad["facets"] = {"Fun"};
  EXPECT_THROW(annotation_from_json(bad), SchemaError);
}

TEST(Annotation, BatchesKeepInputOrder) {
  auto m = ts::chat_gateway([](const auto& msgs, auto) { return items(batch_len(msgs)); });
  const auto out = annotate_reviews(raws(23), *m.gateway, {.batch_size = 10});
  ASSERT_EQ(out.size(), 23u);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].review.review_id, "r" + std::to_string(i));
  EXPECT_EQ(m.transport->calls(), 3u);
}

TEST(Annotation, WrongLengthIsRequeriedOnce) {
  std::atomic<int> n{0};
  auto m = ts::chat_gateway([&](const auto& msgs, auto) {
    return ++n == 1 ? items(batch_len(msgs) - 1) : items(batch_len(msgs));
  });
  const auto out = annotate_reviews(raws(5), *m.gateway, {.batch_size = 5});
  EXPECT_EQ(m.transport->calls(), 2u);
  for (const auto& r : out) EXPECT_TRUE(r.annotation.is_valid);
}

TEST(Annotation, FallsBackToSingleItemsAndMarksFailures) {
  auto m = ts::chat_gateway([](const auto& msgs, auto) -> std::string {
    const auto len = batch_len(msgs);
    if (len > 1) return "not json at all";
    return msgs.back().content.find("text 2") != std::string::npos ? "[]" : items(1);
  });
  const auto out = annotate_reviews(raws(4), *m.gateway, {.batch_size = 4});
  EXPECT_EQ(m.transport->calls(), 2u + 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    if (i == 2) {
      EXPECT_FALSE(out[i].annotation.is_valid);
      EXPECT_EQ(out[i].annotation.filter_reason, std::string(kJudgeFailure));
    } else {
      EXPECT_TRUE(out[i].annotation.is_valid);
    }
  }
}

TEST(Annotation, JudgeRunsAtTemperatureZero) {
  std::optional<double> temp;
  auto t = std::make_shared<MockTransport>([&](const std::string&, const Json& body) {
    temp = body.at("temperature").get<double>();
    return MockTransport::chat_reply(items(1));
  });
  Gateway g(ts::endpoint(), t, ts::no_sleep());
  annotate_reviews(raws(1), g);
  EXPECT_EQ(temp, 0.0);
}

TEST(Selection, RatingBins) {
  EXPECT_EQ(rating_bin(1.0), 0);
  EXPECT_EQ(rating_bin(1.99), 0);
  EXPECT_EQ(rating_bin(2.0), 1);
  EXPECT_EQ(rating_bin(9.5), 8);
  EXPECT_EQ(rating_bin(10.0), 9);
}

TEST(Selection, TargetSize) {
  SelectionConfig c;
  EXPECT_EQ(target_size(30, c), 30);
  EXPECT_EQ(target_size(100, c), 50);
  EXPECT_EQ(target_size(1000, c), 80);
  EXPECT_EQ(target_size(5000, c), 100);
  c.retention_ratio = 0.0;
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Selection, PerGameBoundsAndDistribution) {
  const auto corpus = ts::synthetic_corpus(8, 6000, 7);
  const SelectionConfig c;
  const auto result = select_reviews(corpus, c);
  std::map<std::string, std::vector<const CuratedReview*>> by_game;
  for (const auto& r : result.corpus) by_game[r.review.game_id].push_back(&r);
  ASSERT_EQ(by_game.size(), 8u);
  for (const auto& g : result.stats.games) {
    EXPECT_EQ(g.selected, static_cast<std::size_t>(target_size(g.n_valid, c)));
    EXPECT_GE(g.selected, 50u);
    EXPECT_LE(g.selected, 100u);
  }
  for (const auto& r : result.corpus) EXPECT_TRUE(r.annotation.is_valid);
  ASSERT_TRUE(result.stats.pearson_r);
  EXPECT_GE(*result.stats.pearson_r, 0.9);
}

TEST(Selection, BinCountsFollowLargestRemainder) {
  const auto corpus = ts::synthetic_corpus(1, 900, 11);
  const SelectionConfig c;
  const auto picked = select_game(corpus, c);
  std::vector<std::int64_t> hist(10, 0), got(10, 0);
  for (const auto& r : corpus) {
    if (r.annotation.is_valid) ++hist[static_cast<std::size_t>(rating_bin(r.review.rating))];
  }
  for (const auto& r : picked) ++got[static_cast<std::size_t>(rating_bin(r.review.rating))];
  const auto quota = largest_remainder(hist, static_cast<std::int64_t>(picked.size()));
  EXPECT_EQ(got, quota);
}

TEST(Selection, PrefersEligibleReviews) {
  auto corpus = ts::synthetic_corpus(1, 900, 3);
  const SelectionConfig c;
  const auto picked = select_game(corpus, c);
  std::size_t eligible_picked = 0;
  for (const auto& r : picked) eligible_picked += r.annotation.causal_attribution >= 4 ? 1 : 0;
  // 40% of reviews are eligible and bins hold enough of them.
  EXPECT_GT(static_cast<double>(eligible_picked) / static_cast<double>(picked.size()), 0.9);
}

TEST(Selection, DeterministicAndIdSorted) {
  const auto corpus = ts::synthetic_corpus(3, 1500, 5);
  const auto a = select_reviews(corpus, {});
  const auto b = select_reviews(corpus, {});
  EXPECT_EQ(a.corpus, b.corpus);
  for (std::size_t i = 1; i < a.corpus.size(); ++i) {
    if (a.corpus[i].review.game_id == a.corpus[i - 1].review.game_id) {
      EXPECT_LT(a.corpus[i - 1].review.review_id, a.corpus[i].review.review_id);
    }
  }
}

TEST(Selection, GamesWithoutValidReviewsAreExcluded) {
  auto corpus = ts::synthetic_corpus(2, 400, 9);
  for (auto& r : corpus) {
    if (r.review.game_id == "game100") r.annotation = QualityAnnotation{false, "spam", 1, 1, 1, {}};
  }
  const auto result = select_reviews(corpus, {});
  EXPECT_EQ(result.stats.excluded_games, std::vector<std::string>{"game100"});
  for (const auto& r : result.corpus) EXPECT_EQ(r.review.game_id, "game101");
}

TEST(Selection, StatsAgainstOracle) {
  const auto corpus = ts::synthetic_corpus(5, 2000, 13);
  const auto result = select_reviews(corpus, {});
  std::map<std::string, std::vector<double>> orig, sel;
  std::set<std::pair<std::string, Facet>> fo, fs_;
  for (const auto& r : corpus) {
    if (!r.annotation.is_valid) continue;
    orig[r.review.game_id].push_back(r.review.rating);
    for (auto f : r.annotation.facets) fo.insert({r.review.game_id, f});
  }
  for (const auto& r : result.corpus) {
    sel[r.review.game_id].push_back(r.review.rating);
    for (auto f : r.annotation.facets) fs_.insert({r.review.game_id, f});
  }
  std::vector<double> x, y;
  for (const auto& [g, v] : orig) {
    x.push_back(oracle::naive_mean(v));
    y.push_back(oracle::naive_mean(sel[g]));
  }
  EXPECT_NEAR(*result.stats.pearson_r, oracle::naive_pearson(x, y), 1e-12);
  EXPECT_NEAR(result.stats.facet_coverage, static_cast<double>(fs_.size()) / static_cast<double>(fo.size()), 1e-12);
}
