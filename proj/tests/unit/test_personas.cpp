#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "../support/mock.hpp"
#include "../support/oracles.hpp"
#include "../support/synth.hpp"
#include "vplay/error.hpp"
#include "vplay/personas.hpp"
#include "vplay/random.hpp"

using namespace vplay;
using namespace vplay::personas;
namespace ts = testing_support;

namespace {

CuratedReview curated(std::string id, double rating, std::string text, std::set<Facet> facets = {}) {
  CuratedReview r;
  r.review = {std::move(id), "g", rating, std::move(text), "s"};
  r.annotation.is_valid = true;
  r.annotation.facets = std::move(facets);
  return r;
}

}  // namespace

TEST(Composite, SentimentTiers) {
  EXPECT_EQ(sentiment_tier(8.0), SentimentTier::Positive);
  EXPECT_EQ(sentiment_tier(7.99), SentimentTier::Neutral);
  EXPECT_EQ(sentiment_tier(4.0), SentimentTier::Negative);
  EXPECT_EQ(sentiment_tier(4.01), SentimentTier::Neutral);
}

TEST(Composite, RenderedLayout) {
  const auto c = render_composite(
      curated("r", 9, "Great engine.", {*parse_facet("Replayability & Variety"), Facet::RuleClarity}));
  EXPECT_EQ(c.rendered, "[SENTIMENT: Positive] [FOCUS: Rule Clarity & Teachability, Replayability & Variety] :: Great engine.");
  EXPECT_EQ(render_composite(curated("r", 5, "ok")).rendered, "[SENTIMENT: Neutral] [FOCUS: ] :: ok");
}

TEST(Clustering, RecoversBlobs) {
  const auto b = ts::unit_blobs(15, 30, 32, 0.05, 77);
  const auto m = cluster(b.ids, b.vectors, 15, 5, {.n_init = 3});
  const auto labels = assignment_vector(m, b.ids);
  EXPECT_GE(adjusted_rand_index(labels, b.truth), 0.99);
  EXPECT_EQ(m.centroids.size(), 15u);
  for (const auto& c : m.centroids) {
    double n = 0;
    for (double x : c) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-9);
  }
}

TEST(Clustering, ReproducibleAndInertiaNonIncreasing) {
  const auto b = ts::unit_blobs(6, 25, 16, 0.3, 3);
  const auto a = cluster(b.ids, b.vectors, 6, 42);
  const auto c = cluster(b.ids, b.vectors, 6, 42);
  EXPECT_EQ(a.assignments, c.assignments);
  EXPECT_EQ(a.centroids, c.centroids);
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) {
    EXPECT_LE(a.inertia_trace[i], a.inertia_trace[i - 1] + 1e-9);
  }
}

TEST(Clustering, TooFewDistinctVectors) {
  std::vector<std::vector<double>> v(10, {1.0, 0.0});
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back(std::to_string(i));
  EXPECT_THROW(cluster(ids, v, 3, 1), ClusteringError);
}

TEST(Clustering, AriAgainstPairCountingOracle) {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const auto n = 2 + rng.below(40);
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = static_cast<int>(rng.below(4));
    for (auto& x : b) x = static_cast<int>(rng.below(5));
    const double o = oracle::ari_pairs(a, b);
    if (std::isfinite(o)) EXPECT_NEAR(adjusted_rand_index(a, b), o, 1e-9);
  }
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}), 1.0, 1e-12);
}

TEST(Profiling, NearestMembersFirst) {
  std::vector<std::string> ids{"a", "b", "c", "d"};
  std::vector<std::vector<double>> v{{1, 0}, {0.8, 0.6}, {0, 1}, {0.6, 0.8}};
  ClusterModel m;
  m.k = 2;
  m.centroids = {{1, 0}, {0, 1}};
  m.assignments = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
  std::map<std::string, std::string> texts{{"a", "TA"}, {"b", "TB"}, {"c", "TC"}, {"d", "TD"}};
  const auto s = export_profiling_samples(m, ids, v, texts, 1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].review_ids, std::vector<std::string>{"a"});
  EXPECT_EQ(s[1].review_ids, std::vector<std::string>{"c"});
  EXPECT_NE(s[1].prompt.find("TC"), std::string::npos);
  EXPECT_EQ(s[1].prompt.find("TD"), std::string::npos);
}

TEST(MergeMap, ParseFormatApply) {
  const auto map = parse_merge_map("# comment\n0 = The Thrill Seeker\n\n1=The System Purist\n2 = The Thrill Seeker\n");
  EXPECT_EQ(map.at(0), Persona::ThrillSeeker);
  EXPECT_EQ(parse_merge_map(format_merge_map(map)), map);
  EXPECT_THROW(parse_merge_map("0 = Nobody"), RecordError);
  EXPECT_THROW(parse_merge_map("x = The System Purist"), RecordError);

  ClusterModel m;
  m.k = 3;
  m.assignments = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 2}};
  const auto priors = apply_merge_map(m, map);
  const auto per = persona_priors(priors);
  EXPECT_EQ(per.at(Persona::ThrillSeeker), 3u);
  EXPECT_EQ(per.at(Persona::SystemPurist), 1u);
  EXPECT_THROW(apply_merge_map(m, parse_merge_map("0 = The System Purist")), ValidationError);
}

TEST(Votes, StrictModeAndTieBreak) {
  const PersonaLabel sp = Persona::SystemPurist, ee = Persona::EfficiencyEssentialist, na = Persona::NarrativeArchitect;
  EXPECT_EQ(strict_mode({sp, sp, ee}), sp);
  EXPECT_EQ(strict_mode({sp, ee, na}), std::nullopt);
  EXPECT_EQ(strict_mode({}), std::nullopt);
  EXPECT_EQ(aggregate_votes({sp, ee, na}, {ee, sp}), std::nullopt);
  EXPECT_EQ(aggregate_votes({sp, ee, na}, {ee, ee}), ee);
  EXPECT_EQ(aggregate_votes({sp, sp, na}, {na, na}), sp);
  EXPECT_EQ(aggregate_votes({sp, std::nullopt, std::nullopt}, {}), sp);
  EXPECT_EQ(aggregate_votes({std::nullopt, std::nullopt}, {}), std::nullopt);
}

TEST(Labeling, MajorityWithExtraVotes) {
  const std::uint64_t seed = 99;
  std::map<std::uint64_t, int> vote_of;
  for (int v = 0; v < 5; ++v) vote_of[derive_seed(seed, "label-vote:" + std::to_string(v))] = v;
  // Per text, the persona answered at each vote index.
  const std::map<std::string, std::vector<std::string>> script{
      {"clear", {"The System Purist", "The System Purist", "The Thrill Seeker", "x", "x"}},
      {"split", {"The System Purist", "The Social Lubricator", "The Thrill Seeker", "The Thrill Seeker", "The Thrill Seeker"}},
      {"stuck", {"The System Purist", "The Social Lubricator", "The Thrill Seeker", "The System Purist", "The Thrill Seeker"}},
  };
  std::atomic<int> calls{0};
  auto m = ts::chat_gateway([&](const auto& msgs, auto s) {
    ++calls;
    const auto& u = msgs.back().content;
    const auto arr = Json::parse(u.substr(u.find('['), u.rfind(']') - u.find('[') + 1));
    Json out = Json::array();
    for (const auto& r : arr) out.push_back({{"LLM_persona_name", script.at(r.at("comment"))[vote_of.at(*s)]}});
    return out.dump();
  });
  std::vector<CuratedReview> rs{curated("1", 7, "clear"), curated("2", 7, "split"), curated("3", 7, "stuck")};
  const auto labels = label_personas(rs, canonical_profiles(), *m.gateway, {.seed = seed});
  EXPECT_EQ(labels[0], Persona::SystemPurist);
  EXPECT_EQ(labels[1], Persona::ThrillSeeker);
  EXPECT_EQ(labels[2], std::nullopt);
  EXPECT_EQ(calls.load(), 5);
}

TEST(Labeling, IndependentOfCorpusOrder) {
  auto m = ts::offline_gateway();
  std::vector<CuratedReview> rs;
  const char* texts[] = {"The story and theme pull me in", "Every turn is a tight optimisation puzzle",
                         "Great with friends, lots of laughs", "Dice rolls and big swings",
                         "Pure strategy, no luck at all", "Short and efficient, no downtime"};
  for (int i = 0; i < 6; ++i) rs.push_back(curated("r" + std::to_string(i), 7, texts[i]));
  const auto a = label_personas(rs, canonical_profiles(), *m.gateway, {.batch_size = 4, .seed = 1});
  auto rev = rs;
  std::reverse(rev.begin(), rev.end());
  auto b = label_personas(rev, canonical_profiles(), *m.gateway, {.batch_size = 4, .seed = 1});
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Labeling, RejectsWrongPersonaSet) {
  auto m = ts::offline_gateway();
  auto p = canonical_profiles();
  p.pop_back();
  EXPECT_THROW(label_personas({curated("r", 7, "x")}, p, *m.gateway), ValidationError);
}
