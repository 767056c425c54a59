#include <gtest/gtest.h>

#include <functional>
#include <map>

#include "../support/mock.hpp"
#include "../support/synth.hpp"
#include "vplay/cot.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/metrics.hpp"
#include "vplay/personas.hpp"
#include "vplay/random.hpp"
#include "vplay/reviews.hpp"

using namespace vplay;
namespace ts = testing_support;

TEST(Property, ExtractInvertsSerialize) {
  Rng rng(31);
  std::function<Json(int)> value = [&](int depth) -> Json {
    switch (depth > 2 ? rng.below(4) : rng.below(6)) {
      case 0: return static_cast<std::int64_t>(rng.below(2000)) - 1000;
      case 1: return std::string("s\"{}[]") + std::to_string(rng.below(100));
      case 2: return rng.below(2) == 1;
      case 3: return nullptr;
      case 4: {
        Json a = Json::array();
        for (std::uint64_t i = 0, n = rng.below(4); i < n; ++i) a.push_back(value(depth + 1));
        return a;
      }
      default: {
        Json o = Json::object();
        for (std::uint64_t i = 0, n = 1 + rng.below(3); i < n; ++i) o["k" + std::to_string(i)] = value(depth + 1);
        return o;
      }
    }
  };
  for (int t = 0; t < 300; ++t) {
    Json v = Json::object({{"root", value(0)}});
    const auto wrapped = t % 3 == 0 ? v.dump() : t % 3 == 1 ? "Here you go:\n```json\n" + v.dump(2) + "\n```" : "ok " + v.dump() + " done";
    EXPECT_EQ(extract_json(wrapped, Shape::any()), v) << wrapped;
  }
}

TEST(Property, SentimentTierIsMonotoneStep) {
  int prev = -1, changes = 0;
  for (int i = 10; i <= 100; ++i) {
    const auto t = personas::sentiment_tier(i / 10.0);
    const int rank = t == personas::SentimentTier::Negative ? 0 : t == personas::SentimentTier::Neutral ? 1 : 2;
    EXPECT_GE(rank, prev);
    changes += rank != prev && prev >= 0 ? 1 : 0;
    prev = rank;
  }
  EXPECT_EQ(changes, 2);
}

TEST(Property, StrictModeIsReturnedForEveryMultiset) {
  std::vector<PersonaLabel> alphabet(kPersonas.begin(), kPersonas.end());
  std::size_t checked = 0;
  std::function<void(std::vector<PersonaLabel>&, std::size_t)> walk = [&](std::vector<PersonaLabel>& v, std::size_t from) {
    if (!v.empty()) {
      std::map<Persona, int> count;
      for (const auto& x : v) ++count[*x];
      int top = 0, at_top = 0;
      Persona mode{};
      for (const auto& [p, c] : count) {
        if (c > top) top = c, at_top = 1, mode = p;
        else if (c == top) ++at_top;
      }
      if (at_top == 1) {
        EXPECT_EQ(personas::strict_mode(v), mode);
        EXPECT_EQ(personas::aggregate_votes(v, {}), mode);
        ++checked;
      } else {
        EXPECT_EQ(personas::strict_mode(v), std::nullopt);
      }
    }
    if (v.size() == 5) return;
    for (std::size_t i = from; i < alphabet.size(); ++i) {
      v.push_back(alphabet[i]);
      walk(v, i);
      v.pop_back();
    }
  };
  std::vector<PersonaLabel> v;
  walk(v, 0);
  EXPECT_GT(checked, 100u);
}

TEST(Property, RaisingThresholdNeverGrowsEligiblePool) {
  const auto corpus = ts::synthetic_corpus(4, 2000, 21);
  std::vector<std::size_t> prev;
  for (int th = 1; th <= 5; ++th) {
    reviews::SelectionConfig c;
    c.quality_threshold = th;
    const auto s = reviews::select_reviews(corpus, c).stats;
    std::vector<std::size_t> now;
    for (const auto& g : s.games) now.push_back(g.n_eligible);
    if (!prev.empty()) {
      for (std::size_t i = 0; i < now.size(); ++i) EXPECT_LE(now[i], prev[i]);
    }
    prev = now;
  }
}

TEST(Property, RatiosStayInRange) {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const auto s = rng.below(50), i = rng.below(50), c = rng.below(50);
    if (s + i + c == 0) continue;
    const double a = metrics::fact_accuracy(s, i, c);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    const auto n = 1 + rng.below(60), m = rng.below(n + 1);
    const double o = metrics::op_rec(m, n);
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 100.0);
    EXPECT_DOUBLE_EQ(o, 100.0 * static_cast<double>(m) / static_cast<double>(n));
  }
}

namespace {

struct CotWorld {
  StructuredRulebook rulebook{"g1", {}, "h"};
  std::vector<PersonaProfile> profiles = personas::canonical_profiles();
  CotWorld() {
    for (auto k : kSectionKeys) rulebook.sections.push_back({k, "rules"});
  }
  std::vector<cot::Triple> triples(std::size_t n) const {
    std::vector<cot::Triple> out;
    for (std::size_t i = 0; i < n; ++i) {
      cot::Triple t;
      t.rulebook = &rulebook;
      t.persona = profiles[i % 5];
      t.review.review = {"r" + std::to_string(i), "g1", 1.0 + static_cast<double>(i % 10), "review " + std::to_string(i), "s"};
      t.review.annotation.is_valid = true;
      t.review.persona = t.persona.name;
      out.push_back(t);
    }
    return out;
  }
};

const std::string kChain =
    R"({"thought_chain": {"content_extraction": "a", "dynamic_interaction": "b", "experience_outcome": "c"}})";

}  // namespace

TEST(Property, AcceptanceMonotoneInVerifierLeniency) {
  CotWorld w;
  const auto triples = w.triples(20);
  auto teacher = ts::chat_gateway([](const auto&, auto) { return kChain; });
  auto strict = ts::chat_gateway([](const auto& msgs, auto seed) {
    const bool pass = (*seed % 3) == 0 && msgs.back().content.find("review 1") == std::string::npos;
    return Json{{"status", pass ? "PASS" : "REJECT"}, {"reason", "r"}}.dump();
  });
  auto lenient = ts::chat_gateway([](const auto&, auto) { return std::string(R"({"status": "PASS", "reason": ""})"); });
  const auto a = cot::run_filtration(triples, *teacher.gateway, *strict.gateway);
  const auto b = cot::run_filtration(triples, *teacher.gateway, *lenient.gateway);
  std::set<std::string> strict_ids, lenient_ids;
  for (const auto& r : a.accepted) strict_ids.insert(r.review_id);
  for (const auto& r : b.accepted) lenient_ids.insert(r.review_id);
  EXPECT_TRUE(std::includes(lenient_ids.begin(), lenient_ids.end(), strict_ids.begin(), strict_ids.end()));
  EXPECT_EQ(lenient_ids.size(), 20u);
  EXPECT_LT(strict_ids.size(), 20u);
}

TEST(Property, RecordsNamePersonaAndGame) {
  CotWorld w;
  for (const auto& t : w.triples(10)) {
    const auto r = cot::build_record(t, {"a", "b", "c"});
    EXPECT_NE(r.system_text.find(persona_name(t.persona.name)), std::string::npos);
    EXPECT_EQ(r.game_id, t.rulebook->game_id);
    const auto target = cot::split_think(r.target_text);
    ASSERT_TRUE(target);
    EXPECT_EQ(Json::parse(target->second).at("persona"), persona_name(t.persona.name));
  }
}
