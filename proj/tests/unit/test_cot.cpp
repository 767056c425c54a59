#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "../support/mock.hpp"
#include "vplay/cot.hpp"
#include "vplay/error.hpp"
#include "vplay/personas.hpp"
#include "vplay/records.hpp"

using namespace vplay;
using namespace vplay::cot;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

const std::string kChain =
    R"({"thought_chain": {"content_extraction": "dice", "dynamic_interaction": "swingy turns", "experience_outcome": "fun"}})";

std::string verdict(bool pass, const std::string& reason = "ok") {
  return Json{{"status", pass ? "PASS" : "REJECT"}, {"reason", reason}, {"suggestion", "be concrete"}}.dump();
}

struct Fixture {
  StructuredRulebook rulebook{"g1", {}, "h"};
  GameRecord game;
  Fixture() {
    for (auto k : kSectionKeys) rulebook.sections.push_back({k, "rules about " + std::string(section_name(k))});
    game.game_id = "g1";
    game.title = "Gem Rush";
  }
  Triple triple(const std::string& id, double rating = 7.6) const {
    Triple t;
    t.game = &game;
    t.rulebook = &rulebook;
    t.persona = personas::canonical_profiles()[4];
    t.review.review = {id, "g1", rating, "Loved the dice.", "s"};
    t.review.annotation.is_valid = true;
    t.review.persona = t.persona.name;
    return t;
  }
};

}  // namespace

TEST(Cot, CritiqueRatingRounding) {
  EXPECT_EQ(critique_rating(7.5), 8);
  EXPECT_EQ(critique_rating(7.49), 7);
  EXPECT_EQ(critique_rating(1.0), 1);
  EXPECT_EQ(critique_rating(0.2), 1);
  EXPECT_EQ(critique_rating(10.0), 10);
}

TEST(Cot, TargetSplitsBack) {
  const MdaChain c{"a", "b", "c"};
  const auto t = target_text(c, Persona::ThrillSeeker, 8, "great");
  const auto s = split_think(t);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->first, c);
  const auto j = Json::parse(s->second);
  EXPECT_EQ(j.at("persona"), "The Thrill Seeker");
  EXPECT_EQ(j.at("rating"), 8);
  EXPECT_FALSE(split_think("no think block"));
  EXPECT_FALSE(split_think("<think>unterminated"));
}

TEST(Cot, TripleMustMatch) {
  Fixture f;
  auto t = f.triple("r1");
  t.review.review.game_id = "other";
  EXPECT_THROW(check_triple(t), ValidationError);
  t = f.triple("r1");
  t.review.persona = Persona::SystemPurist;
  EXPECT_THROW(check_triple(t), ValidationError);
}

TEST(Cot, RuleExcerptBudget) {
  Fixture f;
  EXPECT_LE(rule_excerpt(f.rulebook, 50).size(), 50u);
  EXPECT_EQ(rule_excerpt(f.rulebook, 1'000'000), f.rulebook.to_markdown());
}

TEST(Filtration, PassFirstTime) {
  Fixture f;
  auto teacher = ts::chat_gateway([](const auto&, auto) { return kChain; });
  auto verifier = ts::chat_gateway([](const auto&, auto) { return verdict(true); });
  const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway);
  ASSERT_TRUE(out.record);
  EXPECT_EQ(out.synthesize_calls, 1);
  EXPECT_EQ(out.verify_calls, 1);
  EXPECT_NE(out.record->user_text.find("Gem Rush"), std::string::npos);
  const auto s = split_think(out.record->target_text);
  ASSERT_TRUE(s);
  EXPECT_EQ(Json::parse(s->second).at("rating"), 8);
}

TEST(Filtration, RejectionFeedsRevisionNote) {
  Fixture f;
  ts::Sequence verdicts({verdict(false, "ignores rating"), verdict(true)});
  std::vector<std::string> prompts;
  std::mutex mu;
  auto teacher = ts::chat_gateway([&](const auto& msgs, auto) {
    std::lock_guard lock(mu);
    prompts.push_back(msgs.back().content);
    return kChain;
  });
  auto verifier = ts::chat_gateway([&](const auto&, auto) { return verdicts.next(); });
  const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway);
  ASSERT_TRUE(out.record);
  EXPECT_EQ(out.synthesize_calls, 2);
  EXPECT_EQ(out.verify_calls, 2);
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_EQ(prompts[0].find("REVISION NOTE"), std::string::npos);
  EXPECT_NE(prompts[1].find("ignores rating"), std::string::npos);
  EXPECT_NE(prompts[1].find("be concrete"), std::string::npos);
}

TEST(Filtration, CallBoundsAndDrop) {
  Fixture f;
  for (int max_attempts = 1; max_attempts <= 4; ++max_attempts) {
    auto teacher = ts::chat_gateway([](const auto&, auto) { return kChain; });
    auto verifier = ts::chat_gateway([](const auto&, auto) { return verdict(false, "nope"); });
    const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway,
                                     {.max_attempts = max_attempts});
    EXPECT_FALSE(out.record);
    ASSERT_TRUE(out.dropped);
    EXPECT_EQ(out.dropped->attempts, max_attempts);
    EXPECT_EQ(out.dropped->reason, "nope");
    EXPECT_EQ(out.synthesize_calls, max_attempts);
    EXPECT_LE(out.verify_calls, max_attempts);
    EXPECT_EQ(teacher.transport->calls(), static_cast<std::size_t>(max_attempts));
  }
}

TEST(Filtration, UnparseableVerdictIsJudgeFailure) {
  Fixture f;
  auto teacher = ts::chat_gateway([](const auto&, auto) { return kChain; });
  auto verifier = ts::chat_gateway([](const auto&, auto) { return std::string("maybe?"); });
  const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway, {.max_attempts = 1});
  ASSERT_TRUE(out.dropped);
  EXPECT_EQ(out.dropped->reason, "judge failure");
  EXPECT_EQ(verifier.transport->calls(), 2u);
}

TEST(Filtration, SynthesisFailureConsumesAttempt) {
  Fixture f;
  auto teacher = ts::chat_gateway([](const auto&, auto) { return std::string("{}"); });
  auto verifier = ts::chat_gateway([](const auto&, auto) { return verdict(true); });
  const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway, {.max_attempts = 2});
  ASSERT_TRUE(out.dropped);
  EXPECT_EQ(out.verify_calls, 0);
  EXPECT_EQ(teacher.transport->calls(), 4u);
}

TEST(Filtration, DroppedTriplesNeverExported) {
  Fixture f;
  auto teacher = ts::chat_gateway([](const auto&, auto) { return kChain; });
  auto verifier = ts::chat_gateway([](const auto& msgs, auto) {
    return verdict(msgs.back().content.find("Hated") == std::string::npos, "mismatch");
  });
  std::vector<Triple> triples;
  for (int i = 0; i < 6; ++i) {
    triples.push_back(f.triple("r" + std::to_string(i)));
    if (i % 2) triples.back().review.review.text = "Hated the dice.";
  }
  const auto run = run_filtration(triples, *teacher.gateway, *verifier.gateway);
  EXPECT_EQ(run.accepted.size(), 3u);
  EXPECT_EQ(run.dropped.size(), 3u);
  EXPECT_EQ(run.synthesize_calls, 3u + 3u * 3u);

  const auto dir = fs::temp_directory_path() / "vplay_cot_export";
  fs::remove_all(dir);
  EXPECT_EQ(export_sft(run.accepted, dir / "sft.jsonl", dir / "manifest.txt"), 3u);
  std::ifstream in(dir / "sft.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = Json::parse(line);
    EXPECT_EQ(j.at("assistant").get<std::string>().find("Hated"), std::string::npos);
    EXPECT_TRUE(j.contains("system") && j.contains("user"));
    ++n;
  }
  EXPECT_EQ(n, 3u);
  auto manifest = load_manifest(dir / "manifest.txt");
  ASSERT_EQ(manifest.size(), manifest_entries().size() + 2);
  const auto expected = manifest_entries();
  EXPECT_TRUE(std::equal(expected.begin(), expected.end(), manifest.begin()));
  EXPECT_EQ(manifest[manifest.size() - 2], std::make_pair(std::string("records"), std::string("3")));
}

TEST(Filtration, OfflineModelAcceptsTriples) {
  Fixture f;
  auto teacher = ts::offline_gateway();
  auto verifier = ts::offline_gateway();
  const auto out = filtration_loop(f.triple("r1"), *teacher.gateway, *verifier.gateway);
  EXPECT_TRUE(out.record);
}
