#include <gtest/gtest.h>

#include <filesystem>

#include "vplay/apportion.hpp"
#include "vplay/datamodel.hpp"
#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/random.hpp"
#include "vplay/records.hpp"
#include "vplay/text.hpp"

using namespace vplay;
namespace fs = std::filesystem;

namespace {

RawReview raw(std::string id = "r1", double rating = 7.5) {
  return {std::move(id), "g1", rating, "Tight engine building because every card matters.", "bgg"};
}

QualityAnnotation good_annotation() {
  QualityAnnotation a;
  a.is_valid = true;
  a.mechanism_anchoring = 4;
  a.causal_attribution = 5;
  a.constructiveness = 3;
  a.facets = {Facet::LuckStrategy, Facet::PacingFlow};
  return a;
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "vplay_datamodel";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Vocabulary, NamesRoundTrip) {
  for (auto k : kSectionKeys) EXPECT_EQ(parse_section_name(section_name(k)), k);
  for (auto f : kFacets) EXPECT_EQ(parse_facet(facet_name(f)), f);
  for (auto p : kPersonas) EXPECT_EQ(parse_persona(persona_name(p)), p);
  EXPECT_FALSE(parse_persona("The Casual").has_value());
  EXPECT_EQ(persona_label_name(std::nullopt), kUnassigned);
  EXPECT_EQ(parse_fact_status("SUPPORTED"), FactStatus::Supported);
  EXPECT_FALSE(parse_fact_status("MAYBE").has_value());
}

TEST(Vocabulary, CanonicalNames) {
  EXPECT_EQ(section_name(SectionKey::FaqEdgeCases), "FAQ or Edge Cases");
  EXPECT_EQ(persona_name(Persona::ThrillSeeker), "The Thrill Seeker");
  EXPECT_EQ(kThinkOpen, "<think>");
  EXPECT_EQ(kThinkClose, "</think>");
}

TEST(Validation, GameRecordBounds) {
  GameRecord g{"g1", "Game", 2.5, 7.0, 2020, 10, {}, {}};
  EXPECT_NO_THROW(validate(g));
  g.weight = 5.5;
  try {
    validate(g);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "weight");
  }
  g.weight = 2.5;
  g.rank = 0;
  EXPECT_THROW(validate(g), ValidationError);
}

TEST(Validation, DuplicateGameIds) {
  GameRecord g{"g1", "Game", 2.5, 7.0, 2020, std::nullopt, {}, {}};
  EXPECT_THROW(validate_unique_ids({g, g}), ValidationError);
}

TEST(Validation, AnnotationReasonAgreesWithValidity) {
  auto a = good_annotation();
  EXPECT_NO_THROW(validate(a));
  a.filter_reason = "Too Short";
  EXPECT_THROW(validate(a), ValidationError);
  a.is_valid = false;
  EXPECT_NO_THROW(validate(a));
  a.filter_reason = "  ";
  EXPECT_THROW(validate(a), ValidationError);
  a = good_annotation();
  a.constructiveness = 6;
  EXPECT_THROW(validate(a), ValidationError);
}

TEST(Validation, CuratedRequiresValidAnnotation) {
  CuratedReview c{raw(), good_annotation(), Persona::SystemPurist};
  EXPECT_NO_THROW(validate(c));
  c.annotation.is_valid = false;
  c.annotation.filter_reason = "Irrelevant";
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Validation, SftRecordNeedsOneLeadingThinkBlock) {
  SftRecord r{"g1", "r1", Persona::NarrativeArchitect, "You are The Narrative Architect.", "user",
              "<think>\na\n</think>\n{\"rating\":7}"};
  EXPECT_NO_THROW(validate(r));
  auto bad = r;
  bad.target_text = "x<think>a</think>{}";
  EXPECT_THROW(validate(bad), ValidationError);
  bad.target_text = "<think>a</think><think>b</think>{}";
  EXPECT_THROW(validate(bad), ValidationError);
  bad.target_text = "<think>a</think>   ";
  EXPECT_THROW(validate(bad), ValidationError);
  bad = r;
  bad.system_text = "You are a player.";
  EXPECT_THROW(validate(bad), ValidationError);
}

TEST(Validation, SimulatedReviewRating) {
  SimulatedReview s{"g1", Persona::ThrillSeeker, 10, "fun", std::nullopt, 0};
  EXPECT_NO_THROW(validate(s));
  s.rating = 0;
  EXPECT_THROW(validate(s), ValidationError);
  s.rating = 5;
  s.chain = MdaChain{"a", "", "c"};
  EXPECT_THROW(validate(s), ValidationError);
}

TEST(Records, RoundTripEveryType) {
  GameRecord g{"g1", "Game", 2.5, 7.0, 2020, 3, {"Dice Rolling"}, {"Space"}};
  EXPECT_EQ(parse_record<GameRecord>(serialize_record(g)), g);
  AnnotatedReview a{raw(), good_annotation()};
  EXPECT_EQ(parse_record<AnnotatedReview>(serialize_record(a)), a);
  CuratedReview c{raw(), good_annotation(), std::nullopt};
  EXPECT_EQ(parse_record<CuratedReview>(serialize_record(c)), c);
  c.persona = Persona::SocialLubricator;
  EXPECT_EQ(parse_record<CuratedReview>(serialize_record(c)), c);
  SimulatedReview s{"g1", Persona::ThrillSeeker, 8, "fun", MdaChain{"a", "b", "c"}, 3};
  EXPECT_EQ(parse_record<SimulatedReview>(serialize_record(s)), s);
  EmbeddingRecord e{"r1", "[SENTIMENT: Positive] :: x", {0.6, 0.8}};
  EXPECT_EQ(parse_record<EmbeddingRecord>(serialize_record(e)), e);
  DroppedTriple d{"g1", "r1", "judge failure", 3};
  EXPECT_EQ(parse_record<DroppedTriple>(serialize_record(d)), d);
  RectificationDiff rd{"g1", {"Setup"}};
  EXPECT_EQ(parse_record<RectificationDiff>(serialize_record(rd)), rd);
}

TEST(Records, KeysAreSorted) {
  const auto line = serialize_record(raw());
  EXPECT_LT(line.find("\"game_id\""), line.find("\"rating\""));
  EXPECT_LT(line.find("\"rating\""), line.find("\"review_id\""));
}

TEST(Records, RejectsUnknownAndMissingKeys) {
  auto j = encode(raw());
  j["extra"] = 1;
  EXPECT_THROW(parse_record<RawReview>(j.dump()), ValidationError);
  j = encode(raw());
  j.erase("rating");
  EXPECT_THROW(parse_record<RawReview>(j.dump()), ValidationError);
  EXPECT_THROW(parse_record<RawReview>("{not json", 4), RecordError);
}

TEST(Records, FileRoundTripAndLineNumbers) {
  const auto path = temp_file("reviews.jsonl");
  std::vector<RawReview> rs{raw("a"), raw("b", 3.0)};
  EXPECT_EQ(save_records(rs, path), 2u);
  EXPECT_EQ(load_records<RawReview>(path), rs);
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"broken\n";
  }
  try {
    load_records<RawReview>(path);
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_records<RawReview>(temp_file("missing.jsonl")), IoError);
}

TEST(Records, SaveValidatesFirst) {
  std::vector<RawReview> rs{raw("a", 11.0)};
  EXPECT_THROW(save_records(rs, temp_file("bad.jsonl")), ValidationError);
}

TEST(Apportion, ThirdsGoCanonically) {
  const std::vector<std::int64_t> counts{1, 1, 1};
  EXPECT_EQ(largest_remainder(counts, 100), (std::vector<std::int64_t>{34, 33, 33}));
}

TEST(Apportion, QuotaProperty) {
  Rng rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::int64_t> counts(1 + rng.below(6));
    std::int64_t sum = 0;
    for (auto& c : counts) sum += (c = static_cast<std::int64_t>(rng.below(50)));
    if (sum == 0) counts[0] = sum = 1;
    const auto n = static_cast<std::int64_t>(rng.below(500));
    const auto q = largest_remainder(counts, n);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      total += q[k];
      EXPECT_LT(std::abs(static_cast<double>(q[k]) - static_cast<double>(n) * counts[k] / sum), 1.0);
      if (counts[k] == 0) EXPECT_EQ(q[k], 0);
    }
    EXPECT_EQ(total, n);
  }
}

TEST(Apportion, Errors) {
  const std::vector<std::int64_t> zeros{0, 0};
  EXPECT_THROW(largest_remainder(zeros, 3), std::invalid_argument);
  const std::vector<std::int64_t> neg{-1, 2};
  EXPECT_THROW(largest_remainder(neg, 3), std::invalid_argument);
}

TEST(Rng, DeterministicAndDerived) {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
  Rng c(3);
  for (int i = 0; i < 1000; ++i) {
    const auto v = c.below(7);
    EXPECT_LT(v, 7u);
    const double u = c.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::fill("{a}-{b}-{c}", {{"a", "1"}, {"b", "2"}}), "1-2-{c}");
  EXPECT_EQ(text::word_count("one two  three"), 3u);
  EXPECT_EQ(text::normalized_tokens("Hello, World! it's"), (std::vector<std::string>{"hello", "world", "its"}));
  EXPECT_EQ(text::format_number(7.0), "7");
  EXPECT_EQ(text::format_number(7.5), "7.5");
  const std::string s = "caf\xc3\xa9";
  EXPECT_EQ(text::utf8_truncate(s, 4), "caf");
  EXPECT_EQ(text::utf8_truncate(s, 5), s);
}

TEST(JsonExtract, FindsFencedAndEmbeddedJson) {
  const auto shape = Shape::object({{"score", Shape::integer(1, 5)}, {"reason", Shape::string(), false}});
  EXPECT_EQ(extract_json("```json\n{\"score\": 3}\n```", shape).at("score"), 3);
  EXPECT_EQ(extract_json("Sure! Here it is: {\"score\": 4, \"reason\": \"ok\"} hope it helps", shape).at("score"), 4);
  EXPECT_THROW(extract_json("no json here", shape), ParseError);
  EXPECT_THROW(extract_json("{\"score\": 6}", shape), SchemaError);
  EXPECT_THROW(extract_json("{\"score\": 3, \"extra\": 1}", shape), SchemaError);
  EXPECT_THROW(extract_json("{\"reason\": \"x\"}", shape), SchemaError);
}

TEST(JsonExtract, SchemaErrorsNameKeys) {
  const auto shape = Shape::object({{"a", Shape::integer()}});
  try {
    extract_json("{\"b\": 1}", shape);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.missing_keys(), std::vector<std::string>{"a"});
    EXPECT_EQ(e.extra_keys(), std::vector<std::string>{"b"});
  }
}

TEST(JsonExtract, ArraysEnumsAndNullables) {
  const auto shape = Shape::array(Shape::object({{"s", Shape::enumeration({"X", "Y"})},
                                                 {"n", Shape::nullable(Shape::string(true))}}),
                                  2);
  EXPECT_NO_THROW(extract_json(R"([{"s":"X","n":null},{"s":"Y","n":"v"}])", shape));
  EXPECT_THROW(extract_json(R"([{"s":"Z","n":null},{"s":"Y","n":"v"}])", shape), SchemaError);
  EXPECT_THROW(extract_json(R"([{"s":"X","n":null}])", shape), SchemaError);
  EXPECT_THROW(extract_json(R"([{"s":"X","n":""},{"s":"Y","n":"v"}])", shape), SchemaError);
}
