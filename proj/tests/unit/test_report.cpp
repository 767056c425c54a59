#include <gtest/gtest.h>

#include <filesystem>

#include "../support/corpus.hpp"
#include "vplay/report.hpp"

namespace {

using namespace vplay;

CuratedReview truth(const std::string& game, double rating, PersonaLabel persona) {
  static int next = 0;
  CuratedReview c;
  c.review.game_id = game;
  c.review.review_id = game + "-t" + std::to_string(next++);
  c.review.rating = rating;
  c.review.text = "enough words to be a review";
  c.annotation.is_valid = true;
  c.persona = persona;
  return c;
}

SimulatedReview sim(const std::string& game, Persona p, int rating, int run) {
  SimulatedReview s;
  s.game_id = game;
  s.persona = p;
  s.rating = rating;
  s.review = "the deck engine sings but the market stalls";
  s.run_index = run;
  return s;
}

report::EvalInputs worked_example() {
  report::EvalInputs in;
  in.variant = "Full";
  in.simulated = {sim("g1", Persona::SystemPurist, 6, 0), sim("g1", Persona::SystemPurist, 8, 1),
                  sim("g2", Persona::ThrillSeeker, 3, 0)};
  in.truth = {truth("g1", 7.0, Persona::SystemPurist), truth("g1", 5.0, Persona::SystemPurist),
              truth("g2", 4.0, Persona::ThrillSeeker), truth("g2", 9.0, std::nullopt)};
  return in;
}

TEST(Csv, QuotingRoundTrips) {
  EXPECT_EQ(report::csv_field("plain"), "plain");
  EXPECT_EQ(report::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(report::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto dir = testing_support::fresh_dir("csv");
  const std::vector<std::vector<std::string>> rows{{"x, y", "line\nbreak"}, {"", "\"q\""}};
  report::write_csv(dir / "t.csv", {"a", "b"}, rows);
  const auto back = report::read_csv(dir / "t.csv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(back[1], rows[0]);
  EXPECT_EQ(back[2], rows[1]);
  EXPECT_EQ(report::cell(std::nullopt), "");
}

// g1: predicted mean 7 vs 6, W1({6,8},{5,7}) = 1.
// g2: predicted 3 vs 6.5 (the unassigned review counts for ratings),
//     W1({3},{4,9}) = 1 * 1 + 0.5 * 5 = 3.5.
TEST(PureMetrics, WorkedExample) {
  const auto r = report::pure_metrics(worked_example());
  ASSERT_EQ(r.games.size(), 2u);
  EXPECT_EQ(r.games[0].game_id, "g1");
  EXPECT_DOUBLE_EQ(r.games[0].abs_error, 1.0);
  EXPECT_DOUBLE_EQ(r.games[0].wd, 1.0);
  EXPECT_DOUBLE_EQ(r.games[1].truth_mean, 6.5);
  EXPECT_DOUBLE_EQ(r.games[1].abs_error, 3.5);
  EXPECT_DOUBLE_EQ(r.games[1].wd, 3.5);
  ASSERT_TRUE(r.summary.mae);
  EXPECT_DOUBLE_EQ(*r.summary.mae, 2.25);
  EXPECT_DOUBLE_EQ(*r.summary.wd, 2.25);
  EXPECT_EQ(r.summary.simulated, 3u);

  ASSERT_EQ(r.simulated_histogram.size(), 10u);
  EXPECT_EQ(r.simulated_histogram[2], 1u);
  EXPECT_EQ(r.simulated_histogram[5], 1u);
  EXPECT_EQ(r.simulated_histogram[7], 1u);
  std::size_t truth_total = 0;
  for (auto n : r.truth_histogram) truth_total += n;
  EXPECT_EQ(truth_total, 4u);

  ASSERT_EQ(r.personas.size(), kPersonas.size() + 1);
  EXPECT_EQ(r.personas.back().persona, "AVERAGE");
  for (const auto& p : r.personas) {
    if (p.persona == persona_name(Persona::SystemPurist) || p.persona == persona_name(Persona::ThrillSeeker)) {
      EXPECT_EQ(p.games, 1u) << p.persona;
      ASSERT_TRUE(p.mae) << p.persona;
      EXPECT_DOUBLE_EQ(*p.mae, 1.0) << p.persona;
    }
  }
  ASSERT_TRUE(r.summary.mae_persona_avg);
  EXPECT_DOUBLE_EQ(*r.summary.mae_persona_avg, 1.0);
}

TEST(PureMetrics, EncodeDecodeRoundTrip) {
  const auto r = report::pure_metrics(worked_example());
  const auto j = report::encode(r);
  EXPECT_EQ(report::encode(report::decode_report(j)), j);
}

TEST(PureMetrics, WritesEveryTable) {
  const auto dir = testing_support::fresh_dir("report_tables");
  const auto files = report::write_report(report::pure_metrics(worked_example()), dir);
  for (const char* suffix : {"games", "summary", "tiers", "density", "personas"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / ("eval_Full_" + std::string(suffix) + ".csv"))) << suffix;
  }
  EXPECT_EQ(files.size(), 5u);
  const auto games = report::read_csv(dir / "eval_Full_games.csv");
  EXPECT_GE(games.size(), 3u);
}

}  // namespace
