#pragma once

// Evaluation report assembly and plot-ready CSV emission.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"
#include "vplay/judges.hpp"
#include "vplay/records.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::report {

// RFC 4180 quoting; fields containing a comma, quote or newline are quoted.
std::string csv_field(const std::string& s);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Empty string for nullopt.
std::string cell(const std::optional<double>& v);

struct GameEval {
  std::string game_id;
  std::size_t simulated = 0;
  std::size_t truth = 0;
  double predicted_mean = 0.0;
  double truth_mean = 0.0;
  double abs_error = 0.0;
  double wd = 0.0;
  std::optional<double> distinct2;
  std::optional<double> fact_accuracy;  // percentage, mean over reviews with claims
  std::size_t claims = 0;
  std::size_t zero_claim_reviews = 0;
  std::optional<double> diversity;
  std::optional<double> op_rec;  // macro over the game's (game, persona) groups
  std::size_t viewpoints = 0;
  std::size_t matched = 0;
};

struct PersonaEval {
  std::string persona;  // persona name, or "AVERAGE"
  std::size_t games = 0;
  std::optional<double> mae;
  std::optional<double> wd;
  std::optional<double> kendall_tau;
};

struct Summary {
  std::size_t games = 0;
  std::size_t simulated = 0;
  std::optional<double> mae;               // macro over games
  std::optional<double> mae_persona_avg;   // mean of the per-persona MAEs
  std::optional<double> wd;
  std::optional<double> kendall_tau;
  std::optional<double> fact_accuracy;
  std::size_t claims = 0;
  std::size_t zero_claim_reviews = 0;
  std::size_t fact_judge_failures = 0;
  std::optional<double> distinct2;
  std::optional<double> diversity;
  std::size_t diversity_batches = 0;
  std::optional<double> op_rec;            // macro over (game, persona) groups
  std::size_t viewpoints = 0;
};

struct EvalReport {
  std::string variant;
  std::vector<GameEval> games;  // sorted by game_id
  Summary summary;
  std::vector<std::vector<int>> tier_confusion;  // [truth tier][predicted tier], tier 0 highest
  std::vector<std::size_t> simulated_histogram;  // ratings 1..10
  std::vector<std::size_t> truth_histogram;
  std::vector<PersonaEval> personas;  // canonical order, then AVERAGE
};

Json encode(const EvalReport& r);
EvalReport decode_report(const Json& j);

struct EvalInputs {
  std::string variant;
  std::vector<SimulatedReview> simulated;
  std::vector<CuratedReview> truth;  // labeled reviews; Unassigned ones only count towards ratings
  std::map<std::string, StructuredRulebook> rulebooks;
};

// Pure aggregates: MAE, WD, tau, Distinct-2, tiers, histograms, persona breakdown.
EvalReport pure_metrics(const EvalInputs& in);

// pure_metrics plus the judge-backed Fact., Div. and Op-Rec.
EvalReport evaluate(const EvalInputs& in, Gateway& evaluator, const judges::JudgeOptions& options);

// eval_<variant>_games.csv, _summary.csv, _tiers.csv, _density.csv, _personas.csv under `dir`.
std::vector<std::filesystem::path> write_report(const EvalReport& r, const std::filesystem::path& dir);

// Cross-variant tables: one summary row and one persona block per report.
std::vector<std::filesystem::path> write_comparison(const std::vector<EvalReport>& reports,
                                                    const std::filesystem::path& dir);

}  // namespace vplay::report
