#pragma once

// Judge-backed metrics: rule fact-checking, perspective diversity and
// opinion recovery.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::judges {

struct JudgeOptions {
  std::uint64_t seed = 0;
  int max_tokens = 4096;
  std::size_t diversity_k = 5;
  std::size_t mining_batch = 10;
  std::size_t matching_batch = 10;
};

struct Claim {
  std::string claim;
  FactStatus status = FactStatus::Supported;
  std::string reason;
};

struct FactCheck {
  std::string game_id;
  int run_index = 0;
  std::vector<Claim> claims;
  std::size_t discarded = 0;         // out-of-vocabulary statuses after the re-query
  bool judge_failed = false;         // no parseable list after the re-query
  std::size_t supported = 0, inferred = 0, contradicted = 0;
  std::optional<double> accuracy;    // (S + I) / N; absent with zero claims
};

FactCheck fact_check(const SimulatedReview& review, const StructuredRulebook& rulebook, Gateway& gateway,
                     const JudgeOptions& options = {});

// Sizes of the diversity batches for a group of n reviews: full batches of k
// plus a final partial batch when it holds at least two reviews.
std::vector<std::size_t> diversity_batch_sizes(std::size_t n, std::size_t k);

struct DiversityBatch {
  std::string game_id;
  Persona persona = Persona::SystemPurist;
  std::size_t size = 0;
  std::optional<int> score;  // absent when the judge failed twice
  std::string reason;
};

struct DiversityResult {
  std::vector<DiversityBatch> batches;
  std::optional<double> mean;  // over scored batches
};

// Groups by (game, persona) in run order and scores each batch once.
DiversityResult diversity_score(const std::vector<SimulatedReview>& reviews, Gateway& gateway,
                                const JudgeOptions& options = {});

struct OpinionRecovery {
  std::string game_id;
  Persona persona = Persona::SystemPurist;
  std::vector<std::string> checklist;  // V_GT; IDs are 0-based positions
  std::vector<int> matched;            // sorted IDs
  std::size_t skipped_mining_batches = 0;
  std::size_t skipped_matching_batches = 0;
  std::optional<double> op_rec;  // percentage; absent when the checklist is empty
};

// Stage 1 folds the truth reviews into a checklist batch by batch; stage 2
// matches simulated batches against the unmatched remainder.
OpinionRecovery opinion_recovery(const std::string& game_id, Persona persona,
                                 const std::vector<std::string>& truth_reviews,
                                 const std::vector<std::string>& simulated_reviews, Gateway& gateway,
                                 const JudgeOptions& options = {});

// Stage 1 only.
std::vector<std::string> mine_viewpoints(const std::string& game_id, Persona persona,
                                         const std::vector<std::string>& truth_reviews, Gateway& gateway,
                                         const JudgeOptions& options, std::size_t* skipped = nullptr);

// Stage 2 only: matched IDs after feeding `simulated_batches` in order.
std::vector<int> match_viewpoints(const std::string& game_id, Persona persona,
                                  const std::vector<std::string>& checklist,
                                  const std::vector<std::vector<std::string>>& simulated_batches, Gateway& gateway,
                                  const JudgeOptions& options, std::size_t* skipped = nullptr);

// "Review 1: ...\nReview 2: ..." block used by every batched judge.
std::string numbered_reviews(const std::vector<std::string>& texts);

}  // namespace vplay::judges
