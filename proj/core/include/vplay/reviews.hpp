#pragma once

// Judge-driven review annotation and the stratified coverage-maximising
// selection of a curated corpus.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"
#include "vplay/json_extract.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::reviews {

inline constexpr std::string_view kJudgeFailure = "judge failure";

struct AnnotateOptions {
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  int max_tokens = 4096;
};

// Shape of one judge item.
Shape annotation_shape();

// Converts a shape-checked judge item; throws SchemaError when is_valid and
// filter_reason disagree.
QualityAnnotation annotation_from_json(const Json& item);

// Rendering of a batch as the judge sees it: [{"comment": ..., "rating": ...}].
std::string reviews_json(const std::vector<const RawReview*>& batch);

// One annotation per review, in input order. A batch whose reply is missing or
// of the wrong length is re-queried once, then each review is judged alone; an
// item that still fails is marked invalid with reason "judge failure".
std::vector<AnnotatedReview> annotate_reviews(const std::vector<RawReview>& reviews, Gateway& gateway,
                                              const AnnotateOptions& options = {});

struct SelectionConfig {
  double retention_ratio = 0.08;
  int min_per_game = 50;
  int max_per_game = 100;
  int quality_threshold = 4;  // applied to causal_attribution
  int rating_bins = 10;
};

void validate(const SelectionConfig& c);

// Unit-width bin index of a rating: floor(r) - 1, with 10.0 in the top bin.
int rating_bin(double rating, int bins = 10);

// clamp(round(ratio * n), min, max), capped at n.
std::int64_t target_size(std::size_t n_valid, const SelectionConfig& c);

struct GameStats {
  std::string game_id;
  std::size_t n_total = 0;
  std::size_t n_valid = 0;
  std::size_t n_eligible = 0;
  std::size_t selected = 0;
  double original_mean = 0.0;
  double selected_mean = 0.0;
  std::size_t facets_original = 0;
  std::size_t facets_selected = 0;
};

struct SelectionStats {
  std::optional<double> pearson_r;  // absent with fewer than two games
  double facet_coverage = 0.0;      // selected (game, facet) pairs / original pairs
  double retention = 0.0;           // selected / original
  double delta_anchoring = 0.0;     // selected mean score minus original mean score
  double delta_attribution = 0.0;
  double delta_constructiveness = 0.0;
  std::vector<GameStats> games;
  std::vector<std::string> excluded_games;  // zero valid reviews
};

// Selection for one game's reviews (invalid ones are ignored).
std::vector<AnnotatedReview> select_game(const std::vector<AnnotatedReview>& reviews,
                                         const SelectionConfig& config);

struct SelectionResult {
  std::vector<CuratedReview> corpus;  // persona Unassigned until labeling
  SelectionStats stats;
};

// Groups by game (sorted by game_id), selects per game and reports statistics
// of the selection against the valid pool.
SelectionResult select_reviews(const std::vector<AnnotatedReview>& annotated, const SelectionConfig& config);

SelectionStats selection_stats(const std::vector<AnnotatedReview>& original,
                               const std::vector<AnnotatedReview>& selected);

}  // namespace vplay::reviews
