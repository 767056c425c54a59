#pragma once

// Pure evaluation metrics. Every function is deterministic and thread-safe.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vplay::metrics {

// Rating samples keyed by game_id.
using GameSamples = std::map<std::string, std::vector<double>>;

double mean(const std::vector<double>& v);

// Mean over games of |mean(predicted_g) - mean(truth_g)|. Both sides must
// cover the same games, each non-empty.
double mae(const GameSamples& predicted, const GameSamples& truth);

// Exact 1-Wasserstein distance between two equal-weight empirical distributions.
double wasserstein1(std::vector<double> a, std::vector<double> b);

// Per-game wasserstein1, macro-averaged.
double wasserstein_macro(const GameSamples& predicted, const GameSamples& truth);

// Tie-corrected Kendall tau, O(n log n). Undefined (UndefinedMetricError) for
// fewer than two points or when either side is constant.
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

// Sample Pearson correlation; nullopt for fewer than two points or zero variance.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

// Unique bigrams / total bigrams over the whole corpus after lowercasing and
// stripping punctuation. Bigrams never span two texts.
double distinct2(const std::vector<std::string>& texts);

// Per-game distinct2, macro-averaged over games with at least one bigram.
double distinct2_macro(const std::map<std::string, std::vector<std::string>>& texts);

// (supported + inferred) / total.
double fact_accuracy(std::size_t supported, std::size_t inferred, std::size_t contradicted);

// matched / total * 100.
double op_rec(std::size_t matched, std::size_t total);

// Tier (0 = highest) of each value under equal-frequency cut points derived from
// `reference`. Values at or above a tier's lowest reference member fall in that tier.
std::vector<int> assign_tiers(const std::vector<double>& reference, const std::vector<double>& values,
                              int tiers = 5);

// counts[truth_tier][predicted_tier], tiers cut from the truth means.
std::vector<std::vector<int>> tier_confusion(const std::vector<double>& predicted_means,
                                             const std::vector<double>& truth_means, int tiers = 5);

}  // namespace vplay::metrics
