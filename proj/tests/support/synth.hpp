#pragma once

// Synthetic annotated corpora for selection tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"
#include "vplay/random.hpp"

namespace testing_support {

inline vplay::QualityAnnotation random_annotation(vplay::Rng& rng, double p_invalid = 0.1) {
  vplay::QualityAnnotation a;
  a.is_valid = rng.uniform01() >= p_invalid;
  if (!a.is_valid) a.filter_reason = "too short";
  a.mechanism_anchoring = 1 + static_cast<int>(rng.below(5));
  a.causal_attribution = 1 + static_cast<int>(rng.below(5));
  a.constructiveness = 1 + static_cast<int>(rng.below(5));
  // Facets are sparse and skewed so that coverage is not trivially saturated.
  for (std::size_t f = 0; f < vplay::kFacets.size(); ++f) {
    const double p = 0.5 / static_cast<double>(f + 1);
    if (rng.uniform01() < p) a.facets.insert(vplay::kFacets[f]);
  }
  return a;
}

// `games` games with per-game mean ratings spread over [3, 9] and a total of
// `total` reviews split unevenly.
inline std::vector<vplay::AnnotatedReview> synthetic_corpus(std::size_t games, std::size_t total,
                                                            std::uint64_t seed) {
  vplay::Rng rng(seed);
  std::vector<double> weight(games);
  double wsum = 0;
  for (auto& w : weight) wsum += (w = 0.3 + rng.uniform01());
  std::vector<vplay::AnnotatedReview> out;
  std::size_t made = 0;
  for (std::size_t g = 0; g < games; ++g) {
    const double mean = 3.0 + 6.0 * rng.uniform01();
    const auto n = g + 1 == games ? total - made
                                  : static_cast<std::size_t>(std::floor(weight[g] / wsum * static_cast<double>(total)));
    made += n;
    for (std::size_t i = 0; i < n; ++i) {
      vplay::AnnotatedReview r;
      r.review.game_id = "game" + std::to_string(100 + g);
      r.review.review_id = r.review.game_id + "-" + std::to_string(10000 + i);
      r.review.rating = std::clamp(std::round((mean + 1.5 * rng.normal()) * 2.0) / 2.0, 1.0, 10.0);
      r.review.text = std::string(20 + rng.below(200), 'w');
      r.review.source = "synthetic";
      r.annotation = random_annotation(rng);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace testing_support

namespace testing_support {

struct Blobs {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  std::vector<int> truth;
};

// `k` tight clusters around random unit centres in `dim` dimensions.
inline Blobs unit_blobs(int k, int per_cluster, std::size_t dim, double noise, std::uint64_t seed) {
  vplay::Rng rng(seed);
  auto normalize = [](std::vector<double>& v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
  };
  std::vector<std::vector<double>> centres(static_cast<std::size_t>(k), std::vector<double>(dim));
  for (auto& c : centres) {
    for (double& x : c) x = rng.normal();
    normalize(c);
  }
  Blobs b;
  for (int i = 0; i < per_cluster; ++i) {
    for (int c = 0; c < k; ++c) {
      std::vector<double> v = centres[static_cast<std::size_t>(c)];
      for (double& x : v) x += noise * rng.normal();
      normalize(v);
      b.ids.push_back("p" + std::to_string(b.ids.size() + 1000));
      b.vectors.push_back(std::move(v));
      b.truth.push_back(c);
    }
  }
  return b;
}

}  // namespace testing_support
