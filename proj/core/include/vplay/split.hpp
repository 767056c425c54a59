#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay::split {

// Weight band: [1,2) -> 0, [2,3) -> 1, [3,4) -> 2, [4,5] -> 3.
int weight_band(double weight);

struct Stratum {
  int weight_band = 0;
  int rating_tier = 0;  // 0 = highest rating quintile
  std::size_t population = 0;
  std::size_t drawn = 0;
};

struct SplitResult {
  std::vector<std::string> test_ids;  // sorted
  std::vector<Stratum> strata;        // non-empty strata, by (band, tier)
  std::size_t excluded_overlap = 0;   // candidates removed for being training ids
};

// Rating quintiles are cut over the candidates left after removing training ids.
SplitResult stratify_test_split(const std::vector<GameRecord>& games, std::size_t per_stratum, std::uint64_t seed,
                                const std::set<std::string>& training_ids = {});

}  // namespace vplay::split
