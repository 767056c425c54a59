#include "vplay/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vplay/error.hpp"
#include "vplay/metrics.hpp"
#include "vplay/random.hpp"

namespace vplay::split {

int weight_band(double weight) { return std::clamp(static_cast<int>(std::floor(weight)) - 1, 0, 3); }

SplitResult stratify_test_split(const std::vector<GameRecord>& games, std::size_t per_stratum, std::uint64_t seed,
                                const std::set<std::string>& training_ids) {
  validate_unique_ids(games);
  SplitResult out;
  std::vector<const GameRecord*> candidates;
  for (const auto& g : games) {
    validate(g);
    if (training_ids.count(g.game_id)) {
      ++out.excluded_overlap;
      continue;
    }
    candidates.push_back(&g);
  }
  if (candidates.empty()) return out;
  std::vector<double> ratings;
  for (const auto* g : candidates) ratings.push_back(g->avg_rating);
  const auto tiers = metrics::assign_tiers(ratings, ratings, 5);

  std::map<std::pair<int, int>, std::vector<const GameRecord*>> strata;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    strata[{weight_band(candidates[i]->weight), tiers[i]}].push_back(candidates[i]);
  }
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->game_id < b->game_id; });
    Rng rng(derive_seed(seed, "stratum:" + std::to_string(key.first) + ":" + std::to_string(key.second)));
    rng.shuffle(members);
    const auto take = std::min(per_stratum, members.size());
    for (std::size_t i = 0; i < take; ++i) out.test_ids.push_back(members[i]->game_id);
    out.strata.push_back({key.first, key.second, members.size(), take});
  }
  std::sort(out.test_ids.begin(), out.test_ids.end());
  return out;
}

}  // namespace vplay::split
