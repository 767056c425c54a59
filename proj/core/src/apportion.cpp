#include "vplay/apportion.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vplay {

namespace {
__extension__ using Wide = __int128;
}  // namespace

std::vector<std::int64_t> largest_remainder(std::span<const std::int64_t> counts, std::int64_t total) {
  if (total < 0) throw std::invalid_argument("largest_remainder: negative total");
  std::int64_t sum = 0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("largest_remainder: negative count");
    sum += c;
  }
  std::vector<std::int64_t> quotas(counts.size(), 0);
  if (total == 0) return quotas;
  if (sum == 0) throw std::invalid_argument("largest_remainder: all counts are zero");

  // total * c may overflow 64 bits; the wide type keeps the remainder exact.
  std::vector<Wide> remainders(counts.size(), 0);
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const Wide scaled = static_cast<Wide>(total) * counts[k];
    quotas[k] = static_cast<std::int64_t>(scaled / sum);
    remainders[k] = scaled % sum;
    assigned += quotas[k];
  }

  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++quotas[order[i]];
    ++assigned;
  }
  return quotas;
}

}  // namespace vplay
