#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vplay {

// Largest-remainder (Hamilton) apportionment of `total` units proportionally to
// non-negative integer `counts`. Arithmetic is exact (integer remainders).
// Leftover units go by descending remainder; equal remainders go to the lower index.
// Zero-count entries always receive zero. Throws std::invalid_argument when every
// count is zero and total > 0, or when any input is negative.
std::vector<std::int64_t> largest_remainder(std::span<const std::int64_t> counts, std::int64_t total);

}  // namespace vplay
