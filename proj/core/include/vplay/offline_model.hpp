#pragma once

// Deterministic stand-in for every remote model. Replies are heuristics over
// the prompt text so the full pipeline runs offline and byte-reproducibly.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplay/gateway.hpp"

namespace vplay::offline {

// Reply text for a chat request; the prompt family is recognised from the
// system message.
std::string reply(const std::vector<Message>& messages, std::optional<std::uint64_t> seed);

// Signed feature-hashing bag of words plus a constant bias bucket (never zero).
std::vector<double> hash_embedding(std::string_view text, std::size_t dim = 256);

}  // namespace vplay::offline
