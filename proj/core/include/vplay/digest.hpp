#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace vplay {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// 64-bit FNV-1a; used for seed derivation and the mock embedder, never for integrity.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace vplay
