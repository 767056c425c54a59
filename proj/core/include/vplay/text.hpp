#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vplay::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

// Whitespace-separated tokens.
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::size_t word_count(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces every `{key}` occurrence; unknown placeholders are left untouched.
std::string fill(std::string_view tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values);

// Truncates to at most `max_bytes` without splitting a UTF-8 sequence.
std::string utf8_truncate(std::string_view s, std::size_t max_bytes);

// Shortest round-trip decimal; integral values print without a fraction ("7", "7.5").
std::string format_number(double v);

// Lowercase, ASCII punctuation removed, whitespace-tokenized.
std::vector<std::string> normalized_tokens(std::string_view s);

// Sentences split on . ! ? followed by whitespace; trimmed and non-empty.
std::vector<std::string> sentences(std::string_view s);

}  // namespace vplay::text
