#pragma once

// Raw Markdown -> seven-section rulebook, plus the rectification pass and the
// schema validator.

#include <string>
#include <string_view>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::rulebook {

// Empty iff all seven headers are present exactly once, in canonical order,
// each with a non-empty body.
std::vector<std::string> validate_rulebook(const StructuredRulebook& doc);

// Canonical key for a Markdown header line ("## 3. Setup", "### setup:");
// nullopt for any other line.
std::optional<SectionKey> match_header(std::string_view line);

struct ParsedDocument {
  std::vector<RulebookSection> sections;  // in encounter order, duplicates kept
  std::vector<std::string> missing;       // canonical names never seen
  std::vector<std::string> duplicated;
  std::vector<std::string> empty;
  bool ok() const { return missing.empty() && duplicated.empty() && empty.empty(); }
};

// Splits model output into sections. Text before the first recognised header
// is dropped, code-fence lines and trailing "---" rules are removed, and
// unrecognised headers stay in the body of the enclosing section.
ParsedDocument parse_sections(std::string_view markdown);

// Sections reordered canonically. Requires parsed.ok().
StructuredRulebook assemble(const ParsedDocument& parsed, std::string game_id, std::string source_hash);

struct RulebookOptions {
  int max_tokens = 8192;
  std::uint64_t seed = 0;
};

StructuredRulebook structure_rulebook(std::string_view raw_markdown, const std::string& game_id,
                                      Gateway& gateway, const RulebookOptions& options = {});

struct RectifyResult {
  StructuredRulebook doc;
  RectificationDiff diff;
};

RectifyResult rectify_rulebook(const StructuredRulebook& draft, std::string_view raw_markdown,
                               Gateway& gateway, const RulebookOptions& options = {});

}  // namespace vplay::rulebook
