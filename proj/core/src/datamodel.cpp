#include "vplay/datamodel.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "vplay/error.hpp"
#include "vplay/rulebook.hpp"
#include "vplay/text.hpp"

namespace vplay {

namespace {

constexpr std::array<std::string_view, 7> kSectionNames = {
    "Lore & Objective", "Components",         "Setup",
    "Gameplay Flow",    "Core Mechanics",     "Scoring & End Game",
    "FAQ or Edge Cases",
};

constexpr std::array<std::string_view, 8> kFacetNames = {
    "Rule Clarity & Teachability", "Cognitive Load (Complexity)", "Interaction & Conflict",
    "Luck vs. Strategy",           "Balance & Fairness",          "Replayability & Variety",
    "Thematic Integration",        "Pacing & Flow",
};

constexpr std::array<std::string_view, 5> kPersonaNames = {
    "The System Purist", "The Efficiency Essentialist", "The Narrative Architect",
    "The Social Lubricator", "The Thrill Seeker",
};

constexpr std::array<std::string_view, 3> kFactStatusNames = {"SUPPORTED", "INFERRED",
                                                              "CONTRADICTED"};

template <class E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ValidationError(field, message);
}

void require_nonempty(const std::string& value, const std::string& field) {
  require(!text::trim(value).empty(), field, field + " must be non-empty");
}

void require_score(int v, const std::string& field) {
  require(v >= 1 && v <= 5, field, field + " out of [1,5]");
}

}  // namespace

std::string_view section_name(SectionKey key) { return kSectionNames.at(static_cast<std::size_t>(key)); }
std::optional<SectionKey> parse_section_name(std::string_view name) {
  return lookup<SectionKey>(kSectionNames, name);
}

std::string_view facet_name(Facet f) { return kFacetNames.at(static_cast<std::size_t>(f)); }
std::optional<Facet> parse_facet(std::string_view name) { return lookup<Facet>(kFacetNames, name); }

std::string_view persona_name(Persona p) { return kPersonaNames.at(static_cast<std::size_t>(p)); }
std::optional<Persona> parse_persona(std::string_view name) {
  return lookup<Persona>(kPersonaNames, name);
}
std::string_view persona_label_name(const PersonaLabel& label) {
  return label ? persona_name(*label) : kUnassigned;
}

std::string_view fact_status_name(FactStatus s) {
  return kFactStatusNames.at(static_cast<std::size_t>(s));
}
std::optional<FactStatus> parse_fact_status(std::string_view name) {
  return lookup<FactStatus>(kFactStatusNames, name);
}

const std::string& StructuredRulebook::section(SectionKey key) const {
  for (const auto& s : sections) {
    if (s.key == key) return s.text;
  }
  throw std::out_of_range("rulebook " + game_id + " has no section " +
                          std::string(section_name(key)));
}

std::string StructuredRulebook::to_markdown() const {
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += "\n\n";
    out += "## " + std::to_string(static_cast<int>(s.key) + 1) + ". ";
    out += section_name(s.key);
    out += "\n";
    out += s.text;
  }
  out += "\n";
  return out;
}

void validate(const GameRecord& r) {
  require_nonempty(r.game_id, "game_id");
  require(std::isfinite(r.weight) && r.weight >= 1.0 && r.weight <= 5.0, "weight",
          "weight out of [1,5]");
  require(std::isfinite(r.avg_rating) && r.avg_rating >= 1.0 && r.avg_rating <= 10.0,
          "avg_rating", "avg_rating out of [1,10]");
  require(!r.rank || *r.rank > 0, "rank", "rank must be positive");
}

void validate_unique_ids(const std::vector<GameRecord>& games) {
  std::unordered_set<std::string> seen;
  for (const auto& g : games) {
    require(seen.insert(g.game_id).second, "game_id", "duplicate game_id " + g.game_id);
  }
}

void validate(const StructuredRulebook& r) {
  require_nonempty(r.game_id, "game_id");
  require_nonempty(r.source_hash, "source_hash");
  const auto violations = rulebook::validate_rulebook(r);
  require(violations.empty(), "sections",
          violations.empty() ? std::string() : "sections: " + text::join(violations, "; "));
}

void validate(const RawReview& r) {
  require_nonempty(r.review_id, "review_id");
  require_nonempty(r.game_id, "game_id");
  require(std::isfinite(r.rating) && r.rating >= 1.0 && r.rating <= 10.0, "rating",
          "rating out of [1,10]");
}

void validate(const QualityAnnotation& a) {
  if (a.is_valid) {
    require(!a.filter_reason.has_value(), "filter_reason",
            "filter_reason must be absent when is_valid is true");
  } else {
    require(a.filter_reason.has_value() && !text::trim(*a.filter_reason).empty(),
            "filter_reason", "filter_reason required when is_valid is false");
  }
  require_score(a.mechanism_anchoring, "mechanism_anchoring");
  require_score(a.causal_attribution, "causal_attribution");
  require_score(a.constructiveness, "constructiveness");
}

void validate(const AnnotatedReview& r) {
  validate(r.review);
  validate(r.annotation);
}

void validate(const CuratedReview& r) {
  validate(r.review);
  validate(r.annotation);
  require(r.annotation.is_valid, "annotation.is_valid",
          "curated reviews must carry a valid annotation");
}

void validate(const PersonaProfile& p) { require_nonempty(p.profile_text, "profile_text"); }

void validate(const MdaChain& c) {
  require_nonempty(c.content_extraction, "content_extraction");
  require_nonempty(c.dynamic_interaction, "dynamic_interaction");
  require_nonempty(c.experience_outcome, "experience_outcome");
}

void validate(const SimulatedReview& r) {
  require_nonempty(r.game_id, "game_id");
  require(r.rating >= 1 && r.rating <= 10, "rating", "rating out of [1,10]");
  require(r.run_index >= 0, "run_index", "run_index must be non-negative");
  if (r.chain) validate(*r.chain);
}

void validate(const SftRecord& r) {
  require_nonempty(r.game_id, "game_id");
  require_nonempty(r.review_id, "review_id");
  require_nonempty(r.system_text, "system_text");
  require_nonempty(r.user_text, "user_text");
  require_nonempty(r.target_text, "target_text");
  require(r.system_text.find(persona_name(r.persona)) != std::string::npos, "system_text",
          "system_text must name the persona verbatim");
  const auto open = r.target_text.find(kThinkOpen);
  const auto close = r.target_text.find(kThinkClose);
  const bool one_block =
      open == 0 && close != std::string::npos && close > open &&
      r.target_text.find(kThinkOpen, open + 1) == std::string::npos &&
      r.target_text.find(kThinkClose, close + 1) == std::string::npos &&
      !text::trim(r.target_text.substr(close + kThinkClose.size())).empty();
  require(one_block, "target_text",
          "target_text must hold exactly one leading think block followed by the critique");
}

void validate(const EmbeddingRecord& r) {
  require_nonempty(r.review_id, "review_id");
  require(!r.vector.empty(), "vector", "vector must be non-empty");
}

void validate(const RectificationDiff& r) {
  require_nonempty(r.game_id, "game_id");
  for (const auto& s : r.changed_sections) {
    require(parse_section_name(s).has_value(), "changed_sections", "unknown section " + s);
  }
}

void validate(const DroppedTriple& r) {
  require_nonempty(r.game_id, "game_id");
  require_nonempty(r.review_id, "review_id");
  require_nonempty(r.reason, "reason");
}

}  // namespace vplay
