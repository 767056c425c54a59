#pragma once

// Shared domain types for every pipeline stage. All types are plain values;
// `validate()` overloads enforce the invariants and throw ValidationError
// naming the offending field.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vplay {

// ---- closed vocabularies ------------------------------------------------

enum class SectionKey : std::uint8_t {
  LoreObjective,
  Components,
  Setup,
  GameplayFlow,
  CoreMechanics,
  ScoringEndGame,
  FaqEdgeCases,
};

inline constexpr std::array<SectionKey, 7> kSectionKeys = {
    SectionKey::LoreObjective, SectionKey::Components,    SectionKey::Setup,
    SectionKey::GameplayFlow,  SectionKey::CoreMechanics, SectionKey::ScoringEndGame,
    SectionKey::FaqEdgeCases,
};

inline constexpr std::string_view kNotMentioned = "Not Mentioned";

std::string_view section_name(SectionKey key);
std::optional<SectionKey> parse_section_name(std::string_view name);

enum class Facet : std::uint8_t {
  RuleClarity,
  CognitiveLoad,
  InteractionConflict,
  LuckStrategy,
  BalanceFairness,
  ReplayabilityVariety,
  ThematicIntegration,
  PacingFlow,
};

inline constexpr std::array<Facet, 8> kFacets = {
    Facet::RuleClarity,         Facet::CognitiveLoad,       Facet::InteractionConflict,
    Facet::LuckStrategy,        Facet::BalanceFairness,     Facet::ReplayabilityVariety,
    Facet::ThematicIntegration, Facet::PacingFlow,
};

std::string_view facet_name(Facet f);
std::optional<Facet> parse_facet(std::string_view name);

enum class Persona : std::uint8_t {
  SystemPurist,
  EfficiencyEssentialist,
  NarrativeArchitect,
  SocialLubricator,
  ThrillSeeker,
};

// Canonical order; used for every persona tie-break.
inline constexpr std::array<Persona, 5> kPersonas = {
    Persona::SystemPurist, Persona::EfficiencyEssentialist, Persona::NarrativeArchitect,
    Persona::SocialLubricator, Persona::ThrillSeeker,
};

std::string_view persona_name(Persona p);
std::optional<Persona> parse_persona(std::string_view name);

// A persona label. nullopt is the explicit "Unassigned" sentinel produced only by
// the labeling tie-break path; it is never a simulation target.
using PersonaLabel = std::optional<Persona>;
inline constexpr std::string_view kUnassigned = "Unassigned";
std::string_view persona_label_name(const PersonaLabel& label);

enum class FactStatus : std::uint8_t { Supported, Inferred, Contradicted };
std::string_view fact_status_name(FactStatus s);
std::optional<FactStatus> parse_fact_status(std::string_view name);

// ---- records ------------------------------------------------------------

struct GameRecord {
  std::string game_id;
  std::string title;
  double weight = 1.0;       // BGG weight, [1, 5]
  double avg_rating = 1.0;   // [1, 10]
  int year = 0;
  std::optional<int> rank;   // positive when present
  std::set<std::string> mechanics;
  std::set<std::string> themes;

  bool operator==(const GameRecord&) const = default;
};

struct RulebookSection {
  SectionKey key = SectionKey::LoreObjective;
  std::string text;

  bool operator==(const RulebookSection&) const = default;
};

struct StructuredRulebook {
  std::string game_id;
  std::vector<RulebookSection> sections;  // canonical order once validated
  std::string source_hash;                // sha256 of the raw source markdown

  // Body of the first section with `key`; throws std::out_of_range when absent.
  const std::string& section(SectionKey key) const;
  // "## N. Header" rendering of every section in stored order.
  std::string to_markdown() const;

  bool operator==(const StructuredRulebook&) const = default;
};

struct RawReview {
  std::string review_id;
  std::string game_id;
  double rating = 1.0;  // normalized [1.0, 10.0]
  std::string text;
  std::string source;

  bool operator==(const RawReview&) const = default;
};

struct QualityAnnotation {
  bool is_valid = false;
  std::optional<std::string> filter_reason;
  int mechanism_anchoring = 1;
  int causal_attribution = 1;
  int constructiveness = 1;
  std::set<Facet> facets;

  double mean_score() const {
    return (mechanism_anchoring + causal_attribution + constructiveness) / 3.0;
  }
  bool operator==(const QualityAnnotation&) const = default;
};

struct AnnotatedReview {
  RawReview review;
  QualityAnnotation annotation;

  bool operator==(const AnnotatedReview&) const = default;
};

struct CuratedReview {
  RawReview review;
  QualityAnnotation annotation;
  PersonaLabel persona;

  bool operator==(const CuratedReview&) const = default;
};

struct PersonaProfile {
  Persona name = Persona::SystemPurist;
  std::string profile_text;

  bool operator==(const PersonaProfile&) const = default;
};

struct MdaChain {
  std::string content_extraction;   // Mechanics: the what
  std::string dynamic_interaction;  // Dynamics: the how
  std::string experience_outcome;   // Aesthetics: the feel

  bool operator==(const MdaChain&) const = default;
};

struct SimulatedReview {
  std::string game_id;
  Persona persona = Persona::SystemPurist;
  int rating = 1;  // [1, 10]
  std::string review;
  std::optional<MdaChain> chain;
  int run_index = 0;

  bool operator==(const SimulatedReview&) const = default;
};

// Fixed delimiters separating the reasoning chain from the critique in SFT targets.
inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

struct SftRecord {
  std::string game_id;
  std::string review_id;
  Persona persona = Persona::SystemPurist;
  std::string system_text;
  std::string user_text;
  std::string target_text;

  bool operator==(const SftRecord&) const = default;
};

// Pipeline artifacts outside the core domain types that share the record layer.
struct EmbeddingRecord {
  std::string review_id;
  std::string composite;
  std::vector<double> vector;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct RectificationDiff {
  std::string game_id;
  std::vector<std::string> changed_sections;

  bool operator==(const RectificationDiff&) const = default;
};

struct DroppedTriple {
  std::string game_id;
  std::string review_id;
  std::string reason;
  int attempts = 0;

  bool operator==(const DroppedTriple&) const = default;
};

void validate(const GameRecord& r);
void validate(const StructuredRulebook& r);
void validate(const RawReview& r);
void validate(const QualityAnnotation& a);
void validate(const AnnotatedReview& r);
void validate(const CuratedReview& r);
void validate(const PersonaProfile& p);
void validate(const MdaChain& c);
void validate(const SimulatedReview& r);
void validate(const SftRecord& r);
void validate(const EmbeddingRecord& r);
void validate(const RectificationDiff& r);
void validate(const DroppedTriple& r);

// Throws ValidationError unless every game_id is unique.
void validate_unique_ids(const std::vector<GameRecord>& games);

}  // namespace vplay
