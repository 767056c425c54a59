#pragma once

// Prompt templates for every model-backed stage. Placeholders use `{name}` and
// are filled with text::fill.

#include <string>
#include <string_view>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay::prompts {

// Rulebook structuring. System text ends right before the raw input.
extern const std::string_view kStructureSystem;
extern const std::string_view kStructureUser;  // {RAW_MARKDOWN_CONTENT}

// Rulebook rectification.
extern const std::string_view kRectifySystem;
extern const std::string_view kRectifyUser;  // {RAW_SOURCE_TEXT}, {QWEN_GENERATED_STRUCT}

// Review quality scoring; the user part carries the batch.
extern const std::string_view kQualitySystem;
extern const std::string_view kQualityUser;  // {batch_size}, {reviews_json}

// Cluster profiling; samples go between the two halves.
extern const std::string_view kProfileHead;
extern const std::string_view kProfileTail;

// Persona labeling.
extern const std::string_view kLabelSystem;  // {PERSONA_DEFINITIONS}
extern const std::string_view kLabelUser;    // {batch_size}, {reviews_json}

// MDA chain synthesis and verification.
extern const std::string_view kSynthesisSystem;
extern const std::string_view kSynthesisUser;  // {rule_content}, {persona_def}, {review_text}
extern const std::string_view kVerifierSystem;
extern const std::string_view kVerifierUser;   // {review_text}, {rating}, {generated_json}

// Persona-conditioned simulation.
extern const std::string_view kSimulationSystem;  // {target_persona}, {p_def}
extern const std::string_view kSimulationUser;    // {target_persona}, {game_title}, {rules_block}
extern const std::string_view kNoPersonaSystem;
extern const std::string_view kThinkInstruction;  // appended to the user message for Full

// Evaluation judges.
extern const std::string_view kFactSystem;
extern const std::string_view kFactUser;  // {rulebook_text}, {review_text}
extern const std::string_view kDiversitySystem;  // {batch_len}
extern const std::string_view kDiversityUser;    // {game_id}, {persona}, {batch_len}, {reviews_text_block}
extern const std::string_view kMiningSystem;     // {persona}
extern const std::string_view kMiningUser;       // {game_id}, {persona}, {existing_points_text}, {new_reviews_text}
extern const std::string_view kMatchingSystem;   // {game_id}, {persona}
extern const std::string_view kMatchingUser;     // {checklist_text}, {reviews_text}

// Rendered simulation prompts. `rules` empty leaves the rules block out; `think`
// appends the reasoning instruction.
std::string simulation_system(std::string_view persona, std::string_view profile_text);
std::string simulation_user(std::string_view persona, std::string_view title, std::string_view rules, bool think);

// Full behavioural profile text of a canonical persona.
std::string_view persona_definition(Persona p);

// Definitions rendered as the labeling prompt's persona block.
std::string persona_definitions_block();
std::string persona_definitions_block(const std::vector<PersonaProfile>& profiles);

}  // namespace vplay::prompts
