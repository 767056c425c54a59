#pragma once

// MDA chain reconstruction, verifier-gated filtration and SFT export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vplay/datamodel.hpp"

namespace vplay {
class Gateway;
}

namespace vplay::cot {

struct VerifierVerdict {
  bool pass = false;
  std::string reason;
  std::optional<std::string> suggestion;

  bool operator==(const VerifierVerdict&) const = default;
};

void validate(const VerifierVerdict& v);

struct CotOptions {
  int max_attempts = 3;
  std::size_t rule_budget = 24000;  // characters of rulebook kept in prompts
  std::uint64_t seed = 0;
  int max_tokens = 2048;
};

// Structured rulebook Markdown cut from the tail to at most `budget` bytes.
std::string rule_excerpt(const StructuredRulebook& rulebook, std::size_t budget);

struct Triple {
  const GameRecord* game = nullptr;  // optional; supplies the title
  const StructuredRulebook* rulebook = nullptr;
  PersonaProfile persona;
  CuratedReview review;
};

// Throws ValidationError when the review does not belong to the rulebook's game
// or its persona label differs from `persona`.
void check_triple(const Triple& t);

// Optional feedback from a rejected attempt is appended as a revision note.
MdaChain synthesize_chain(const Triple& triple, Gateway& teacher, const CotOptions& options,
                          const std::optional<VerifierVerdict>& feedback = std::nullopt, int attempt = 0);

// A reply without a usable verdict after one re-query is a REJECT "judge failure".
VerifierVerdict verify_chain(const MdaChain& chain, const CuratedReview& review, Gateway& verifier,
                             const CotOptions& options, int attempt = 0);

// Integer critique rating: half-up rounding, clamped to [1, 10].
int critique_rating(double rating);

// The think block followed by the critique JSON.
std::string target_text(const MdaChain& chain, Persona persona, int rating, const std::string& review);

// Splits a target (or a generation) into the chain and the text after the think block.
std::optional<std::pair<MdaChain, std::string>> split_think(std::string_view text);

SftRecord build_record(const Triple& triple, const MdaChain& chain, std::size_t rule_budget = 24000);

struct FiltrationOutcome {
  std::optional<SftRecord> record;
  std::optional<DroppedTriple> dropped;
  int synthesize_calls = 0;
  int verify_calls = 0;
  std::vector<VerifierVerdict> verdicts;
};

FiltrationOutcome filtration_loop(const Triple& triple, Gateway& teacher, Gateway& verifier,
                                  const CotOptions& options = {});

struct FiltrationRun {
  std::vector<SftRecord> accepted;
  std::vector<DroppedTriple> dropped;
  std::size_t synthesize_calls = 0;
  std::size_t verify_calls = 0;
};

// Runs every triple concurrently; output keeps input order.
FiltrationRun run_filtration(const std::vector<Triple>& triples, Gateway& teacher, Gateway& verifier,
                             const CotOptions& options = {});

// Training hyperparameters written to the manifest, in file order.
std::vector<std::pair<std::string, std::string>> manifest_entries();

// Writes the chat corpus ({"system","user","assistant"} per line) and the
// key-value manifest. Returns the number of records written.
std::size_t export_sft(const std::vector<SftRecord>& records, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& manifest_path);

// "key = value" lines in file order.
std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path);

}  // namespace vplay::cot
