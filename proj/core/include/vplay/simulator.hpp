#pragma once

// Persona-conditioned playtest simulation with quota-matched persona counts
// and the ablation variants.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplay/datamodel.hpp"
#include "vplay/gateway.hpp"

namespace vplay::simulator {

enum class Variant { Full, NoMDA, NoPersona, NoRulebook };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct SimulationSpec {
  int n_runs = 100;
  Variant variant = Variant::Full;
  std::uint64_t seed = 0;
  int max_tokens = 2048;
  int fresh_retries = 3;  // fresh requests after the first one fails twice
};

void validate(const SimulationSpec& s);

using Quotas = std::map<Persona, std::int64_t>;

// Largest-remainder quotas over the canonical persona order; sums to n and
// leaves zero-count personas at zero.
Quotas allocate_personas(const Quotas& empirical_counts, std::int64_t n);

// Persona of every run: a seeded shuffle of the quota multiset.
std::vector<Persona> run_order(const Quotas& quotas, std::uint64_t seed, const std::string& game_id);

// The request of one run attempt.
ChatRequest simulation_request(const GameRecord& game, const StructuredRulebook& rulebook,
                               const PersonaProfile& persona, const SimulationSpec& spec, int run_index,
                               int attempt);

// Parses one generation. For Full the reply must open with a think block.
// Throws ParseError / SchemaError.
SimulatedReview parse_generation(std::string_view reply, const std::string& game_id, Persona persona,
                                 int run_index, Variant variant);

struct RunFailure {
  std::string game_id;
  int run_index = 0;
  Persona persona = Persona::SystemPurist;
  std::string reason;
};

struct GameSimulation {
  std::vector<SimulatedReview> reviews;  // by run_index; failed runs are absent
  std::vector<RunFailure> failures;
};

// `profiles` are looked up by persona name. Requires quotas to sum to n_runs.
GameSimulation simulate_game(const GameRecord& game, const StructuredRulebook& rulebook, const Quotas& quotas,
                             const SimulationSpec& spec, Gateway& gateway,
                             const std::vector<PersonaProfile>& profiles);

}  // namespace vplay::simulator
