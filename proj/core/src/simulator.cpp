#include "vplay/simulator.hpp"

#include <numeric>

#include "vplay/apportion.hpp"
#include "vplay/cot.hpp"
#include "vplay/error.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/parallel.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/text.hpp"

namespace vplay::simulator {

namespace {
constexpr std::array<std::string_view, 4> kVariantNames = {"Full", "NoMDA", "NoPersona", "NoRulebook"};
constexpr std::string_view kGenericPlayer = "a board game player";
}  // namespace

std::string_view variant_name(Variant v) { return kVariantNames.at(static_cast<std::size_t>(v)); }

std::optional<Variant> parse_variant(std::string_view name) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (text::iequals(name, kVariantNames[i])) return static_cast<Variant>(i);
  }
  return std::nullopt;
}

void validate(const SimulationSpec& s) {
  if (s.n_runs < 1) throw ValidationError("n_runs", "n_runs must be positive");
  if (s.fresh_retries < 0) throw ValidationError("fresh_retries", "fresh_retries must be non-negative");
}

Quotas allocate_personas(const Quotas& empirical_counts, std::int64_t n) {
  std::vector<std::int64_t> counts;
  for (auto p : kPersonas) {
    auto it = empirical_counts.find(p);
    counts.push_back(it == empirical_counts.end() ? 0 : it->second);
  }
  const auto q = largest_remainder(counts, n);
  Quotas out;
  for (std::size_t i = 0; i < kPersonas.size(); ++i) out[kPersonas[i]] = q[i];
  return out;
}

std::vector<Persona> run_order(const Quotas& quotas, std::uint64_t seed, const std::string& game_id) {
  std::vector<Persona> order;
  for (const auto& [p, n] : quotas) order.insert(order.end(), static_cast<std::size_t>(n), p);
  Rng rng(derive_seed(seed, "run-order:" + game_id));
  rng.shuffle(order);
  return order;
}

ChatRequest simulation_request(const GameRecord& game, const StructuredRulebook& rulebook,
                               const PersonaProfile& persona, const SimulationSpec& spec, int run_index,
                               int attempt) {
  const bool no_persona = spec.variant == Variant::NoPersona;
  const std::string name = no_persona ? std::string(kGenericPlayer) : std::string(persona_name(persona.name));
  const std::string rules = spec.variant == Variant::NoRulebook ? std::string() : rulebook.to_markdown();
  ChatRequest req;
  req.messages = {
      {"system", no_persona ? std::string(prompts::kNoPersonaSystem)
                            : prompts::simulation_system(name, persona.profile_text)},
      {"user", prompts::simulation_user(name, game.title, rules, spec.variant == Variant::Full)}};
  req.max_tokens = spec.max_tokens;
  req.seed = derive_seed(spec.seed, "simulate:" + game.game_id + ":" + std::to_string(run_index) + ":" +
                                        std::to_string(attempt));
  req.tag = "simulate:" + game.game_id + ":r" + std::to_string(run_index) + ":a" + std::to_string(attempt);
  return req;
}

SimulatedReview parse_generation(std::string_view reply, const std::string& game_id, Persona persona,
                                 int run_index, Variant variant) {
  SimulatedReview r;
  r.game_id = game_id;
  r.persona = persona;
  r.run_index = run_index;
  std::string_view critique = reply;
  std::string rest;
  if (variant == Variant::Full) {
    auto split = cot::split_think(reply);
    if (!split) throw ParseError("generation lacks a think block");
    const auto& c = split->first;
    if (c.content_extraction.empty() || c.dynamic_interaction.empty() || c.experience_outcome.empty()) {
      throw SchemaError("think block lacks one of the three reasoning lines");
    }
    r.chain = c;
    rest = split->second;
    critique = rest;
  }
  const auto shape = Shape::object({{"persona", Shape::string(), false},
                                    {"rating", Shape::integer(1, 10)},
                                    {"review", Shape::string(true)}});
  const auto j = extract_json(critique, shape);
  r.rating = j.at("rating").get<int>();
  r.review = j.at("review").get<std::string>();
  return r;
}

GameSimulation simulate_game(const GameRecord& game, const StructuredRulebook& rulebook, const Quotas& quotas,
                             const SimulationSpec& spec, Gateway& gateway,
                             const std::vector<PersonaProfile>& profiles) {
  validate(spec);
  if (game.game_id != rulebook.game_id) throw ValidationError("game_id", "rulebook belongs to another game");
  std::int64_t total = 0;
  for (const auto& [p, n] : quotas) {
    if (n < 0) throw ValidationError("quotas", "negative quota");
    total += n;
  }
  if (total != spec.n_runs) {
    throw ValidationError("quotas", "quotas sum to " + std::to_string(total) + ", expected " +
                                        std::to_string(spec.n_runs));
  }
  std::map<Persona, const PersonaProfile*> by_name;
  for (const auto& p : profiles) by_name[p.name] = &p;
  for (const auto& [p, n] : quotas) {
    if (n > 0 && !by_name.count(p)) {
      throw ValidationError("profiles", "no profile for " + std::string(persona_name(p)));
    }
  }
  const auto order = run_order(quotas, spec.seed, game.game_id);
  std::vector<std::optional<SimulatedReview>> results(order.size());
  std::vector<std::string> errors(order.size());
  parallel_for(order.size(), static_cast<std::size_t>(gateway.config().max_parallel), [&](std::size_t i) {
    const int run = static_cast<int>(i);
    const auto& profile = *by_name.at(order[i]);
    for (int attempt = 0; attempt <= spec.fresh_retries && !results[i]; ++attempt) {
      auto req = simulation_request(game, rulebook, profile, spec, run, attempt);
      for (int pass = 0; pass < 2; ++pass) {
        try {
          results[i] = parse_generation(gateway.chat(req).text, game.game_id, order[i], run, spec.variant);
          break;
        } catch (const ParseError& e) {
          errors[i] = e.what();
        } catch (const SchemaError& e) {
          errors[i] = e.what();
        }
        req.messages.back().content +=
            "\n\nReminder: your previous output was invalid. Output the JSON object exactly as specified, "
            "with an integer rating from 1 to 10.";
        req.tag += ":requery";
      }
    }
  });
  GameSimulation out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (results[i]) out.reviews.push_back(std::move(*results[i]));
    else out.failures.push_back({game.game_id, static_cast<int>(i), order[i], errors[i]});
  }
  return out;
}

}  // namespace vplay::simulator
