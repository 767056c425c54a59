#pragma once

// The single run configuration (JSON) shared by every stage.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vplay/cot.hpp"
#include "vplay/gateway.hpp"
#include "vplay/judges.hpp"
#include "vplay/personas.hpp"
#include "vplay/reviews.hpp"
#include "vplay/simulator.hpp"

namespace vplay {

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against the config file's directory
  std::uint64_t seed = 0;
  std::filesystem::path workdir = "run";

  // inputs
  std::filesystem::path games;
  std::filesystem::path raw_rulebooks;  // directory of <game_id>.md
  std::filesystem::path raw_reviews;
  std::optional<std::filesystem::path> merge_map;
  std::optional<std::filesystem::path> training_ids;

  // endpoint role -> config; roles: structurer rectifier judge embedder labeler teacher verifier candidate evaluator
  std::map<std::string, EndpointConfig> endpoints;

  reviews::AnnotateOptions annotate;
  reviews::SelectionConfig selection;
  int k = 15;
  personas::ClusterOptions clustering;
  std::size_t per_cluster = 20;
  personas::LabelOptions labeling;
  cot::CotOptions cot;
  std::size_t per_stratum = 2;
  simulator::SimulationSpec simulation;
  std::vector<std::string> simulation_games;  // empty: test split, else every structured game
  judges::JudgeOptions evaluation;
  int max_tokens_rulebook = 8192;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path artifact(const std::string& name) const { return resolve(workdir) / name; }
};

// Strict parse: unknown or ill-typed keys throw ConfigError listing every offender.
RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
Json read_config_json(const std::filesystem::path& path);

// Known endpoint roles, in documentation order.
const std::vector<std::string>& endpoint_roles();

}  // namespace vplay
