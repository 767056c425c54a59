// vplay: command-line driver for the playtest pipeline.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "vplay/config.hpp"
#include "vplay/error.hpp"
#include "vplay/stages.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> endpoint;
  std::optional<std::string> variant;
  std::optional<int> n_runs;
  std::optional<std::string> workdir;
};

// Flags win over config keys; the result is re-validated like the file itself.
vplay::RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  auto j = vplay::read_config_json(path);
  if (o.seed) j["seed"] = *o.seed;
  if (o.workdir) j["workdir"] = *o.workdir;
  if (o.endpoint) j["endpoints"]["candidate"]["base_url"] = *o.endpoint;
  if (o.variant) j["simulation"]["variant"] = *o.variant;
  if (o.n_runs) j["simulation"]["n_runs"] = *o.n_runs;
  return vplay::parse_config(j, std::filesystem::absolute(path).parent_path());
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--endpoint", o.endpoint, "Base URL of the candidate (simulation) endpoint");
  cmd->add_option("--variant", o.variant, "Simulation variant: Full, NoMDA, NoPersona, NoRulebook");
  cmd->add_option("--n-runs", o.n_runs, "Simulated reviews per game");
  cmd->add_option("--workdir", o.workdir, "Artifact directory");
}

int print(const vplay::stages::StageResult& r) {
  std::cout << vplay::stages::summary_json(r).dump() << "\n";
  return r.status == "failed" ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vplay: virtual playtester pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  bool quiet = false;
  Overrides o;

  std::string stage;
  auto* run = app.add_subcommand("run", "Run one stage");
  run->add_option("stage", stage, "Stage name")->required();
  run->add_option("--config,-c", config_path, "Run configuration (JSON)")->required();
  run->add_flag("--force", force, "Re-run even when inputs are unchanged");
  run->add_flag("--quiet,-q", quiet, "No progress lines");
  add_overrides(run, o);

  auto* all = app.add_subcommand("run-all", "Run every stage in order");
  all->add_option("--config,-c", config_path, "Run configuration (JSON)")->required();
  all->add_flag("--force", force, "Re-run even when inputs are unchanged");
  all->add_flag("--quiet,-q", quiet, "No progress lines");
  add_overrides(all, o);

  auto* digests = app.add_subcommand("digests", "Print sha256 of every artifact in the workdir");
  digests->add_option("--config,-c", config_path, "Run configuration (JSON)")->required();
  digests->add_option("--workdir", o.workdir, "Artifact directory");

  auto* stages_cmd = app.add_subcommand("stages", "List stage names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stages_cmd->parsed()) {
      for (const auto& s : vplay::stages::stage_names()) std::cout << s << "\n";
      return 0;
    }
    const auto config = load_with_overrides(config_path, o);
    vplay::stages::StageOptions opts;
    opts.force = force;
    if (!quiet) opts.log = [](const std::string& line) { std::cerr << line << "\n"; };

    if (digests->parsed()) {
      for (const auto& [name, sha] : vplay::stages::artifact_digests(config)) std::cout << sha << "  " << name << "\n";
      return 0;
    }
    if (run->parsed()) return print(vplay::stages::run_stage(stage, config, opts));
    int rc = 0;
    for (const auto& r : vplay::stages::run_all(config, opts)) rc |= print(r);
    return rc;
  } catch (const vplay::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const vplay::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
