#pragma once

// Stage orchestration: every pipeline step reads and writes artifacts under
// the run's workdir and appends a machine-readable summary.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vplay/config.hpp"
#include "vplay/gateway.hpp"

namespace vplay::stages {

// Stage names in chain order.
const std::vector<std::string>& stage_names();

// Endpoint roles a stage calls.
std::vector<std::string> stage_roles(const std::string& stage);

using TransportFactory = std::function<std::shared_ptr<Transport>(const std::string& role, const EndpointConfig&)>;

struct StageOptions {
  bool force = false;
  TransportFactory transport;                    // defaults to make_transport
  std::function<void(const std::string&)> log;   // progress lines
};

struct StageResult {
  std::string stage;
  std::string status;  // "ok", "skipped" or "failed"
  std::map<std::string, std::int64_t> counts;
  std::vector<std::string> errors;
  std::map<std::string, std::string> outputs;  // path relative to workdir -> sha256
};

// Throws UsageError for an unknown stage and ConfigError when a required
// endpoint or input path is missing. Those checks happen before any request.
StageResult run_stage(const std::string& stage, const RunConfig& config, const StageOptions& options = {});

// The whole chain; stops at the first failed stage.
std::vector<StageResult> run_all(const RunConfig& config, const StageOptions& options = {});

// sha256 of every artifact under the workdir except audit logs and stage summaries.
std::map<std::string, std::string> artifact_digests(const RunConfig& config);

// Machine-readable summary line of a stage result.
Json summary_json(const StageResult& r);

}  // namespace vplay::stages
