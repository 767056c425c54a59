#include "vplay/config.hpp"

#include <fstream>
#include <set>

#include "vplay/error.hpp"
#include "vplay/random.hpp"

namespace vplay {

const std::vector<std::string>& endpoint_roles() {
  static const std::vector<std::string> roles = {"structurer", "rectifier", "judge",     "embedder", "labeler",
                                                 "teacher",    "verifier",  "candidate", "evaluator"};
  return roles;
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

namespace {

// Reads one JSON object, recording the dotted path of every bad or unknown key.
class Section {
 public:
  Section(const Json* j, std::string path, std::vector<std::string>& bad) : j_(j), path_(std::move(path)), bad_(bad) {
    if (j_ && !j_->is_object()) {
      bad_.push_back(path_);
      j_ = nullptr;
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    const Json* c = (j_ && j_->contains(key)) ? &j_->at(key) : nullptr;
    return Section(c, full(key), bad_);
  }

  bool has(const std::string& key) const { return j_ && j_->contains(key); }
  bool present() const { return j_ != nullptr; }
  const Json* raw() const { return j_; }
  const std::string& path() const { return path_; }

  template <class T, class Check>
  void get(const std::string& key, T& out, Check ok) {
    seen_.insert(key);
    if (!has(key)) return;
    const auto& v = j_->at(key);
    try {
      T value = read<T>(v);
      if (!ok(value)) throw std::invalid_argument("range");
      out = value;
    } catch (const std::exception&) {
      bad_.push_back(full(key));
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    get(key, out, [](const T&) { return true; });
  }

  void require(const std::string& key) {
    if (!has(key)) bad_.push_back(full(key));
  }

  void finish() {
    if (!j_) return;
    for (const auto& [k, _] : j_->items()) {
      if (!seen_.count(k)) bad_.push_back(full(k));
    }
  }

 private:
  template <class T>
  static T read(const Json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("type");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw std::invalid_argument("type");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) throw std::invalid_argument("sign");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw std::invalid_argument("type");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      if (!v.is_string() || v.get<std::string>().empty()) throw std::invalid_argument("type");
      return std::filesystem::path(v.get<std::string>());
    } else {
      if (!v.is_string()) throw std::invalid_argument("type");
      return v.get<std::string>();
    }
  }

  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* j_;
  std::string path_;
  std::vector<std::string>& bad_;
  std::set<std::string> seen_;
};

auto positive = [](auto v) { return v > 0; };
auto non_negative = [](auto v) { return v >= 0; };

}  // namespace

RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
  std::vector<std::string> bad;
  RunConfig c;
  c.base_dir = base_dir;
  Section root(&j, "", bad);
  if (!root.present()) throw ConfigError("configuration must be a JSON object", {"$"});

  root.get("seed", c.seed);
  root.get("workdir", c.workdir);

  auto in = root.child("inputs");
  if (!in.present()) bad.push_back("inputs");
  in.require("games");
  in.require("raw_rulebooks");
  in.require("raw_reviews");
  in.get("games", c.games);
  in.get("raw_rulebooks", c.raw_rulebooks);
  in.get("raw_reviews", c.raw_reviews);
  std::filesystem::path tmp;
  if (in.has("merge_map")) {
    in.get("merge_map", tmp);
    c.merge_map = tmp;
  }
  if (in.has("training_ids")) {
    in.get("training_ids", tmp);
    c.training_ids = tmp;
  }
  in.finish();

  auto eps = root.child("endpoints");
  if (eps.present()) {
    for (const auto& role : endpoint_roles()) {
      if (!eps.has(role)) {
        eps.child(role);
        continue;
      }
      auto e = eps.child(role);
      EndpointConfig ep;
      e.require("base_url");
      e.require("model");
      e.get("base_url", ep.base_url);
      e.get("model", ep.model_name);
      e.get("api_key_env", ep.api_key_env);
      e.get("temperature", ep.temperature, non_negative);
      e.get("max_parallel", ep.max_parallel, positive);
      e.get("max_retries", ep.max_retries, non_negative);
      std::int64_t timeout_ms = ep.timeout.count();
      e.get("timeout_ms", timeout_ms, positive);
      ep.timeout = std::chrono::milliseconds(timeout_ms);
      e.finish();
      c.endpoints[role] = ep;
    }
    eps.finish();
  }

  auto an = root.child("annotate");
  an.get("batch_size", c.annotate.batch_size, positive);
  an.finish();

  auto sel = root.child("selection");
  sel.get("retention_ratio", c.selection.retention_ratio, [](double v) { return v > 0 && v <= 1; });
  sel.get("min_per_game", c.selection.min_per_game, positive);
  sel.get("max_per_game", c.selection.max_per_game, positive);
  sel.get("quality_threshold", c.selection.quality_threshold, [](int v) { return v >= 1 && v <= 5; });
  sel.get("rating_bins", c.selection.rating_bins, positive);
  sel.finish();
  if (c.selection.max_per_game < c.selection.min_per_game) bad.push_back("selection.max_per_game");

  auto cl = root.child("clustering");
  cl.get("k", c.k, positive);
  cl.get("n_init", c.clustering.n_init, positive);
  cl.get("max_iterations", c.clustering.max_iterations, positive);
  cl.get("tolerance", c.clustering.tolerance, positive);
  cl.get("per_cluster", c.per_cluster, positive);
  cl.finish();

  auto lb = root.child("labeling");
  lb.get("votes", c.labeling.votes, positive);
  lb.get("extra_votes", c.labeling.extra_votes, non_negative);
  lb.get("batch_size", c.labeling.batch_size, positive);
  lb.finish();

  auto ct = root.child("cot");
  ct.get("max_attempts", c.cot.max_attempts, positive);
  ct.get("rule_budget", c.cot.rule_budget, positive);
  ct.finish();

  auto sp = root.child("split");
  sp.get("per_stratum", c.per_stratum, positive);
  sp.finish();

  auto sim = root.child("simulation");
  sim.get("n_runs", c.simulation.n_runs, positive);
  std::string variant = std::string(simulator::variant_name(c.simulation.variant));
  sim.get("variant", variant, [](const std::string& v) { return simulator::parse_variant(v).has_value(); });
  if (auto v = simulator::parse_variant(variant)) c.simulation.variant = *v;
  if (sim.has("games")) {
    const auto& g = sim.raw()->at("games");
    if (g.is_array() && std::all_of(g.begin(), g.end(), [](const Json& x) { return x.is_string(); })) {
      c.simulation_games = g.get<std::vector<std::string>>();
    } else {
      bad.push_back("simulation.games");
    }
  }
  sim.child("games");
  sim.finish();

  auto ev = root.child("evaluation");
  ev.get("diversity_k", c.evaluation.diversity_k, positive);
  ev.get("mining_batch", c.evaluation.mining_batch, positive);
  ev.get("matching_batch", c.evaluation.matching_batch, positive);
  ev.finish();

  auto rb = root.child("rulebook");
  rb.get("max_tokens", c.max_tokens_rulebook, positive);
  rb.finish();

  root.finish();
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    std::string msg = "invalid configuration keys:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }

  c.annotate.seed = derive_seed(c.seed, "annotate");
  c.labeling.seed = derive_seed(c.seed, "label");
  c.cot.seed = derive_seed(c.seed, "synthesize");
  c.simulation.seed = derive_seed(c.seed, "simulate");
  c.evaluation.seed = derive_seed(c.seed, "evaluate");
  return c;
}

Json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), {"$"});
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_config_json(path), std::filesystem::absolute(path).parent_path());
}

}  // namespace vplay
