#include "vplay/stages.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <mutex>
#include <set>
#include <sstream>

#include "vplay/cot.hpp"
#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/parallel.hpp"
#include "vplay/personas.hpp"
#include "vplay/report.hpp"
#include "vplay/reviews.hpp"
#include "vplay/rulebook.hpp"
#include "vplay/simulator.hpp"
#include "vplay/split.hpp"
#include "vplay/text.hpp"

namespace fs = std::filesystem;

namespace vplay::stages {

namespace {

constexpr const char* kDraft = "rulebooks_draft.jsonl";
constexpr const char* kRulebooks = "rulebooks.jsonl";
constexpr const char* kDiffs = "rectification_diffs.jsonl";
constexpr const char* kAnnotated = "annotated_reviews.jsonl";
constexpr const char* kCurated = "curated_reviews.jsonl";
constexpr const char* kEmbeddings = "embeddings.jsonl";
constexpr const char* kClusters = "clusters.json";
constexpr const char* kLabeled = "labeled_reviews.jsonl";
constexpr const char* kSftRecords = "sft_records.jsonl";
constexpr const char* kDropped = "dropped_triples.jsonl";
constexpr const char* kTestSplit = "test_split.txt";

std::string variant_tag(const RunConfig& c) { return std::string(simulator::variant_name(c.simulation.variant)); }
std::string simulated_name(const RunConfig& c) { return "simulated_" + variant_tag(c) + ".jsonl"; }
std::string eval_name(const RunConfig& c) { return "eval_" + variant_tag(c) + ".json"; }

bool variant_scoped(const std::string& stage) { return stage == "simulate" || stage == "evaluate"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << data;
  if (!out) throw IoError("write failed: " + p.string());
}

std::vector<std::string> read_id_lines(const fs::path& p) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(read_file(p))) {
    auto s = text::trim(line);
    if (!s.empty() && s[0] != '#') out.push_back(std::move(s));
  }
  return out;
}

std::string num(double v) { return text::format_number(v); }

Json endpoint_json(const EndpointConfig& e) {
  return {{"base_url", e.base_url},   {"model", e.model_name},   {"temperature", e.temperature},
          {"max_retries", e.max_retries}, {"api_key_env", e.api_key_env}};
}

// Knobs a stage's output depends on; part of the resumability key.
Json stage_config(const std::string& stage, const RunConfig& c) {
  Json j{{"seed", c.seed}};
  for (const auto& role : stage_roles(stage)) {
    if (c.endpoints.count(role)) j["endpoints"][role] = endpoint_json(c.endpoints.at(role));
  }
  if (stage == "structure" || stage == "rectify") j["max_tokens"] = c.max_tokens_rulebook;
  if (stage == "annotate") j["batch_size"] = c.annotate.batch_size;
  if (stage == "select") {
    const auto& s = c.selection;
    j["selection"] = {{"retention_ratio", s.retention_ratio}, {"min", s.min_per_game}, {"max", s.max_per_game},
                      {"threshold", s.quality_threshold},     {"bins", s.rating_bins}};
  }
  if (stage == "cluster") {
    j["k"] = c.k;
    j["n_init"] = c.clustering.n_init;
    j["max_iterations"] = c.clustering.max_iterations;
    j["tolerance"] = c.clustering.tolerance;
  }
  if (stage == "profile") j["per_cluster"] = c.per_cluster;
  if (stage == "label") {
    j["votes"] = c.labeling.votes;
    j["extra_votes"] = c.labeling.extra_votes;
    j["batch_size"] = c.labeling.batch_size;
  }
  if (stage == "synthesize") {
    j["max_attempts"] = c.cot.max_attempts;
    j["rule_budget"] = c.cot.rule_budget;
  }
  if (stage == "split") j["per_stratum"] = c.per_stratum;
  if (stage == "simulate") {
    j["n_runs"] = c.simulation.n_runs;
    j["variant"] = variant_tag(c);
    j["games"] = c.simulation_games;
    j["fresh_retries"] = c.simulation.fresh_retries;
  }
  if (stage == "evaluate") {
    j["variant"] = variant_tag(c);
    j["diversity_k"] = c.evaluation.diversity_k;
    j["mining_batch"] = c.evaluation.mining_batch;
    j["matching_batch"] = c.evaluation.matching_batch;
  }
  return j;
}

// ---- stage context ------------------------------------------------------------

class Context {
 public:
  Context(const std::string& stage, const RunConfig& cfg, const StageOptions& opt)
      : stage(stage), cfg(cfg), opt(opt), work(cfg.resolve(cfg.workdir)) {}

  const std::string stage;
  const RunConfig& cfg;
  const StageOptions& opt;
  const fs::path work;
  std::shared_ptr<AuditLog> audit;
  StageResult result;

  Gateway& gateway(const std::string& role) {
    auto it = gateways_.find(role);
    if (it != gateways_.end()) return *it->second;
    EndpointConfig ec = cfg.endpoints.at(role);
    constexpr std::string_view kScript = "mock:script:";
    if (ec.base_url.rfind(kScript, 0) == 0) {
      ec.base_url = std::string(kScript) + cfg.resolve(ec.base_url.substr(kScript.size())).string();
    }
    auto transport = opt.transport ? opt.transport(role, ec) : make_transport(ec);
    GatewayOptions go;
    go.audit = audit;
    go.role = role;
    go.jitter_seed = derive_seed(cfg.seed, "jitter:" + role);
    auto gw = std::make_unique<Gateway>(ec, std::move(transport), go);
    auto& ref = *gw;
    gateways_[role] = std::move(gw);
    return ref;
  }

  fs::path in(const std::string& name) const { return work / name; }

  fs::path out(const std::string& name) {
    outputs_.push_back(name);
    return work / name;
  }

  void log(const std::string& line) const {
    if (opt.log) opt.log(stage + ": " + line);
  }

  void finish_outputs() {
    for (const auto& name : outputs_) result.outputs[name] = sha256_file(work / name);
  }

  std::size_t requests() const {
    std::size_t n = 0;
    for (const auto& [_, g] : gateways_) n += g->wire_requests();
    return n;
  }

 private:
  std::map<std::string, std::unique_ptr<Gateway>> gateways_;
  std::vector<std::string> outputs_;
};

std::vector<GameRecord> load_games(const RunConfig& c) {
  auto games = load_records<GameRecord>(c.resolve(c.games));
  validate_unique_ids(games);
  return games;
}

fs::path raw_rulebook_path(const RunConfig& c, const std::string& game_id) {
  return c.resolve(c.raw_rulebooks) / (game_id + ".md");
}

std::map<std::string, StructuredRulebook> rulebook_map(const fs::path& p) {
  std::map<std::string, StructuredRulebook> out;
  for (auto& r : load_records<StructuredRulebook>(p)) out[r.game_id] = std::move(r);
  return out;
}

std::vector<std::string> simulation_game_ids(const RunConfig& c, const std::map<std::string, StructuredRulebook>& rb) {
  if (!c.simulation_games.empty()) return c.simulation_games;
  const auto split = c.artifact(kTestSplit);
  if (fs::exists(split)) return read_id_lines(split);
  std::vector<std::string> all;
  for (const auto& [id, _] : rb) all.push_back(id);
  return all;
}

// Logical name -> file, for every input a stage reads. Missing files raise
// before any endpoint is touched.
std::vector<std::pair<std::string, fs::path>> stage_inputs(const std::string& stage, const RunConfig& c) {
  std::vector<std::pair<std::string, fs::path>> in;
  auto art = [&](const std::string& name) { in.emplace_back(name, c.artifact(name)); };
  auto games = [&] { in.emplace_back("inputs.games", c.resolve(c.games)); };
  if (stage == "structure") {
    games();
    if (fs::exists(c.resolve(c.games))) {
      for (const auto& g : load_games(c)) {
        in.emplace_back("inputs.raw_rulebooks/" + g.game_id + ".md", raw_rulebook_path(c, g.game_id));
      }
    }
  } else if (stage == "rectify") {
    art(kDraft);
    if (fs::exists(c.artifact(kDraft))) {
      for (const auto& d : load_records<StructuredRulebook>(c.artifact(kDraft))) {
        in.emplace_back("inputs.raw_rulebooks/" + d.game_id + ".md", raw_rulebook_path(c, d.game_id));
      }
    }
  } else if (stage == "annotate") {
    games();
    in.emplace_back("inputs.raw_reviews", c.resolve(c.raw_reviews));
  } else if (stage == "select") {
    art(kAnnotated);
  } else if (stage == "embed") {
    art(kCurated);
  } else if (stage == "cluster") {
    art(kEmbeddings);
  } else if (stage == "profile") {
    art(kClusters);
    art(kEmbeddings);
    art(kCurated);
    if (c.merge_map) in.emplace_back("inputs.merge_map", c.resolve(*c.merge_map));
  } else if (stage == "label") {
    art(kCurated);
  } else if (stage == "synthesize") {
    games();
    art(kLabeled);
    art(kRulebooks);
  } else if (stage == "export-sft") {
    art(kSftRecords);
  } else if (stage == "split") {
    games();
    if (c.training_ids) in.emplace_back("inputs.training_ids", c.resolve(*c.training_ids));
  } else if (stage == "simulate") {
    games();
    art(kRulebooks);
    art(kLabeled);
    if (c.simulation_games.empty() && fs::exists(c.artifact(kTestSplit))) art(kTestSplit);
  } else if (stage == "evaluate") {
    art(simulated_name(c));
    art(kLabeled);
    art(kRulebooks);
  } else if (stage == "report") {
    const auto dir = c.resolve(c.workdir);
    std::vector<std::string> names;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        const auto n = e.path().filename().string();
        if (n.rfind("eval_", 0) == 0 && e.path().extension() == ".json") names.push_back(n);
      }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) in.emplace_back("eval_<variant>.json", dir / "eval_<variant>.json");
    for (const auto& n : names) art(n);
  }
  return in;
}

// ---- stage bodies -------------------------------------------------------------

void do_structure(Context& x) {
  const auto games = load_games(x.cfg);
  auto& gw = x.gateway("structurer");
  std::vector<std::optional<StructuredRulebook>> docs(games.size());
  std::vector<std::string> errors(games.size());
  parallel_for(games.size(), static_cast<std::size_t>(gw.config().max_parallel), [&](std::size_t i) {
    const auto& id = games[i].game_id;
    try {
      docs[i] = rulebook::structure_rulebook(read_file(raw_rulebook_path(x.cfg, id)), id, gw,
                                             {x.cfg.max_tokens_rulebook, derive_seed(x.cfg.seed, "structure:" + id)});
    } catch (const StructuringError& e) {
      errors[i] = std::string(e.what()) + " [" + text::join(e.missing_headers(), "; ") + "]";
    }
  });
  std::vector<StructuredRulebook> ok;
  std::vector<std::vector<std::string>> fails;
  for (std::size_t i = 0; i < games.size(); ++i) {
    if (docs[i]) {
      ok.push_back(std::move(*docs[i]));
    } else {
      fails.push_back({games[i].game_id, errors[i]});
      x.result.errors.push_back(games[i].game_id + ": " + errors[i]);
    }
  }
  save_records(ok, x.out(kDraft));
  report::write_csv(x.out("structure_failures.csv"), {"game_id", "reason"}, fails);
  x.result.counts["structured"] = static_cast<std::int64_t>(ok.size());
  x.result.counts["failed"] = static_cast<std::int64_t>(fails.size());
}

void do_rectify(Context& x) {
  const auto drafts = load_records<StructuredRulebook>(x.in(kDraft));
  auto& gw = x.gateway("rectifier");
  std::vector<std::optional<rulebook::RectifyResult>> res(drafts.size());
  std::vector<std::string> errors(drafts.size());
  parallel_for(drafts.size(), static_cast<std::size_t>(gw.config().max_parallel), [&](std::size_t i) {
    const auto& id = drafts[i].game_id;
    try {
      res[i] = rulebook::rectify_rulebook(drafts[i], read_file(raw_rulebook_path(x.cfg, id)), gw,
                                          {x.cfg.max_tokens_rulebook, derive_seed(x.cfg.seed, "rectify:" + id)});
    } catch (const StructuringError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<StructuredRulebook> docs;
  std::vector<RectificationDiff> diffs;
  std::int64_t changed = 0;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    if (!res[i]) {
      x.result.errors.push_back(drafts[i].game_id + ": " + errors[i]);
      continue;
    }
    changed += static_cast<std::int64_t>(res[i]->diff.changed_sections.size());
    docs.push_back(std::move(res[i]->doc));
    diffs.push_back(std::move(res[i]->diff));
  }
  save_records(docs, x.out(kRulebooks));
  save_records(diffs, x.out(kDiffs));
  x.result.counts["rulebooks"] = static_cast<std::int64_t>(docs.size());
  x.result.counts["changed_sections"] = changed;
  x.result.counts["failed"] = static_cast<std::int64_t>(drafts.size() - docs.size());
}

void do_annotate(Context& x) {
  std::set<std::string> known;
  for (const auto& g : load_games(x.cfg)) known.insert(g.game_id);
  const auto raws = load_records<RawReview>(x.cfg.resolve(x.cfg.raw_reviews));
  std::set<std::string> ids;
  for (const auto& r : raws) {
    if (!known.count(r.game_id)) throw ValidationError("game_id", "review " + r.review_id + " names unknown game " + r.game_id);
    if (!ids.insert(r.review_id).second) throw ValidationError("review_id", "duplicate review_id " + r.review_id);
  }
  const auto annotated = reviews::annotate_reviews(raws, x.gateway("judge"), x.cfg.annotate);
  save_records(annotated, x.out(kAnnotated));
  std::int64_t valid = 0, failures = 0;
  for (const auto& a : annotated) {
    valid += a.annotation.is_valid;
    failures += a.annotation.filter_reason == reviews::kJudgeFailure;
  }
  x.result.counts["reviews"] = static_cast<std::int64_t>(annotated.size());
  x.result.counts["valid"] = valid;
  x.result.counts["judge_failures"] = failures;
}

void do_select(Context& x) {
  const auto annotated = load_records<AnnotatedReview>(x.in(kAnnotated));
  const auto sel = reviews::select_reviews(annotated, x.cfg.selection);
  save_records(sel.corpus, x.out(kCurated));
  std::vector<std::vector<std::string>> rows;
  for (const auto& g : sel.stats.games) {
    rows.push_back({g.game_id, std::to_string(g.n_total), std::to_string(g.n_valid), std::to_string(g.n_eligible),
                    std::to_string(g.selected), num(g.original_mean), num(g.selected_mean),
                    std::to_string(g.facets_original), std::to_string(g.facets_selected)});
  }
  report::write_csv(x.out("selection_games.csv"),
                    {"game_id", "n_total", "n_valid", "n_eligible", "selected", "original_mean", "selected_mean",
                     "facets_original", "facets_selected"},
                    rows);
  const auto& s = sel.stats;
  report::write_csv(x.out("selection_summary.csv"), {"metric", "value"},
                    {{"pearson_r", report::cell(s.pearson_r)},
                     {"facet_coverage", num(s.facet_coverage)},
                     {"retention", num(s.retention)},
                     {"delta_anchoring", num(s.delta_anchoring)},
                     {"delta_attribution", num(s.delta_attribution)},
                     {"delta_constructiveness", num(s.delta_constructiveness)},
                     {"excluded_games", text::join(s.excluded_games, " ")}});
  x.result.counts["selected"] = static_cast<std::int64_t>(sel.corpus.size());
  x.result.counts["excluded_games"] = static_cast<std::int64_t>(s.excluded_games.size());
}

void do_embed(Context& x) {
  const auto curated = load_records<CuratedReview>(x.in(kCurated));
  if (curated.empty()) throw ValidationError("curated_reviews", "nothing to embed");
  std::vector<std::string> texts;
  for (const auto& r : curated) texts.push_back(personas::render_composite(r).rendered);
  const auto vectors = x.gateway("embedder").embed(texts);
  std::vector<EmbeddingRecord> recs;
  for (std::size_t i = 0; i < curated.size(); ++i) recs.push_back({curated[i].review.review_id, texts[i], vectors[i]});
  save_records(recs, x.out(kEmbeddings));
  x.result.counts["embedded"] = static_cast<std::int64_t>(recs.size());
  x.result.counts["dimension"] = static_cast<std::int64_t>(vectors.front().size());
}

Json encode_model(const personas::ClusterModel& m) {
  return {{"k", m.k},
          {"seed", m.seed},
          {"inertia", m.inertia},
          {"inertia_trace", m.inertia_trace},
          {"iterations", m.iterations},
          {"assignments", m.assignments},
          {"centroids", m.centroids}};
}

personas::ClusterModel decode_model(const Json& j) {
  try {
    personas::ClusterModel m;
    m.k = j.at("k").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inertia = j.at("inertia").get<double>();
    m.inertia_trace = j.at("inertia_trace").get<std::vector<double>>();
    m.iterations = j.at("iterations").get<int>();
    m.assignments = j.at("assignments").get<std::map<std::string, int>>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    return m;
  } catch (const Json::exception& e) {
    throw ValidationError("clusters", std::string("malformed cluster model: ") + e.what());
  }
}

void do_cluster(Context& x) {
  const auto recs = load_records<EmbeddingRecord>(x.in(kEmbeddings));
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  for (const auto& r : recs) {
    ids.push_back(r.review_id);
    vectors.push_back(r.vector);
  }
  const auto model = personas::cluster(ids, vectors, x.cfg.k, derive_seed(x.cfg.seed, "cluster"), x.cfg.clustering);
  write_file(x.out(kClusters), encode_model(model).dump(1) + "\n");
  x.result.counts["k"] = model.k;
  x.result.counts["iterations"] = model.iterations;
  x.result.counts["points"] = static_cast<std::int64_t>(ids.size());
}

void do_profile(Context& x) {
  const auto model = decode_model(Json::parse(read_file(x.in(kClusters))));
  const auto recs = load_records<EmbeddingRecord>(x.in(kEmbeddings));
  std::map<std::string, std::string> texts;
  for (const auto& r : load_records<CuratedReview>(x.in(kCurated))) texts[r.review.review_id] = r.review.text;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  for (const auto& r : recs) {
    ids.push_back(r.review_id);
    vectors.push_back(r.vector);
  }
  const auto samples = personas::export_profiling_samples(model, ids, vectors, texts, x.cfg.per_cluster);
  for (const auto& s : samples) {
    char name[32];
    std::snprintf(name, sizeof name, "profiling/cluster_%02d.txt", s.cluster);
    write_file(x.out(name), s.prompt);
  }
  x.result.counts["clusters"] = static_cast<std::int64_t>(samples.size());
  if (!x.cfg.merge_map) return;
  const auto priors = personas::apply_merge_map(model, personas::load_merge_map(x.cfg.resolve(*x.cfg.merge_map)));
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : priors) {
    rows.push_back({std::to_string(p.cluster), std::string(persona_name(p.persona)), std::to_string(p.members)});
  }
  report::write_csv(x.out("cluster_personas.csv"), {"cluster", "persona", "members"}, rows);
  rows.clear();
  const auto totals = personas::persona_priors(priors);
  std::size_t all = 0;
  for (const auto& [_, n] : totals) all += n;
  for (Persona p : kPersonas) {
    const auto n = totals.count(p) ? totals.at(p) : 0;
    rows.push_back({std::string(persona_name(p)), std::to_string(n), all ? num(static_cast<double>(n) / all) : ""});
  }
  report::write_csv(x.out("persona_priors.csv"), {"persona", "members", "share"}, rows);
}

void do_label(Context& x) {
  auto curated = load_records<CuratedReview>(x.in(kCurated));
  const auto labels = personas::label_personas(curated, personas::canonical_profiles(), x.gateway("labeler"),
                                               x.cfg.labeling);
  std::map<std::string, std::int64_t> counts;
  for (std::size_t i = 0; i < curated.size(); ++i) {
    curated[i].persona = labels[i];
    ++counts[std::string(persona_label_name(labels[i]))];
  }
  save_records(curated, x.out(kLabeled));
  std::vector<std::vector<std::string>> rows;
  for (Persona p : kPersonas) {
    const std::string n(persona_name(p));
    rows.push_back({n, std::to_string(counts[n])});
  }
  rows.push_back({std::string(kUnassigned), std::to_string(counts[std::string(kUnassigned)])});
  report::write_csv(x.out("label_counts.csv"), {"persona", "count"}, rows);
  x.result.counts["labeled"] = static_cast<std::int64_t>(curated.size());
  x.result.counts["unassigned"] = counts[std::string(kUnassigned)];
}

void do_synthesize(Context& x) {
  const auto games = load_games(x.cfg);
  std::map<std::string, const GameRecord*> game_map;
  for (const auto& g : games) game_map[g.game_id] = &g;
  const auto rulebooks = rulebook_map(x.in(kRulebooks));
  const auto labeled = load_records<CuratedReview>(x.in(kLabeled));
  const auto profiles = personas::canonical_profiles();
  std::vector<cot::Triple> triples;
  std::int64_t unassigned = 0, no_rulebook = 0;
  for (const auto& r : labeled) {
    if (!r.persona) {
      ++unassigned;
      continue;
    }
    auto rb = rulebooks.find(r.review.game_id);
    if (rb == rulebooks.end()) {
      ++no_rulebook;
      continue;
    }
    const auto g = game_map.find(r.review.game_id);
    triples.push_back({g == game_map.end() ? nullptr : g->second, &rb->second,
                       profiles[static_cast<std::size_t>(*r.persona)], r});
  }
  const auto run = cot::run_filtration(triples, x.gateway("teacher"), x.gateway("verifier"), x.cfg.cot);
  save_records(run.accepted, x.out(kSftRecords));
  save_records(run.dropped, x.out(kDropped));
  x.result.counts["triples"] = static_cast<std::int64_t>(triples.size());
  x.result.counts["accepted"] = static_cast<std::int64_t>(run.accepted.size());
  x.result.counts["dropped"] = static_cast<std::int64_t>(run.dropped.size());
  x.result.counts["synthesize_calls"] = static_cast<std::int64_t>(run.synthesize_calls);
  x.result.counts["verify_calls"] = static_cast<std::int64_t>(run.verify_calls);
  x.result.counts["skipped_unassigned"] = unassigned;
  x.result.counts["skipped_no_rulebook"] = no_rulebook;
}

void do_export(Context& x) {
  const auto records = load_records<SftRecord>(x.in(kSftRecords));
  const auto n = cot::export_sft(records, x.out("sft_corpus.jsonl"), x.out("sft_manifest.txt"));
  x.result.counts["records"] = static_cast<std::int64_t>(n);
}

void do_split(Context& x) {
  const auto games = load_games(x.cfg);
  std::set<std::string> training;
  if (x.cfg.training_ids) {
    for (auto& id : read_id_lines(x.cfg.resolve(*x.cfg.training_ids))) training.insert(std::move(id));
  }
  const auto res = split::stratify_test_split(games, x.cfg.per_stratum, derive_seed(x.cfg.seed, "split"), training);
  std::string body;
  for (const auto& id : res.test_ids) body += id + "\n";
  write_file(x.out(kTestSplit), body);
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : res.strata) {
    rows.push_back({std::to_string(s.weight_band), std::to_string(s.rating_tier + 1), std::to_string(s.population),
                    std::to_string(s.drawn)});
  }
  report::write_csv(x.out("split_strata.csv"), {"weight_band", "rating_tier", "population", "drawn"}, rows);
  x.result.counts["test_games"] = static_cast<std::int64_t>(res.test_ids.size());
  x.result.counts["excluded_overlap"] = static_cast<std::int64_t>(res.excluded_overlap);
}

void do_simulate(Context& x) {
  const auto games = load_games(x.cfg);
  std::map<std::string, const GameRecord*> game_map;
  for (const auto& g : games) game_map[g.game_id] = &g;
  const auto rulebooks = rulebook_map(x.in(kRulebooks));
  const auto labeled = load_records<CuratedReview>(x.in(kLabeled));
  std::map<std::string, simulator::Quotas> per_game;
  simulator::Quotas global;
  for (const auto& r : labeled) {
    if (!r.persona) continue;
    ++per_game[r.review.game_id][*r.persona];
    ++global[*r.persona];
  }
  if (global.empty()) throw ValidationError("labeled_reviews", "no labeled persona to derive quotas from");

  auto ids = simulation_game_ids(x.cfg, rulebooks);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (const auto& id : ids) {
    if (!game_map.count(id)) throw ValidationError("simulation.games", "unknown game " + id);
    if (!rulebooks.count(id)) throw ValidationError("simulation.games", "no structured rulebook for " + id);
  }
  const auto profiles = personas::canonical_profiles();
  auto& gw = x.gateway("candidate");
  std::vector<SimulatedReview> all;
  std::vector<std::vector<std::string>> fail_rows, quota_rows;
  for (const auto& id : ids) {
    const auto& counts = per_game.count(id) ? per_game.at(id) : global;
    const auto quotas = simulator::allocate_personas(counts, x.cfg.simulation.n_runs);
    x.log("simulating " + id);
    auto sim = simulator::simulate_game(*game_map.at(id), rulebooks.at(id), quotas, x.cfg.simulation, gw, profiles);
    std::map<Persona, std::int64_t> produced;
    for (const auto& r : sim.reviews) ++produced[r.persona];
    for (const auto& [p, q] : quotas) {
      quota_rows.push_back({id, std::string(persona_name(p)), std::to_string(q), std::to_string(produced[p])});
    }
    for (const auto& f : sim.failures) {
      fail_rows.push_back({f.game_id, std::to_string(f.run_index), std::string(persona_name(f.persona)), f.reason});
    }
    for (auto& r : sim.reviews) all.push_back(std::move(r));
  }
  const auto v = variant_tag(x.cfg);
  save_records(all, x.out(simulated_name(x.cfg)));
  report::write_csv(x.out("simulation_quotas_" + v + ".csv"), {"game_id", "persona", "quota", "produced"}, quota_rows);
  report::write_csv(x.out("simulation_failures_" + v + ".csv"), {"game_id", "run_index", "persona", "reason"},
                    fail_rows);
  x.result.counts["games"] = static_cast<std::int64_t>(ids.size());
  x.result.counts["reviews"] = static_cast<std::int64_t>(all.size());
  x.result.counts["failed_runs"] = static_cast<std::int64_t>(fail_rows.size());
}

void do_evaluate(Context& x) {
  report::EvalInputs in;
  in.variant = variant_tag(x.cfg);
  in.simulated = load_records<SimulatedReview>(x.in(simulated_name(x.cfg)));
  std::set<std::string> games;
  for (const auto& s : in.simulated) games.insert(s.game_id);
  for (auto& r : load_records<CuratedReview>(x.in(kLabeled))) {
    if (games.count(r.review.game_id)) in.truth.push_back(std::move(r));
  }
  for (auto& [id, rb] : rulebook_map(x.in(kRulebooks))) {
    if (games.count(id)) in.rulebooks.emplace(id, std::move(rb));
  }
  const auto rep = report::evaluate(in, x.gateway("evaluator"), x.cfg.evaluation);
  write_file(x.out(eval_name(x.cfg)), report::encode(rep).dump(1) + "\n");
  for (const auto& p : report::write_report(rep, x.work)) x.out(p.filename().string());
  x.result.counts["games"] = static_cast<std::int64_t>(rep.summary.games);
  x.result.counts["simulated"] = static_cast<std::int64_t>(rep.summary.simulated);
  x.result.counts["claims"] = static_cast<std::int64_t>(rep.summary.claims);
  x.result.counts["viewpoints"] = static_cast<std::int64_t>(rep.summary.viewpoints);
}

void do_report(Context& x, const std::vector<std::pair<std::string, fs::path>>& inputs) {
  std::vector<report::EvalReport> reports;
  for (const auto& [_, p] : inputs) reports.push_back(report::decode_report(Json::parse(read_file(p))));
  for (const auto& p : report::write_comparison(reports, x.work)) x.out(p.filename().string());
  x.result.counts["reports"] = static_cast<std::int64_t>(reports.size());
}

fs::path summary_path(const RunConfig& c, const std::string& stage) {
  return c.resolve(c.workdir) / "summaries" / (stage + ".jsonl");
}

std::string stage_key(const std::string& stage, const RunConfig& c) {
  return variant_scoped(stage) ? stage + ":" + variant_tag(c) : stage;
}

// The earlier ok summary this invocation would reproduce, if its outputs are intact.
std::optional<Json> already_done(const fs::path& summaries, const std::string& key, const std::string& config_digest,
                                 const Json& inputs, const fs::path& work) {
  std::ifstream in(summaries);
  std::string line;
  while (std::getline(in, line)) {
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      continue;
    }
    if (j.value("key", "") != key || j.value("status", "") != "ok" || j.value("config_digest", "") != config_digest ||
        j.value("inputs", Json()) != inputs) {
      continue;
    }
    bool intact = true;
    for (const auto& [name, sha] : j.at("outputs").items()) {
      const auto p = work / name;
      if (!fs::exists(p) || sha256_file(p) != sha.get<std::string>()) {
        intact = false;
        break;
      }
    }
    if (intact) return j;
  }
  return std::nullopt;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"structure", "rectify", "annotate",   "select",   "embed",
                                                 "cluster",   "profile", "label",      "synthesize", "export-sft",
                                                 "split",     "simulate", "evaluate",  "report"};
  return names;
}

std::vector<std::string> stage_roles(const std::string& stage) {
  if (stage == "structure") return {"structurer"};
  if (stage == "rectify") return {"rectifier"};
  if (stage == "annotate") return {"judge"};
  if (stage == "embed") return {"embedder"};
  if (stage == "label") return {"labeler"};
  if (stage == "synthesize") return {"teacher", "verifier"};
  if (stage == "simulate") return {"candidate"};
  if (stage == "evaluate") return {"evaluator"};
  return {};
}

Json summary_json(const StageResult& r) {
  return {{"stage", r.stage}, {"status", r.status}, {"counts", r.counts}, {"errors", r.errors}, {"outputs", r.outputs}};
}

StageResult run_stage(const std::string& stage, const RunConfig& config, const StageOptions& options) {
  const auto& names = stage_names();
  if (std::find(names.begin(), names.end(), stage) == names.end()) {
    throw UsageError("unknown stage '" + stage + "'; expected one of: " + text::join(names, ", "));
  }

  std::vector<std::string> missing;
  for (const auto& role : stage_roles(stage)) {
    const std::string key = "endpoints." + role;
    auto it = config.endpoints.find(role);
    if (it == config.endpoints.end()) {
      missing.push_back(key);
      continue;
    }
    try {
      validate(it->second);
    } catch (const ValidationError& e) {
      missing.push_back(key + "." + e.field());
    }
  }
  if (!missing.empty()) {
    throw ConfigError("stage '" + stage + "' needs endpoint configuration: " + text::join(missing, ", "), missing);
  }

  const auto inputs = stage_inputs(stage, config);
  std::vector<std::string> absent;
  for (const auto& [name, path] : inputs) {
    if (!fs::is_regular_file(path)) absent.push_back(name + " (" + path.string() + ")");
  }
  if (!absent.empty()) throw IoError("stage '" + stage + "' is missing inputs: " + text::join(absent, ", "));

  Json input_digests = Json::object();
  for (const auto& [name, path] : inputs) input_digests[name] = sha256_file(path);
  const std::string config_digest = sha256_hex(stage_config(stage, config).dump());
  const auto key = stage_key(stage, config);
  const auto work = config.resolve(config.workdir);
  const auto summaries = summary_path(config, stage);

  StageResult skipped;
  skipped.stage = stage;
  if (auto done = options.force ? std::nullopt : already_done(summaries, key, config_digest, input_digests, work)) {
    skipped.status = "skipped";
    for (const auto& [name, sha] : done->at("outputs").items()) skipped.outputs[name] = sha.get<std::string>();
    const Json counts = done->value("counts", Json::object());
    for (const auto& [name, n] : counts.items()) skipped.counts[name] = n.get<std::int64_t>();
    if (options.log) options.log(stage + ": up to date, skipped");
    return skipped;
  }

  fs::create_directories(work);
  std::string audit_name = variant_scoped(stage) ? stage + "_" + variant_tag(config) : stage;
  const auto audit_path = work / "audit" / (audit_name + ".jsonl");
  fs::remove(audit_path);

  Context x(stage, config, options);
  x.result.stage = stage;
  if (!stage_roles(stage).empty()) x.audit = std::make_shared<AuditLog>(audit_path);

  std::exception_ptr failure;
  try {
    if (stage == "structure") do_structure(x);
    else if (stage == "rectify") do_rectify(x);
    else if (stage == "annotate") do_annotate(x);
    else if (stage == "select") do_select(x);
    else if (stage == "embed") do_embed(x);
    else if (stage == "cluster") do_cluster(x);
    else if (stage == "profile") do_profile(x);
    else if (stage == "label") do_label(x);
    else if (stage == "synthesize") do_synthesize(x);
    else if (stage == "export-sft") do_export(x);
    else if (stage == "split") do_split(x);
    else if (stage == "simulate") do_simulate(x);
    else if (stage == "evaluate") do_evaluate(x);
    else do_report(x, inputs);
    x.finish_outputs();
  } catch (const std::exception& e) {
    x.result.errors.push_back(e.what());
    failure = std::current_exception();
  }
  x.result.status = x.result.errors.empty() ? "ok" : "failed";
  x.result.counts["requests"] = static_cast<std::int64_t>(x.requests());

  Json summary = summary_json(x.result);
  summary["key"] = key;
  summary["seed"] = config.seed;
  summary["config_digest"] = config_digest;
  summary["inputs"] = input_digests;
  fs::create_directories(summaries.parent_path());
  {
    std::ofstream out(summaries, std::ios::binary | std::ios::app);
    out << summary.dump() << '\n';
  }
  if (failure) std::rethrow_exception(failure);
  x.log(x.result.status);
  return x.result;
}

std::vector<StageResult> run_all(const RunConfig& config, const StageOptions& options) {
  std::vector<StageResult> out;
  for (const auto& s : stage_names()) {
    out.push_back(run_stage(s, config, options));
    if (out.back().status == "failed") break;
  }
  return out;
}

std::map<std::string, std::string> artifact_digests(const RunConfig& config) {
  const auto work = config.resolve(config.workdir);
  std::map<std::string, std::string> out;
  if (!fs::is_directory(work)) return out;
  for (const auto& e : fs::recursive_directory_iterator(work)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), work);
    const auto top = rel.begin()->string();
    if (top == "audit" || top == "summaries") continue;
    out[rel.generic_string()] = sha256_file(e.path());
  }
  return out;
}

}  // namespace vplay::stages
