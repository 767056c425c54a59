#include "vplay/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "vplay/cot.hpp"
#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/metrics.hpp"
#include "vplay/parallel.hpp"
#include "vplay/text.hpp"

namespace vplay::report {

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return metrics::mean(v);
}

std::optional<double> tau_or_none(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return metrics::kendall_tau_b(x, y);
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string num(double v) { return text::format_number(v); }

}  // namespace

// ---- CSV --------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << csv_field(fields[i]);
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ValidationError("csv", "row width differs from header in " + path.string());
    line(r);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"' && i + 1 < data.size() && data[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- metrics ----------------------------------------------------------------

EvalReport pure_metrics(const EvalInputs& in) {
  EvalReport r;
  r.variant = in.variant;
  metrics::GameSamples sim, truth;
  std::map<std::string, std::vector<std::string>> texts;
  for (const auto& s : in.simulated) {
    sim[s.game_id].push_back(s.rating);
    texts[s.game_id].push_back(s.review);
  }
  for (const auto& t : in.truth) truth[t.review.game_id].push_back(t.review.rating);

  metrics::GameSamples psim, ptruth;
  for (const auto& [g, v] : sim) {
    if (truth.count(g)) {
      psim[g] = v;
      ptruth[g] = truth.at(g);
    }
  }

  std::vector<double> pred_means, truth_means, d2;
  for (const auto& [g, v] : psim) {
    GameEval e;
    e.game_id = g;
    e.simulated = v.size();
    e.truth = ptruth.at(g).size();
    e.predicted_mean = metrics::mean(v);
    e.truth_mean = metrics::mean(ptruth.at(g));
    e.abs_error = std::abs(e.predicted_mean - e.truth_mean);
    e.wd = metrics::wasserstein1(v, ptruth.at(g));
    try {
      e.distinct2 = metrics::distinct2(texts.at(g));
      d2.push_back(*e.distinct2);
    } catch (const UndefinedMetricError&) {
    }
    pred_means.push_back(e.predicted_mean);
    truth_means.push_back(e.truth_mean);
    r.summary.simulated += e.simulated;
    r.games.push_back(std::move(e));
  }
  r.summary.games = r.games.size();
  if (!psim.empty()) {
    r.summary.mae = metrics::mae(psim, ptruth);
    r.summary.wd = metrics::wasserstein_macro(psim, ptruth);
    r.summary.kendall_tau = tau_or_none(pred_means, truth_means);
    r.tier_confusion = metrics::tier_confusion(pred_means, truth_means, 5);
  }
  r.summary.distinct2 = mean_of(d2);

  r.simulated_histogram.assign(10, 0);
  r.truth_histogram.assign(10, 0);
  for (const auto& [g, v] : psim) {
    for (double x : v) ++r.simulated_histogram[static_cast<std::size_t>(cot::critique_rating(x) - 1)];
    for (double x : ptruth.at(g)) ++r.truth_histogram[static_cast<std::size_t>(cot::critique_rating(x) - 1)];
  }

  // Persona breakdown: each persona compared on the games where both sides have it.
  std::map<Persona, metrics::GameSamples> sim_p, truth_p;
  for (const auto& s : in.simulated) {
    if (psim.count(s.game_id)) sim_p[s.persona][s.game_id].push_back(s.rating);
  }
  for (const auto& t : in.truth) {
    if (t.persona && psim.count(t.review.game_id)) truth_p[*t.persona][t.review.game_id].push_back(t.review.rating);
  }
  std::vector<double> maes, wds, taus;
  for (Persona p : kPersonas) {
    PersonaEval pe;
    pe.persona = std::string(persona_name(p));
    metrics::GameSamples a, b;
    for (const auto& [g, v] : sim_p[p]) {
      if (truth_p[p].count(g)) {
        a[g] = v;
        b[g] = truth_p[p].at(g);
      }
    }
    pe.games = a.size();
    if (!a.empty()) {
      pe.mae = metrics::mae(a, b);
      pe.wd = metrics::wasserstein_macro(a, b);
      std::vector<double> x, y;
      for (const auto& [g, v] : a) {
        x.push_back(metrics::mean(v));
        y.push_back(metrics::mean(b.at(g)));
      }
      pe.kendall_tau = tau_or_none(x, y);
      maes.push_back(*pe.mae);
      wds.push_back(*pe.wd);
      if (pe.kendall_tau) taus.push_back(*pe.kendall_tau);
    }
    r.personas.push_back(pe);
  }
  PersonaEval avg;
  avg.persona = "AVERAGE";
  avg.games = r.summary.games;
  avg.mae = mean_of(maes);
  avg.wd = mean_of(wds);
  avg.kendall_tau = mean_of(taus);
  r.summary.mae_persona_avg = avg.mae;
  r.personas.push_back(avg);
  return r;
}

EvalReport evaluate(const EvalInputs& in, Gateway& evaluator, const judges::JudgeOptions& options) {
  EvalReport r = pure_metrics(in);
  std::map<std::string, GameEval*> by_game;
  for (auto& g : r.games) by_game[g.game_id] = &g;

  std::vector<const SimulatedReview*> sims;
  for (const auto& s : in.simulated) {
    if (by_game.count(s.game_id) && in.rulebooks.count(s.game_id)) sims.push_back(&s);
  }
  const auto workers = static_cast<std::size_t>(evaluator.config().max_parallel);

  // Fact.
  std::vector<judges::FactCheck> facts(sims.size());
  parallel_for(sims.size(), workers, [&](std::size_t i) {
    facts[i] = judges::fact_check(*sims[i], in.rulebooks.at(sims[i]->game_id), evaluator, options);
  });
  std::map<std::string, std::vector<double>> acc;
  for (const auto& f : facts) {
    auto* g = by_game.at(f.game_id);
    if (f.judge_failed) ++r.summary.fact_judge_failures;
    g->claims += f.claims.size();
    r.summary.claims += f.claims.size();
    if (f.accuracy) {
      acc[f.game_id].push_back(*f.accuracy * 100.0);
    } else {
      ++g->zero_claim_reviews;
      ++r.summary.zero_claim_reviews;
    }
  }
  std::vector<double> game_acc;
  for (const auto& [g, v] : acc) {
    by_game.at(g)->fact_accuracy = metrics::mean(v);
    game_acc.push_back(metrics::mean(v));
  }
  r.summary.fact_accuracy = mean_of(game_acc);

  // Div.
  std::vector<SimulatedReview> in_scope;
  for (const auto* s : sims) in_scope.push_back(*s);
  const auto div = judges::diversity_score(in_scope, evaluator, options);
  std::map<std::string, std::vector<double>> div_game;
  for (const auto& b : div.batches) {
    if (b.score) {
      div_game[b.game_id].push_back(*b.score);
      ++r.summary.diversity_batches;
    }
  }
  for (const auto& [g, v] : div_game) by_game.at(g)->diversity = metrics::mean(v);
  r.summary.diversity = div.mean;

  // Op-Rec over (game, persona) groups with labeled truth reviews.
  std::map<std::pair<std::string, Persona>, std::vector<const CuratedReview*>> truth_groups;
  for (const auto& t : in.truth) {
    if (t.persona && by_game.count(t.review.game_id)) truth_groups[{t.review.game_id, *t.persona}].push_back(&t);
  }
  std::map<std::pair<std::string, Persona>, std::vector<const SimulatedReview*>> sim_groups;
  for (const auto* s : sims) sim_groups[{s->game_id, s->persona}].push_back(s);
  std::vector<std::pair<std::string, Persona>> keys;
  for (const auto& [k, _] : truth_groups) keys.push_back(k);
  std::vector<judges::OpinionRecovery> recs(keys.size());
  parallel_for(keys.size(), workers, [&](std::size_t i) {
    auto truth = truth_groups.at(keys[i]);
    std::sort(truth.begin(), truth.end(),
              [](auto* a, auto* b) { return a->review.review_id < b->review.review_id; });
    std::vector<std::string> tt, st;
    for (const auto* t : truth) tt.push_back(t->review.text);
    auto it = sim_groups.find(keys[i]);
    if (it != sim_groups.end()) {
      auto s = it->second;
      std::sort(s.begin(), s.end(), [](auto* a, auto* b) { return a->run_index < b->run_index; });
      for (const auto* x : s) st.push_back(x->review);
    }
    recs[i] = judges::opinion_recovery(keys[i].first, keys[i].second, tt, st, evaluator, options);
  });
  std::map<std::string, std::vector<double>> op_game;
  std::vector<double> op_all;
  for (const auto& o : recs) {
    auto* g = by_game.at(o.game_id);
    g->viewpoints += o.checklist.size();
    g->matched += o.matched.size();
    r.summary.viewpoints += o.checklist.size();
    if (o.op_rec) {
      op_game[o.game_id].push_back(*o.op_rec);
      op_all.push_back(*o.op_rec);
    }
  }
  for (const auto& [g, v] : op_game) by_game.at(g)->op_rec = metrics::mean(v);
  r.summary.op_rec = mean_of(op_all);
  return r;
}

// ---- persistence ------------------------------------------------------------

Json encode(const EvalReport& r) {
  Json games = Json::array();
  for (const auto& g : r.games) {
    games.push_back({{"game_id", g.game_id},
                     {"simulated", g.simulated},
                     {"truth", g.truth},
                     {"predicted_mean", g.predicted_mean},
                     {"truth_mean", g.truth_mean},
                     {"abs_error", g.abs_error},
                     {"wd", g.wd},
                     {"distinct2", opt(g.distinct2)},
                     {"fact_accuracy", opt(g.fact_accuracy)},
                     {"claims", g.claims},
                     {"zero_claim_reviews", g.zero_claim_reviews},
                     {"diversity", opt(g.diversity)},
                     {"op_rec", opt(g.op_rec)},
                     {"viewpoints", g.viewpoints},
                     {"matched", g.matched}});
  }
  Json personas = Json::array();
  for (const auto& p : r.personas) {
    personas.push_back({{"persona", p.persona},
                        {"games", p.games},
                        {"mae", opt(p.mae)},
                        {"wd", opt(p.wd)},
                        {"kendall_tau", opt(p.kendall_tau)}});
  }
  const auto& s = r.summary;
  return {{"variant", r.variant},
          {"games", games},
          {"personas", personas},
          {"tier_confusion", r.tier_confusion},
          {"simulated_histogram", r.simulated_histogram},
          {"truth_histogram", r.truth_histogram},
          {"summary",
           {{"games", s.games},
            {"simulated", s.simulated},
            {"mae", opt(s.mae)},
            {"mae_persona_avg", opt(s.mae_persona_avg)},
            {"wd", opt(s.wd)},
            {"kendall_tau", opt(s.kendall_tau)},
            {"fact_accuracy", opt(s.fact_accuracy)},
            {"claims", s.claims},
            {"zero_claim_reviews", s.zero_claim_reviews},
            {"fact_judge_failures", s.fact_judge_failures},
            {"distinct2", opt(s.distinct2)},
            {"diversity", opt(s.diversity)},
            {"diversity_batches", s.diversity_batches},
            {"op_rec", opt(s.op_rec)},
            {"viewpoints", s.viewpoints}}}};
}

EvalReport decode_report(const Json& j) {
  try {
    EvalReport r;
    r.variant = j.at("variant").get<std::string>();
    for (const auto& g : j.at("games")) {
      GameEval e;
      e.game_id = g.at("game_id").get<std::string>();
      e.simulated = g.at("simulated").get<std::size_t>();
      e.truth = g.at("truth").get<std::size_t>();
      e.predicted_mean = g.at("predicted_mean").get<double>();
      e.truth_mean = g.at("truth_mean").get<double>();
      e.abs_error = g.at("abs_error").get<double>();
      e.wd = g.at("wd").get<double>();
      e.distinct2 = get_opt(g, "distinct2");
      e.fact_accuracy = get_opt(g, "fact_accuracy");
      e.claims = g.at("claims").get<std::size_t>();
      e.zero_claim_reviews = g.at("zero_claim_reviews").get<std::size_t>();
      e.diversity = get_opt(g, "diversity");
      e.op_rec = get_opt(g, "op_rec");
      e.viewpoints = g.at("viewpoints").get<std::size_t>();
      e.matched = g.at("matched").get<std::size_t>();
      r.games.push_back(std::move(e));
    }
    for (const auto& p : j.at("personas")) {
      r.personas.push_back({p.at("persona").get<std::string>(), p.at("games").get<std::size_t>(),
                            get_opt(p, "mae"), get_opt(p, "wd"), get_opt(p, "kendall_tau")});
    }
    r.tier_confusion = j.at("tier_confusion").get<std::vector<std::vector<int>>>();
    r.simulated_histogram = j.at("simulated_histogram").get<std::vector<std::size_t>>();
    r.truth_histogram = j.at("truth_histogram").get<std::vector<std::size_t>>();
    const auto& s = j.at("summary");
    auto& o = r.summary;
    o.games = s.at("games").get<std::size_t>();
    o.simulated = s.at("simulated").get<std::size_t>();
    o.mae = get_opt(s, "mae");
    o.mae_persona_avg = get_opt(s, "mae_persona_avg");
    o.wd = get_opt(s, "wd");
    o.kendall_tau = get_opt(s, "kendall_tau");
    o.fact_accuracy = get_opt(s, "fact_accuracy");
    o.claims = s.at("claims").get<std::size_t>();
    o.zero_claim_reviews = s.at("zero_claim_reviews").get<std::size_t>();
    o.fact_judge_failures = s.at("fact_judge_failures").get<std::size_t>();
    o.distinct2 = get_opt(s, "distinct2");
    o.diversity = get_opt(s, "diversity");
    o.diversity_batches = s.at("diversity_batches").get<std::size_t>();
    o.op_rec = get_opt(s, "op_rec");
    o.viewpoints = s.at("viewpoints").get<std::size_t>();
    return r;
  } catch (const Json::exception& e) {
    throw ValidationError("report", std::string("malformed evaluation report: ") + e.what());
  }
}

// ---- CSV reports --------------------------------------------------------------

namespace {

std::vector<std::pair<std::string, std::string>> summary_cells(const Summary& s) {
  return {{"games", std::to_string(s.games)},
          {"simulated", std::to_string(s.simulated)},
          {"mae", cell(s.mae)},
          {"mae_persona_avg", cell(s.mae_persona_avg)},
          {"wd", cell(s.wd)},
          {"kendall_tau", cell(s.kendall_tau)},
          {"fact_accuracy", cell(s.fact_accuracy)},
          {"claims", std::to_string(s.claims)},
          {"zero_claim_reviews", std::to_string(s.zero_claim_reviews)},
          {"fact_judge_failures", std::to_string(s.fact_judge_failures)},
          {"distinct2", cell(s.distinct2)},
          {"diversity", cell(s.diversity)},
          {"diversity_batches", std::to_string(s.diversity_batches)},
          {"op_rec", cell(s.op_rec)},
          {"viewpoints", std::to_string(s.viewpoints)}};
}

std::vector<std::string> persona_row(const PersonaEval& p) {
  return {p.persona, std::to_string(p.games), cell(p.mae), cell(p.wd), cell(p.kendall_tau)};
}

}  // namespace

std::vector<std::filesystem::path> write_report(const EvalReport& r, const std::filesystem::path& dir) {
  const std::string stem = "eval_" + r.variant;
  std::vector<std::filesystem::path> out;

  std::vector<std::vector<std::string>> rows;
  for (const auto& g : r.games) {
    const std::vector<std::pair<std::string, std::string>> cells = {
        {"simulated", std::to_string(g.simulated)},
        {"truth", std::to_string(g.truth)},
        {"predicted_mean", num(g.predicted_mean)},
        {"truth_mean", num(g.truth_mean)},
        {"abs_error", num(g.abs_error)},
        {"wd", num(g.wd)},
        {"distinct2", cell(g.distinct2)},
        {"fact_accuracy", cell(g.fact_accuracy)},
        {"claims", std::to_string(g.claims)},
        {"zero_claim_reviews", std::to_string(g.zero_claim_reviews)},
        {"diversity", cell(g.diversity)},
        {"op_rec", cell(g.op_rec)},
        {"viewpoints", std::to_string(g.viewpoints)},
        {"matched", std::to_string(g.matched)}};
    for (const auto& [k, v] : cells) rows.push_back({g.game_id, k, v});
  }
  out.push_back(dir / (stem + "_games.csv"));
  write_csv(out.back(), {"game_id", "metric", "value"}, rows);

  rows.clear();
  for (const auto& [k, v] : summary_cells(r.summary)) rows.push_back({k, v});
  out.push_back(dir / (stem + "_summary.csv"));
  write_csv(out.back(), {"metric", "value"}, rows);

  rows.clear();
  for (std::size_t t = 0; t < r.tier_confusion.size(); ++t) {
    std::vector<std::string> row{"tier_" + std::to_string(t + 1)};
    for (int c : r.tier_confusion[t]) row.push_back(std::to_string(c));
    rows.push_back(std::move(row));
  }
  out.push_back(dir / (stem + "_tiers.csv"));
  write_csv(out.back(), {"truth_tier", "pred_tier_1", "pred_tier_2", "pred_tier_3", "pred_tier_4", "pred_tier_5"},
            rows);

  rows.clear();
  std::size_t ns = 0, nt = 0;
  for (auto c : r.simulated_histogram) ns += c;
  for (auto c : r.truth_histogram) nt += c;
  for (std::size_t i = 0; i < r.simulated_histogram.size(); ++i) {
    const auto s = r.simulated_histogram[i], t = r.truth_histogram[i];
    rows.push_back({std::to_string(i + 1), std::to_string(s), ns ? num(static_cast<double>(s) / ns) : "",
                    std::to_string(t), nt ? num(static_cast<double>(t) / nt) : ""});
  }
  out.push_back(dir / (stem + "_density.csv"));
  write_csv(out.back(), {"rating", "simulated_count", "simulated_density", "truth_count", "truth_density"}, rows);

  rows.clear();
  for (const auto& p : r.personas) rows.push_back(persona_row(p));
  out.push_back(dir / (stem + "_personas.csv"));
  write_csv(out.back(), {"persona", "games", "mae", "wd", "kendall_tau"}, rows);
  return out;
}

std::vector<std::filesystem::path> write_comparison(const std::vector<EvalReport>& reports,
                                                    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  std::vector<std::string> header{"variant"};
  for (const auto& [k, _] : summary_cells(Summary{})) header.push_back(k);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::vector<std::string> row{r.variant};
    for (const auto& [_, v] : summary_cells(r.summary)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  out.push_back(dir / "report_summary.csv");
  write_csv(out.back(), header, rows);

  rows.clear();
  for (const auto& r : reports) {
    for (const auto& p : r.personas) {
      auto row = persona_row(p);
      row.insert(row.begin(), r.variant);
      rows.push_back(std::move(row));
    }
  }
  out.push_back(dir / "report_personas.csv");
  write_csv(out.back(), {"variant", "persona", "games", "mae", "wd", "kendall_tau"}, rows);

  rows.clear();
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.simulated_histogram.size(); ++i) {
      rows.push_back({r.variant, std::to_string(i + 1), std::to_string(r.simulated_histogram[i]),
                      std::to_string(r.truth_histogram[i])});
    }
  }
  out.push_back(dir / "report_density.csv");
  write_csv(out.back(), {"variant", "rating", "simulated_count", "truth_count"}, rows);
  return out;
}

}  // namespace vplay::report
