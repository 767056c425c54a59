#include "vplay/reviews.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vplay/apportion.hpp"
#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/metrics.hpp"
#include "vplay/parallel.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/text.hpp"

namespace vplay::reviews {

Shape annotation_shape() {
  std::vector<std::string> facet_names;
  for (auto f : kFacets) facet_names.emplace_back(facet_name(f));
  const auto score = Shape::integer(1, 5);
  return Shape::object({
      {"is_valid", Shape::boolean()},
      {"filter_reason", Shape::nullable(Shape::string(true))},
      {"scores", Shape::object({{"mechanism_anchoring", score},
                                {"causal_attribution", score},
                                {"constructiveness", score}})},
      {"facets", Shape::array(Shape::enumeration(std::move(facet_names)))},
  });
}

QualityAnnotation annotation_from_json(const Json& item) {
  annotation_shape().check(item);
  QualityAnnotation a;
  a.is_valid = item.at("is_valid").get<bool>();
  if (!item.at("filter_reason").is_null()) a.filter_reason = item.at("filter_reason").get<std::string>();
  if (a.is_valid == a.filter_reason.has_value()) {
    throw SchemaError("$.filter_reason must be null exactly when is_valid is true");
  }
  const auto& s = item.at("scores");
  a.mechanism_anchoring = s.at("mechanism_anchoring").get<int>();
  a.causal_attribution = s.at("causal_attribution").get<int>();
  a.constructiveness = s.at("constructiveness").get<int>();
  for (const auto& f : item.at("facets")) a.facets.insert(*parse_facet(f.get<std::string>()));
  return a;
}

std::string reviews_json(const std::vector<const RawReview*>& batch) {
  Json arr = Json::array();
  for (const auto* r : batch) arr.push_back({{"rating", r->rating}, {"comment", r->text}});
  return arr.dump(2);
}

namespace {

QualityAnnotation judge_failure() {
  QualityAnnotation a;
  a.is_valid = false;
  a.filter_reason = std::string(kJudgeFailure);
  return a;
}

ChatRequest batch_request(const std::vector<const RawReview*>& batch, const AnnotateOptions& options,
                          const std::string& tag) {
  ChatRequest req;
  req.messages = {{"system", std::string(prompts::kQualitySystem)},
                  {"user", text::fill(prompts::kQualityUser, {{"batch_size", std::to_string(batch.size())},
                                                              {"reviews_json", reviews_json(batch)}})}};
  req.max_tokens = options.max_tokens;
  req.temperature = 0.0;
  req.seed = options.seed;
  req.tag = tag;
  return req;
}

std::optional<std::vector<QualityAnnotation>> try_parse(const std::string& reply, std::size_t expected) {
  try {
    const auto arr = extract_json(reply, Shape::array(Shape::any(), expected));
    std::vector<QualityAnnotation> out;
    for (const auto& item : arr) out.push_back(annotation_from_json(item));
    return out;
  } catch (const ParseError&) {
  } catch (const SchemaError&) {
  }
  return std::nullopt;
}

std::vector<QualityAnnotation> annotate_batch(const std::vector<const RawReview*>& batch, Gateway& gateway,
                                              const AnnotateOptions& options, const std::string& tag) {
  auto req = batch_request(batch, options, tag);
  if (auto out = try_parse(gateway.chat(req).text, batch.size())) return *out;
  req.messages.back().content += "\n\nReminder: your previous reply was invalid. Return EXACTLY " +
                                 std::to_string(batch.size()) + " JSON objects matching the schema.";
  req.tag += ":requery";
  if (auto out = try_parse(gateway.chat(req).text, batch.size())) return *out;

  std::vector<QualityAnnotation> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<const RawReview*> one = {batch[i]};
    auto single = batch_request(one, options, tag + ":item:" + batch[i]->review_id);
    auto parsed = try_parse(gateway.chat(single).text, 1);
    out.push_back(parsed ? parsed->front() : judge_failure());
  }
  return out;
}

}  // namespace

std::vector<AnnotatedReview> annotate_reviews(const std::vector<RawReview>& reviews, Gateway& gateway,
                                              const AnnotateOptions& options) {
  if (reviews.empty()) throw ValidationError("reviews", "nothing to annotate");
  if (options.batch_size == 0) throw ValidationError("batch_size", "batch_size must be positive");
  const std::size_t n_batches = (reviews.size() + options.batch_size - 1) / options.batch_size;
  std::vector<std::vector<QualityAnnotation>> results(n_batches);
  parallel_for(n_batches, static_cast<std::size_t>(gateway.config().max_parallel), [&](std::size_t b) {
    std::vector<const RawReview*> batch;
    const std::size_t end = std::min(reviews.size(), (b + 1) * options.batch_size);
    for (std::size_t i = b * options.batch_size; i < end; ++i) batch.push_back(&reviews[i]);
    results[b] = annotate_batch(batch, gateway, options, "annotate:" + batch.front()->review_id);
  });
  std::vector<AnnotatedReview> out;
  out.reserve(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    out.push_back({reviews[i], results[i / options.batch_size][i % options.batch_size]});
  }
  return out;
}

// ---- selection ------------------------------------------------------------

void validate(const SelectionConfig& c) {
  if (!(c.retention_ratio > 0.0 && c.retention_ratio <= 1.0)) {
    throw ValidationError("retention_ratio", "retention_ratio must lie in (0, 1]");
  }
  if (c.min_per_game < 1) throw ValidationError("min_per_game", "min_per_game must be positive");
  if (c.max_per_game < c.min_per_game) {
    throw ValidationError("max_per_game", "max_per_game must be at least min_per_game");
  }
  if (c.quality_threshold < 1 || c.quality_threshold > 5) {
    throw ValidationError("quality_threshold", "quality_threshold must lie in [1, 5]");
  }
  if (c.rating_bins < 1) throw ValidationError("rating_bins", "rating_bins must be positive");
}

int rating_bin(double rating, int bins) {
  const int b = static_cast<int>(std::floor(rating)) - 1;
  return std::clamp(b, 0, bins - 1);
}

std::int64_t target_size(std::size_t n_valid, const SelectionConfig& c) {
  auto t = static_cast<std::int64_t>(std::llround(c.retention_ratio * static_cast<double>(n_valid)));
  t = std::clamp<std::int64_t>(t, c.min_per_game, c.max_per_game);
  return std::min<std::int64_t>(t, static_cast<std::int64_t>(n_valid));
}

namespace {

struct Candidate {
  const AnnotatedReview* r;
  int bin;
  bool eligible;
  bool taken = false;
};

// (mean score desc, text length desc, review_id asc)
bool better_quality(const Candidate& a, const Candidate& b) {
  const double ma = a.r->annotation.mean_score(), mb = b.r->annotation.mean_score();
  if (ma != mb) return ma > mb;
  if (a.r->review.text.size() != b.r->review.text.size()) return a.r->review.text.size() > b.r->review.text.size();
  return a.r->review.review_id < b.r->review.review_id;
}

std::size_t gain(const Candidate& c, const std::set<Facet>& covered) {
  std::size_t g = 0;
  for (auto f : c.r->annotation.facets) g += covered.count(f) ? 0 : 1;
  return g;
}

}  // namespace

std::vector<AnnotatedReview> select_game(const std::vector<AnnotatedReview>& reviews,
                                         const SelectionConfig& config) {
  validate(config);
  std::vector<Candidate> pool;
  for (const auto& r : reviews) {
    if (!r.annotation.is_valid) continue;
    pool.push_back({&r, rating_bin(r.review.rating, config.rating_bins),
                    r.annotation.causal_attribution >= config.quality_threshold});
  }
  if (pool.empty()) return {};
  const auto target = target_size(pool.size(), config);
  std::vector<std::int64_t> hist(static_cast<std::size_t>(config.rating_bins), 0);
  for (const auto& c : pool) ++hist[static_cast<std::size_t>(c.bin)];
  const auto quotas = largest_remainder(hist, target);

  std::set<Facet> covered;
  std::vector<const Candidate*> chosen;
  auto take = [&](Candidate& c) {
    c.taken = true;
    covered.insert(c.r->annotation.facets.begin(), c.r->annotation.facets.end());
    chosen.push_back(&c);
  };

  for (int b = 0; b < config.rating_bins; ++b) {
    auto need = quotas[static_cast<std::size_t>(b)];
    // Greedy facet-coverage pick among eligible reviews of the bin.
    while (need > 0) {
      Candidate* best = nullptr;
      std::size_t best_gain = 0;
      for (auto& c : pool) {
        if (c.taken || !c.eligible || c.bin != b) continue;
        const auto g = gain(c, covered);
        if (!best || g > best_gain || (g == best_gain && better_quality(c, *best))) {
          best = &c;
          best_gain = g;
        }
      }
      if (!best) break;
      take(*best);
      --need;
    }
    if (need == 0) continue;
    // Backfill: rest of the same bin, then bins at growing distance (lower side first).
    std::vector<Candidate*> rest;
    for (int d = 0; d < config.rating_bins && need > 0; ++d) {
      for (int side : {-1, 1}) {
        if (d == 0 && side == 1) continue;
        const int bb = b + side * d;
        if (bb < 0 || bb >= config.rating_bins || need == 0) continue;
        rest.clear();
        for (auto& c : pool) {
          if (!c.taken && c.bin == bb) rest.push_back(&c);
        }
        std::sort(rest.begin(), rest.end(), [](const Candidate* x, const Candidate* y) {
          if (x->eligible != y->eligible) return x->eligible;
          return better_quality(*x, *y);
        });
        for (auto* c : rest) {
          if (need == 0) break;
          take(*c);
          --need;
        }
      }
    }
  }

  std::vector<const Candidate*> ordered = chosen;
  std::sort(ordered.begin(), ordered.end(), [](const Candidate* x, const Candidate* y) {
    return x->r->review.review_id < y->r->review.review_id;
  });
  std::vector<AnnotatedReview> out;
  out.reserve(ordered.size());
  for (const auto* c : ordered) out.push_back(*c->r);
  return out;
}

namespace {

std::map<std::string, std::vector<const AnnotatedReview*>> by_game(const std::vector<AnnotatedReview>& v) {
  std::map<std::string, std::vector<const AnnotatedReview*>> out;
  for (const auto& r : v) out[r.review.game_id].push_back(&r);
  return out;
}

}  // namespace

SelectionStats selection_stats(const std::vector<AnnotatedReview>& original,
                               const std::vector<AnnotatedReview>& selected) {
  if (original.empty() || selected.empty()) {
    throw ValidationError("selection", "selection statistics need non-empty inputs");
  }
  SelectionStats stats;
  const auto orig = by_game(original);
  const auto sel = by_game(selected);
  std::vector<double> xs, ys;
  std::size_t pairs_orig = 0, pairs_sel = 0;
  for (const auto& [game, rs] : orig) {
    GameStats g;
    g.game_id = game;
    g.n_valid = rs.size();
    std::set<Facet> fo, fs;
    std::vector<double> ro, rsel;
    for (const auto* r : rs) {
      ro.push_back(r->review.rating);
      fo.insert(r->annotation.facets.begin(), r->annotation.facets.end());
    }
    auto it = sel.find(game);
    if (it != sel.end()) {
      for (const auto* r : it->second) {
        rsel.push_back(r->review.rating);
        fs.insert(r->annotation.facets.begin(), r->annotation.facets.end());
      }
    }
    g.selected = rsel.size();
    g.original_mean = metrics::mean(ro);
    g.facets_original = fo.size();
    g.facets_selected = fs.size();
    pairs_orig += fo.size();
    pairs_sel += fs.size();
    if (!rsel.empty()) {
      g.selected_mean = metrics::mean(rsel);
      xs.push_back(g.original_mean);
      ys.push_back(g.selected_mean);
    }
    stats.games.push_back(std::move(g));
  }
  for (const auto& [game, rs] : sel) {
    if (!orig.count(game)) throw ValidationError("selection", "selected game " + game + " absent from original");
  }
  stats.pearson_r = metrics::pearson(xs, ys);
  stats.facet_coverage = pairs_orig ? static_cast<double>(pairs_sel) / static_cast<double>(pairs_orig) : 1.0;
  stats.retention = static_cast<double>(selected.size()) / static_cast<double>(original.size());
  auto mean_of = [](const std::vector<AnnotatedReview>& v, int QualityAnnotation::*field) {
    double s = 0.0;
    for (const auto& r : v) s += r.annotation.*field;
    return s / static_cast<double>(v.size());
  };
  stats.delta_anchoring = mean_of(selected, &QualityAnnotation::mechanism_anchoring) -
                          mean_of(original, &QualityAnnotation::mechanism_anchoring);
  stats.delta_attribution = mean_of(selected, &QualityAnnotation::causal_attribution) -
                            mean_of(original, &QualityAnnotation::causal_attribution);
  stats.delta_constructiveness = mean_of(selected, &QualityAnnotation::constructiveness) -
                                 mean_of(original, &QualityAnnotation::constructiveness);
  return stats;
}

SelectionResult select_reviews(const std::vector<AnnotatedReview>& annotated, const SelectionConfig& config) {
  validate(config);
  SelectionResult result;
  std::map<std::string, std::vector<AnnotatedReview>> games;
  std::map<std::string, std::size_t> totals;
  for (const auto& r : annotated) {
    ++totals[r.review.game_id];
    games[r.review.game_id];
    if (r.annotation.is_valid) games[r.review.game_id].push_back(r);
  }
  std::vector<AnnotatedReview> valid, selected;
  std::vector<std::string> excluded;
  for (const auto& [game, rs] : games) {
    if (rs.empty()) {
      excluded.push_back(game);
      continue;
    }
    valid.insert(valid.end(), rs.begin(), rs.end());
    auto picked = select_game(rs, config);
    selected.insert(selected.end(), picked.begin(), picked.end());
  }
  if (!selected.empty()) {
    result.stats = selection_stats(valid, selected);
  }
  result.stats.excluded_games = excluded;
  for (auto& g : result.stats.games) {
    g.n_total = totals[g.game_id];
    for (const auto& r : games[g.game_id]) {
      g.n_eligible += r.annotation.causal_attribution >= config.quality_threshold ? 1 : 0;
    }
  }
  for (const auto& r : selected) result.corpus.push_back({r.review, r.annotation, std::nullopt});
  return result;
}

}  // namespace vplay::reviews
