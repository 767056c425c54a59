#include "vplay/personas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/parallel.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/text.hpp"

namespace vplay::personas {

std::string_view tier_name(SentimentTier t) {
  switch (t) {
    case SentimentTier::Positive: return "Positive";
    case SentimentTier::Negative: return "Negative";
    case SentimentTier::Neutral: return "Neutral";
  }
  return "Neutral";
}

SentimentTier sentiment_tier(double rating) {
  if (rating >= 8.0) return SentimentTier::Positive;
  if (rating <= 4.0) return SentimentTier::Negative;
  return SentimentTier::Neutral;
}

CompositeText render_composite(const CuratedReview& review) {
  CompositeText c;
  c.sentiment_tier = sentiment_tier(review.review.rating);
  c.facets.assign(review.annotation.facets.begin(), review.annotation.facets.end());
  c.body = review.review.text;
  std::vector<std::string> names;
  for (auto f : c.facets) names.emplace_back(facet_name(f));
  c.rendered = "[SENTIMENT: " + std::string(tier_name(c.sentiment_tier)) + "] [FOCUS: " + text::join(names, ", ") +
               "] :: " + c.body;
  return c;
}

// ---- clustering -------------------------------------------------------------

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

bool normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  if (n == 0.0) return false;
  for (auto& x : v) x /= n;
  return true;
}

struct Fit {
  std::vector<Vec> centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> trace;
  int iterations = 0;
};

std::pair<int, double> nearest(const Vec& x, const std::vector<Vec>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d};
}

std::size_t d2_sample(const std::vector<double>& d2, double total, Rng& rng) {
  if (total <= 0.0) return 0;
  double u = rng.uniform01() * total;
  std::size_t pick = d2.size() - 1;
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (d2[i] <= 0.0) continue;
    if (u < d2[i]) {
      pick = i;
      break;
    }
    u -= d2[i];
  }
  // Rounding can run u past the last positive weight.
  while (d2[pick] <= 0.0 && pick > 0) --pick;
  return pick;
}

// Greedy k-means++: each new centre is the best of 2 + floor(ln k) D^2 draws,
// judged by the potential it leaves.
std::vector<Vec> kmeanspp(const std::vector<Vec>& xs, int k, Rng& rng) {
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  std::vector<Vec> centers;
  centers.push_back(xs[rng.below(xs.size())]);
  std::vector<double> d2(xs.size()), cand(xs.size()), best_d2;
  for (std::size_t i = 0; i < xs.size(); ++i) d2[i] = sq_dist(xs[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t best = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      const auto pick = d2_sample(d2, total, rng);
      double potential = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        cand[i] = std::min(d2[i], sq_dist(xs[i], xs[pick]));
        potential += cand[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = pick;
        best_d2 = cand;
      }
    }
    centers.push_back(xs[best]);
    d2 = best_d2;
  }
  return centers;
}

Fit lloyd(const std::vector<Vec>& xs, int k, std::uint64_t seed, const ClusterOptions& options) {
  Rng rng(seed);
  Fit fit;
  fit.centroids = kmeanspp(xs, k, rng);
  fit.labels.assign(xs.size(), 0);
  const std::size_t dim = xs.front().size();
  for (int it = 0; it < options.max_iterations; ++it) {
    fit.inertia = 0.0;
    std::vector<double> dist(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto [c, d] = nearest(xs[i], fit.centroids);
      fit.labels[i] = c;
      dist[i] = d;
      fit.inertia += d;
    }
    fit.trace.push_back(fit.inertia);
    fit.iterations = it + 1;

    std::vector<Vec> next(static_cast<std::size_t>(k), Vec(dim, 0.0));
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto& c = next[static_cast<std::size_t>(fit.labels[i])];
      for (std::size_t d = 0; d < dim; ++d) c[d] += xs[i][d];
      ++sizes[static_cast<std::size_t>(fit.labels[i])];
    }
    std::vector<bool> used(xs.size(), false);
    for (int c = 0; c < k; ++c) {
      auto& v = next[static_cast<std::size_t>(c)];
      if (sizes[static_cast<std::size_t>(c)] == 0 || !normalize(v)) {
        // Empty (or antipodal) cluster: restart it at the worst-served point.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (!used[i] && dist[i] > far_d) {
            far_d = dist[i];
            far = i;
          }
        }
        used[far] = true;
        v = xs[far];
      }
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(sq_dist(next[static_cast<std::size_t>(c)], fit.centroids[static_cast<std::size_t>(c)])));
    }
    fit.centroids = std::move(next);
    if (shift < options.tolerance) break;
  }
  // Final assignment against the converged centroids.
  fit.inertia = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto [c, d] = nearest(xs[i], fit.centroids);
    fit.labels[i] = c;
    fit.inertia += d;
  }
  if (fit.inertia <= fit.trace.back()) fit.trace.push_back(fit.inertia);
  return fit;
}

}  // namespace

ClusterModel cluster(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& vectors,
                     int k, std::uint64_t seed, const ClusterOptions& options) {
  if (ids.size() != vectors.size()) throw ValidationError("ids", "one id per vector required");
  if (k < 1) throw ValidationError("k", "k must be positive");
  if (options.n_init < 1) throw ValidationError("n_init", "n_init must be positive");
  std::vector<Vec> xs = vectors;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != xs.front().size()) throw ClusteringError("vectors differ in dimension");
    if (!normalize(xs[i])) throw ClusteringError("zero vector for " + ids[i]);
  }
  std::set<Vec> distinct(xs.begin(), xs.end());
  if (static_cast<int>(distinct.size()) < k) {
    throw ClusteringError("need at least " + std::to_string(k) + " distinct vectors, got " +
                          std::to_string(distinct.size()));
  }
  Fit best;
  bool have = false;
  for (int r = 0; r < options.n_init; ++r) {
    const auto s = r == 0 ? seed : derive_seed(seed, "kmeans-init:" + std::to_string(r));
    auto fit = lloyd(xs, k, s, options);
    if (!have || fit.inertia < best.inertia) {
      best = std::move(fit);
      have = true;
    }
  }
  ClusterModel m;
  m.k = k;
  m.centroids = std::move(best.centroids);
  m.seed = seed;
  m.inertia = best.inertia;
  m.inertia_trace = std::move(best.trace);
  m.iterations = best.iterations;
  for (std::size_t i = 0; i < ids.size(); ++i) m.assignments[ids[i]] = best.labels[i];
  return m;
}

std::vector<int> assignment_vector(const ClusterModel& model, const std::vector<std::string>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(model.assignments.at(id));
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("labels", "labelings differ in length");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [_, n] : joint) index += c2(n);
  for (const auto& [_, n] : ra) sa += c2(n);
  for (const auto& [_, n] : rb) sb += c2(n);
  const double total = c2(static_cast<double>(a.size()));
  if (total == 0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

// ---- profiling --------------------------------------------------------------

std::vector<ProfilingSample> export_profiling_samples(const ClusterModel& model,
                                                      const std::vector<std::string>& ids,
                                                      const std::vector<std::vector<double>>& vectors,
                                                      const std::map<std::string, std::string>& texts,
                                                      std::size_t per_cluster) {
  if (ids.size() != vectors.size()) throw ValidationError("ids", "one id per vector required");
  std::vector<std::vector<std::pair<double, std::string>>> members(static_cast<std::size_t>(model.k));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = model.assignments.find(ids[i]);
    if (it == model.assignments.end()) throw ValidationError("assignments", "no cluster for review " + ids[i]);
    Vec v = vectors[i];
    if (!normalize(v)) throw ClusteringError("zero vector for " + ids[i]);
    members[static_cast<std::size_t>(it->second)].push_back({dot(v, model.centroids[static_cast<std::size_t>(it->second)]), ids[i]});
  }
  std::vector<ProfilingSample> out;
  for (int c = 0; c < model.k; ++c) {
    auto& m = members[static_cast<std::size_t>(c)];
    std::sort(m.begin(), m.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    if (m.size() > per_cluster) m.resize(per_cluster);
    ProfilingSample s;
    s.cluster = c;
    std::string body;
    for (std::size_t i = 0; i < m.size(); ++i) {
      s.review_ids.push_back(m[i].second);
      auto t = texts.find(m[i].second);
      body += "Review " + std::to_string(i + 1) + ": " + (t == texts.end() ? std::string() : t->second) + "\n";
    }
    s.prompt = std::string(prompts::kProfileHead) + "\n\nReviews:\n" + body + "\n" + std::string(prompts::kProfileTail);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- merge map --------------------------------------------------------------

MergeMap parse_merge_map(std::string_view content) {
  MergeMap map;
  std::size_t line_no = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw RecordError(line_no, "expected 'cluster_index = persona name'");
    const auto key = text::trim(std::string_view(line).substr(0, eq));
    const auto value = text::trim(std::string_view(line).substr(eq + 1));
    int idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoi(key, &used);
      if (used != key.size() || idx < 0) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw RecordError(line_no, "bad cluster index '" + key + "'");
    }
    auto persona = parse_persona(value);
    if (!persona) throw RecordError(line_no, "unknown persona '" + value + "'");
    if (!map.emplace(idx, *persona).second) throw RecordError(line_no, "cluster " + key + " mapped twice");
  }
  return map;
}

std::string format_merge_map(const MergeMap& map) {
  std::string out;
  for (const auto& [idx, persona] : map) out += std::to_string(idx) + " = " + std::string(persona_name(persona)) + "\n";
  return out;
}

MergeMap load_merge_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open merge map: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_merge_map(ss.str());
}

void save_merge_map(const MergeMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write merge map: " + path.string());
  out << format_merge_map(map);
}

std::vector<ClusterPrior> apply_merge_map(const ClusterModel& model, const MergeMap& map) {
  std::vector<std::string> missing;
  for (int c = 0; c < model.k; ++c) {
    if (!map.count(c)) missing.push_back(std::to_string(c));
  }
  if (!missing.empty()) {
    throw ValidationError("merge_map", "merge map lacks clusters: " + text::join(missing, ", "));
  }
  for (const auto& [idx, _] : map) {
    if (idx >= model.k) throw ValidationError("merge_map", "merge map names cluster " + std::to_string(idx) + " >= k");
  }
  std::vector<ClusterPrior> out;
  for (int c = 0; c < model.k; ++c) out.push_back({c, map.at(c), 0});
  for (const auto& [_, c] : model.assignments) ++out[static_cast<std::size_t>(c)].members;
  return out;
}

std::map<Persona, std::size_t> persona_priors(const std::vector<ClusterPrior>& priors) {
  std::map<Persona, std::size_t> out;
  for (const auto& p : priors) out[p.persona] += p.members;
  return out;
}

// ---- labeling -------------------------------------------------------------

PersonaLabel strict_mode(const std::vector<PersonaLabel>& votes) {
  std::array<int, 5> counts{};
  for (const auto& v : votes) {
    if (v) ++counts[static_cast<std::size_t>(*v)];
  }
  int best = 0, winners = 0;
  std::size_t arg = 0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p] > best) {
      best = counts[p];
      winners = 1;
      arg = p;
    } else if (counts[p] == best && best > 0) {
      ++winners;
    }
  }
  if (best == 0 || winners != 1) return std::nullopt;
  return kPersonas[arg];
}

PersonaLabel aggregate_votes(const std::vector<PersonaLabel>& votes, const std::vector<PersonaLabel>& extras) {
  if (auto m = strict_mode(votes)) return m;
  std::vector<PersonaLabel> all = votes;
  all.insert(all.end(), extras.begin(), extras.end());
  return strict_mode(all);
}

std::vector<PersonaProfile> canonical_profiles() {
  std::vector<PersonaProfile> out;
  for (auto p : kPersonas) out.push_back({p, std::string(prompts::persona_definition(p))});
  return out;
}

namespace {

Shape label_shape(std::size_t n) {
  return Shape::array(Shape::object({{"LLM_persona_name", Shape::string()}}), n);
}

ChatRequest label_request(const std::vector<const CuratedReview*>& batch, const std::string& system,
                          const LabelOptions& options, std::uint64_t seed, const std::string& tag) {
  Json arr = Json::array();
  for (const auto* r : batch) arr.push_back({{"rating", r->review.rating}, {"comment", r->review.text}});
  ChatRequest req;
  req.messages = {{"system", system},
                  {"user", text::fill(prompts::kLabelUser, {{"batch_size", std::to_string(batch.size())},
                                                            {"reviews_json", arr.dump(2)}})}};
  req.max_tokens = options.max_tokens;
  req.temperature = 0.7;
  req.seed = seed;
  req.tag = tag;
  return req;
}

// One vote per review of the batch; out-of-vocabulary answers are re-queried once, then discarded.
std::vector<PersonaLabel> vote_batch(const std::vector<const CuratedReview*>& batch, const std::string& system,
                                     Gateway& gateway, const LabelOptions& options, std::uint64_t seed,
                                     const std::string& tag) {
  std::vector<PersonaLabel> out(batch.size());
  std::vector<bool> ok(batch.size(), false);
  auto absorb = [&](const std::string& reply) {
    try {
      const auto arr = extract_json(reply, label_shape(batch.size()));
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (ok[i]) continue;
        if (auto p = parse_persona(text::trim(arr[i].at("LLM_persona_name").get<std::string>()))) {
          out[i] = *p;
          ok[i] = true;
        }
      }
    } catch (const ParseError&) {
    } catch (const SchemaError&) {
    }
  };
  auto req = label_request(batch, system, options, seed, tag);
  absorb(gateway.chat(req).text);
  if (std::all_of(ok.begin(), ok.end(), [](bool b) { return b; })) return out;
  req.messages.back().content +=
      "\n\nReminder: every \"LLM_persona_name\" must be exactly one of the 5 persona titles.";
  req.tag += ":requery";
  absorb(gateway.chat(req).text);
  return out;
}

}  // namespace

std::vector<PersonaLabel> label_personas(const std::vector<CuratedReview>& reviews,
                                         const std::vector<PersonaProfile>& personas, Gateway& gateway,
                                         const LabelOptions& options) {
  if (personas.size() != kPersonas.size()) throw ValidationError("personas", "exactly five personas required");
  for (std::size_t i = 0; i < personas.size(); ++i) {
    if (personas[i].name != kPersonas[i]) throw ValidationError("personas", "personas must be in canonical order");
    validate(personas[i]);
  }
  if (options.votes < 1 || options.extra_votes < 0 || options.batch_size == 0) {
    throw ValidationError("votes", "votes and batch_size must be positive");
  }
  const std::string system =
      text::fill(prompts::kLabelSystem, {{"PERSONA_DEFINITIONS", prompts::persona_definitions_block(personas)}});

  // Batches are formed over a content-keyed order so labels never depend on corpus order.
  std::vector<std::size_t> order(reviews.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::string> keys(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) keys[i] = sha256_hex(reviews[i].review.text) + reviews[i].review.review_id;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<std::vector<PersonaLabel>> votes(reviews.size());
  auto run_round = [&](const std::vector<std::size_t>& members, int vote_index) {
    const std::size_t n_batches = (members.size() + options.batch_size - 1) / options.batch_size;
    std::vector<std::vector<PersonaLabel>> results(n_batches);
    const auto seed = derive_seed(options.seed, "label-vote:" + std::to_string(vote_index));
    parallel_for(n_batches, static_cast<std::size_t>(gateway.config().max_parallel), [&](std::size_t b) {
      std::vector<const CuratedReview*> batch;
      const std::size_t end = std::min(members.size(), (b + 1) * options.batch_size);
      for (std::size_t i = b * options.batch_size; i < end; ++i) batch.push_back(&reviews[members[i]]);
      results[b] = vote_batch(batch, system, gateway, options, seed,
                              "label:v" + std::to_string(vote_index) + ":" + batch.front()->review.review_id);
    });
    for (std::size_t i = 0; i < members.size(); ++i) {
      votes[members[i]].push_back(results[i / options.batch_size][i % options.batch_size]);
    }
  };
  for (int v = 0; v < options.votes; ++v) run_round(order, v);

  std::vector<std::size_t> tied;
  for (auto i : order) {
    if (!strict_mode(votes[i])) tied.push_back(i);
  }
  std::vector<std::vector<PersonaLabel>> base(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) base[i] = votes[i];
  for (int v = 0; v < options.extra_votes && !tied.empty(); ++v) run_round(tied, options.votes + v);

  std::vector<PersonaLabel> out(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    std::vector<PersonaLabel> extras(votes[i].begin() + static_cast<std::ptrdiff_t>(base[i].size()), votes[i].end());
    out[i] = aggregate_votes(base[i], extras);
  }
  return out;
}

}  // namespace vplay::personas
