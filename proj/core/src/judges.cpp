#include "vplay/judges.hpp"

#include <algorithm>
#include <set>

#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/metrics.hpp"
#include "vplay/parallel.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/text.hpp"

namespace vplay::judges {

namespace {

ChatRequest judge_request(std::string system, std::string user, const JudgeOptions& options, const std::string& tag) {
  ChatRequest req;
  req.messages = {{"system", std::move(system)}, {"user", std::move(user)}};
  req.max_tokens = options.max_tokens;
  req.temperature = 0.0;
  req.seed = derive_seed(options.seed, tag);
  req.tag = tag;
  return req;
}

// Reply of the first pass, or of the re-query when the first fails `accept`.
template <class Accept>
std::optional<Json> ask_twice(Gateway& gateway, ChatRequest req, const Shape& shape, Accept accept,
                              const std::string& reminder) {
  std::optional<Json> last;
  for (int pass = 0; pass < 2; ++pass) {
    try {
      auto j = extract_json(gateway.chat(req).text, shape);
      if (accept(j) || pass == 1) return j;
      last = j;
    } catch (const ParseError&) {
    } catch (const SchemaError&) {
    }
    req.messages.back().content += "\n\nReminder: " + reminder;
    req.tag += ":requery";
  }
  return last;
}

}  // namespace

std::string numbered_reviews(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += "\n";
    out += "Review " + std::to_string(i + 1) + ": " + texts[i];
  }
  return out;
}

// ---- fact check -------------------------------------------------------------

FactCheck fact_check(const SimulatedReview& review, const StructuredRulebook& rulebook, Gateway& gateway,
                     const JudgeOptions& options) {
  validate(rulebook);
  FactCheck out;
  out.game_id = review.game_id;
  out.run_index = review.run_index;
  const auto shape = Shape::array(Shape::object(
      {{"claim", Shape::string()}, {"status", Shape::string()}, {"reason", Shape::string(), false}}));
  auto all_known = [](const Json& arr) {
    return std::all_of(arr.begin(), arr.end(),
                       [](const Json& c) { return parse_fact_status(c.at("status").get<std::string>()).has_value(); });
  };
  auto reply = ask_twice(gateway,
                         judge_request(std::string(prompts::kFactSystem),
                                       text::fill(prompts::kFactUser, {{"rulebook_text", rulebook.to_markdown()},
                                                                       {"review_text", review.review}}),
                                       options, "fact:" + review.game_id + ":r" + std::to_string(review.run_index)),
                         shape, all_known, "each status must be SUPPORTED, INFERRED or CONTRADICTED.");
  if (!reply) {
    out.judge_failed = true;
    return out;
  }
  for (const auto& c : *reply) {
    auto status = parse_fact_status(c.at("status").get<std::string>());
    if (!status) {
      ++out.discarded;
      continue;
    }
    out.claims.push_back({c.at("claim").get<std::string>(), *status, c.value("reason", std::string())});
    switch (*status) {
      case FactStatus::Supported: ++out.supported; break;
      case FactStatus::Inferred: ++out.inferred; break;
      case FactStatus::Contradicted: ++out.contradicted; break;
    }
  }
  if (!out.claims.empty()) out.accuracy = metrics::fact_accuracy(out.supported, out.inferred, out.contradicted);
  return out;
}

// ---- diversity ----------------------------------------------------------------

std::vector<std::size_t> diversity_batch_sizes(std::size_t n, std::size_t k) {
  if (k == 0) throw ValidationError("diversity_k", "batch size must be positive");
  std::vector<std::size_t> out(n / k, k);
  if (n % k >= 2) out.push_back(n % k);
  return out;
}

DiversityResult diversity_score(const std::vector<SimulatedReview>& reviews, Gateway& gateway,
                                const JudgeOptions& options) {
  std::map<std::pair<std::string, Persona>, std::vector<const SimulatedReview*>> groups;
  for (const auto& r : reviews) groups[{r.game_id, r.persona}].push_back(&r);
  struct Job {
    std::string game_id;
    Persona persona;
    std::vector<std::string> texts;
  };
  std::vector<Job> jobs;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->run_index < b->run_index; });
    std::size_t at = 0;
    for (auto size : diversity_batch_sizes(members.size(), options.diversity_k)) {
      Job job{key.first, key.second, {}};
      for (std::size_t i = 0; i < size; ++i) job.texts.push_back(members[at + i]->review);
      at += size;
      jobs.push_back(std::move(job));
    }
  }
  DiversityResult out;
  out.batches.resize(jobs.size());
  const auto shape = Shape::object({{"score", Shape::integer(1, 5)}, {"reason", Shape::string(), false}});
  parallel_for(jobs.size(), static_cast<std::size_t>(gateway.config().max_parallel), [&](std::size_t i) {
    const auto& job = jobs[i];
    const std::string n = std::to_string(job.texts.size());
    const std::string persona(persona_name(job.persona));
    auto req = judge_request(text::fill(prompts::kDiversitySystem, {{"batch_len", n}}),
                             text::fill(prompts::kDiversityUser, {{"game_id", job.game_id},
                                                                  {"persona", persona},
                                                                  {"batch_len", n},
                                                                  {"reviews_text_block", numbered_reviews(job.texts)}}),
                             options, "diversity:" + job.game_id + ":" + persona + ":" + std::to_string(i));
    auto reply = ask_twice(gateway, req, shape, [](const Json&) { return true; }, "score must be an integer 1-5.");
    auto& b = out.batches[i];
    b.game_id = job.game_id;
    b.persona = job.persona;
    b.size = job.texts.size();
    if (reply) {
      b.score = reply->at("score").get<int>();
      b.reason = reply->value("reason", std::string());
    }
  });
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& b : out.batches) {
    if (b.score) {
      sum += *b.score;
      ++scored;
    }
  }
  if (scored) out.mean = sum / static_cast<double>(scored);
  return out;
}

// ---- opinion recovery ---------------------------------------------------------

std::vector<std::string> mine_viewpoints(const std::string& game_id, Persona persona,
                                         const std::vector<std::string>& truth_reviews, Gateway& gateway,
                                         const JudgeOptions& options, std::size_t* skipped) {
  if (options.mining_batch == 0) throw ValidationError("mining_batch", "batch size must be positive");
  const std::string name(persona_name(persona));
  std::vector<std::string> checklist;
  std::size_t skips = 0;
  const auto shape = Shape::array(Shape::string());
  for (std::size_t start = 0, b = 0; start < truth_reviews.size(); start += options.mining_batch, ++b) {
    const std::vector<std::string> batch(
        truth_reviews.begin() + static_cast<std::ptrdiff_t>(start),
        truth_reviews.begin() + static_cast<std::ptrdiff_t>(std::min(truth_reviews.size(), start + options.mining_batch)));
    auto req = judge_request(text::fill(prompts::kMiningSystem, {{"persona", name}}),
                             text::fill(prompts::kMiningUser, {{"game_id", game_id},
                                                               {"persona", name},
                                                               {"existing_points_text", Json(checklist).dump(2)},
                                                               {"new_reviews_text", numbered_reviews(batch)}}),
                             options, "mine:" + game_id + ":" + name + ":" + std::to_string(b));
    auto reply = ask_twice(gateway, req, shape, [](const Json&) { return true; }, "return ONLY a JSON list of strings.");
    if (!reply) {
      ++skips;
      continue;
    }
    std::vector<std::string> next;
    std::set<std::string> seen;
    for (const auto& v : *reply) {
      auto s = text::trim(v.get<std::string>());
      if (!s.empty() && seen.insert(s).second) next.push_back(std::move(s));
    }
    checklist = std::move(next);
  }
  if (skipped) *skipped = skips;
  return checklist;
}

std::vector<int> match_viewpoints(const std::string& game_id, Persona persona,
                                  const std::vector<std::string>& checklist,
                                  const std::vector<std::vector<std::string>>& simulated_batches, Gateway& gateway,
                                  const JudgeOptions& options, std::size_t* skipped) {
  const std::string name(persona_name(persona));
  std::set<int> unmatched;
  for (std::size_t i = 0; i < checklist.size(); ++i) unmatched.insert(static_cast<int>(i));
  std::set<int> matched;
  std::size_t skips = 0;
  const auto shape = Shape::array(Shape::integer());
  for (std::size_t b = 0; b < simulated_batches.size() && !unmatched.empty(); ++b) {
    std::string lines;
    for (int id : unmatched) lines += "ID " + std::to_string(id) + ": " + checklist[static_cast<std::size_t>(id)] + "\n";
    lines.pop_back();
    auto req = judge_request(text::fill(prompts::kMatchingSystem, {{"game_id", game_id}, {"persona", name}}),
                             text::fill(prompts::kMatchingUser, {{"checklist_text", lines},
                                                                 {"reviews_text", numbered_reviews(simulated_batches[b])}}),
                             options, "match:" + game_id + ":" + name + ":" + std::to_string(b));
    auto reply = ask_twice(gateway, req, shape, [](const Json&) { return true; }, "return ONLY a JSON list of IDs.");
    if (!reply) {
      ++skips;
      continue;
    }
    for (const auto& v : *reply) {
      const int id = v.get<int>();
      if (unmatched.erase(id)) matched.insert(id);
    }
  }
  if (skipped) *skipped = skips;
  return {matched.begin(), matched.end()};
}

OpinionRecovery opinion_recovery(const std::string& game_id, Persona persona,
                                 const std::vector<std::string>& truth_reviews,
                                 const std::vector<std::string>& simulated_reviews, Gateway& gateway,
                                 const JudgeOptions& options) {
  if (options.matching_batch == 0) throw ValidationError("matching_batch", "batch size must be positive");
  OpinionRecovery out;
  out.game_id = game_id;
  out.persona = persona;
  out.checklist = mine_viewpoints(game_id, persona, truth_reviews, gateway, options, &out.skipped_mining_batches);
  std::vector<std::vector<std::string>> batches;
  for (std::size_t s = 0; s < simulated_reviews.size(); s += options.matching_batch) {
    batches.emplace_back(simulated_reviews.begin() + static_cast<std::ptrdiff_t>(s),
                         simulated_reviews.begin() +
                             static_cast<std::ptrdiff_t>(std::min(simulated_reviews.size(), s + options.matching_batch)));
  }
  out.matched = match_viewpoints(game_id, persona, out.checklist, batches, gateway, options,
                                 &out.skipped_matching_batches);
  if (!out.checklist.empty()) out.op_rec = metrics::op_rec(out.matched.size(), out.checklist.size());
  return out;
}

}  // namespace vplay::judges
