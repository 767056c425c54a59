#include "vplay/cot.hpp"

#include <cmath>
#include <fstream>

#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/json_extract.hpp"
#include "vplay/parallel.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/records.hpp"
#include "vplay/text.hpp"

namespace vplay::cot {

void validate(const VerifierVerdict& v) {
  if (!v.pass && text::trim(v.reason).empty()) throw ValidationError("reason", "REJECT requires a reason");
}

std::string rule_excerpt(const StructuredRulebook& rulebook, std::size_t budget) {
  return text::utf8_truncate(rulebook.to_markdown(), budget);
}

void check_triple(const Triple& t) {
  if (!t.rulebook) throw ValidationError("rulebook", "triple lacks a rulebook");
  if (t.review.review.game_id != t.rulebook->game_id) {
    throw ValidationError("game_id", "review " + t.review.review.review_id + " belongs to " +
                                         t.review.review.game_id + ", not " + t.rulebook->game_id);
  }
  if (t.game && t.game->game_id != t.rulebook->game_id) throw ValidationError("game_id", "game record mismatch");
  if (!t.review.persona || *t.review.persona != t.persona.name) {
    throw ValidationError("persona", "review " + t.review.review.review_id + " is not labeled " +
                                         std::string(persona_name(t.persona.name)));
  }
}

namespace {

Shape chain_shape() {
  return Shape::object({{"thought_chain", Shape::object({{"content_extraction", Shape::string(true)},
                                                         {"dynamic_interaction", Shape::string(true)},
                                                         {"experience_outcome", Shape::string(true)}})}});
}

Shape verdict_shape() {
  return Shape::object({{"status", Shape::enumeration({"PASS", "REJECT"})},
                        {"reason", Shape::string()},
                        {"suggestion", Shape::nullable(Shape::string()), false}});
}

std::string chain_json(const MdaChain& c) { return encode(c).dump(2); }

std::uint64_t attempt_seed(const CotOptions& o, const std::string& what, const std::string& review_id, int attempt) {
  return derive_seed(o.seed, what + ":" + review_id + ":" + std::to_string(attempt));
}

}  // namespace

MdaChain synthesize_chain(const Triple& triple, Gateway& teacher, const CotOptions& options,
                          const std::optional<VerifierVerdict>& feedback, int attempt) {
  check_triple(triple);
  const std::string persona_def =
      std::string(persona_name(triple.persona.name)) + "\n" + triple.persona.profile_text;
  std::string user = text::fill(prompts::kSynthesisUser,
                                {{"rule_content", rule_excerpt(*triple.rulebook, options.rule_budget)},
                                 {"persona_def", persona_def},
                                 {"review_text", triple.review.review.text}});
  if (feedback) {
    user += "\n\n### REVISION NOTE\nA previous attempt was rejected: " + feedback->reason;
    if (feedback->suggestion && !feedback->suggestion->empty()) user += "\nSuggestion: " + *feedback->suggestion;
  }
  ChatRequest req;
  req.messages = {{"system", std::string(prompts::kSynthesisSystem)}, {"user", user}};
  req.max_tokens = options.max_tokens;
  req.seed = attempt_seed(options, "synthesize", triple.review.review.review_id, attempt);
  req.tag = "synthesize:" + triple.review.review.review_id + ":a" + std::to_string(attempt);
  std::string last_error;
  for (int pass = 0; pass < 2; ++pass) {
    try {
      const auto j = extract_json(teacher.chat(req).text, chain_shape()).at("thought_chain");
      return {j.at("content_extraction").get<std::string>(), j.at("dynamic_interaction").get<std::string>(),
              j.at("experience_outcome").get<std::string>()};
    } catch (const ParseError& e) {
      last_error = e.what();
    } catch (const SchemaError& e) {
      last_error = e.what();
    }
    req.messages.back().content +=
        "\n\nReminder: output one JSON object with a \"thought_chain\" holding three non-empty strings.";
    req.tag += ":requery";
  }
  throw SynthesisError("chain synthesis failed for " + triple.review.review.review_id + ": " + last_error);
}

VerifierVerdict verify_chain(const MdaChain& chain, const CuratedReview& review, Gateway& verifier,
                             const CotOptions& options, int attempt) {
  ChatRequest req;
  req.messages = {{"system", std::string(prompts::kVerifierSystem)},
                  {"user", text::fill(prompts::kVerifierUser, {{"review_text", review.review.text},
                                                               {"rating", text::format_number(review.review.rating)},
                                                               {"generated_json", chain_json(chain)}})}};
  req.max_tokens = 512;
  req.temperature = 0.0;
  req.seed = attempt_seed(options, "verify", review.review.review_id, attempt);
  req.tag = "verify:" + review.review.review_id + ":a" + std::to_string(attempt);
  for (int pass = 0; pass < 2; ++pass) {
    try {
      const auto j = extract_json(verifier.chat(req).text, verdict_shape());
      VerifierVerdict v;
      v.pass = j.at("status") == "PASS";
      v.reason = j.at("reason").get<std::string>();
      if (j.contains("suggestion") && j.at("suggestion").is_string()) v.suggestion = j.at("suggestion").get<std::string>();
      if (!v.pass && text::trim(v.reason).empty()) throw SchemaError("$.reason must be non-empty for REJECT");
      return v;
    } catch (const ParseError&) {
    } catch (const SchemaError&) {
    }
    req.messages.back().content += "\n\nReminder: return a single JSON object with \"status\" and \"reason\".";
    req.tag += ":requery";
  }
  return {false, std::string("judge failure"), std::nullopt};
}

int critique_rating(double rating) {
  return std::clamp(static_cast<int>(std::floor(rating + 0.5)), 1, 10);
}

std::string target_text(const MdaChain& chain, Persona persona, int rating, const std::string& review) {
  Json critique{{"persona", std::string(persona_name(persona))}, {"rating", rating}, {"review", review}};
  return std::string(kThinkOpen) + "\ncontent_extraction: " + chain.content_extraction +
         "\ndynamic_interaction: " + chain.dynamic_interaction + "\nexperience_outcome: " +
         chain.experience_outcome + "\n" + std::string(kThinkClose) + "\n" + critique.dump();
}

std::optional<std::pair<MdaChain, std::string>> split_think(std::string_view text) {
  const auto open = text.find(kThinkOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto close = text.find(kThinkClose, open);
  if (close == std::string_view::npos) return std::nullopt;
  if (text.find(kThinkOpen, open + kThinkOpen.size()) < close) return std::nullopt;
  const auto body = text.substr(open + kThinkOpen.size(), close - open - kThinkOpen.size());
  MdaChain chain;
  for (const auto& line : text::split_lines(body)) {
    const auto t = text::trim(line);
    auto take = [&](std::string_view key, std::string& field) {
      if (t.rfind(key, 0) == 0) {
        field = text::trim(std::string_view(t).substr(key.size()));
        return true;
      }
      return false;
    };
    if (!take("content_extraction:", chain.content_extraction) &&
        !take("dynamic_interaction:", chain.dynamic_interaction)) {
      take("experience_outcome:", chain.experience_outcome);
    }
  }
  return std::make_pair(chain, text::trim(text.substr(close + kThinkClose.size())));
}

SftRecord build_record(const Triple& triple, const MdaChain& chain, std::size_t rule_budget) {
  check_triple(triple);
  validate(chain);
  const std::string name(persona_name(triple.persona.name));
  const std::string title = triple.game ? triple.game->title : triple.rulebook->game_id;
  SftRecord r;
  r.game_id = triple.rulebook->game_id;
  r.review_id = triple.review.review.review_id;
  r.persona = triple.persona.name;
  r.system_text = prompts::simulation_system(name, triple.persona.profile_text);
  r.user_text = prompts::simulation_user(name, title, rule_excerpt(*triple.rulebook, rule_budget), true);
  r.target_text = target_text(chain, triple.persona.name, critique_rating(triple.review.review.rating),
                              triple.review.review.text);
  return r;
}

FiltrationOutcome filtration_loop(const Triple& triple, Gateway& teacher, Gateway& verifier,
                                  const CotOptions& options) {
  if (options.max_attempts < 1) throw ValidationError("max_attempts", "max_attempts must be at least 1");
  check_triple(triple);
  FiltrationOutcome out;
  std::optional<VerifierVerdict> feedback;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    MdaChain chain;
    ++out.synthesize_calls;
    try {
      chain = synthesize_chain(triple, teacher, options, feedback, attempt);
    } catch (const SynthesisError& e) {
      feedback = VerifierVerdict{false, std::string("synthesis failure: ") + e.what(), std::nullopt};
      out.verdicts.push_back(*feedback);
      continue;
    }
    ++out.verify_calls;
    auto verdict = verify_chain(chain, triple.review, verifier, options, attempt);
    out.verdicts.push_back(verdict);
    if (verdict.pass) {
      out.record = build_record(triple, chain, options.rule_budget);
      return out;
    }
    feedback = verdict;
  }
  out.dropped = DroppedTriple{triple.rulebook->game_id, triple.review.review.review_id,
                              out.verdicts.empty() ? std::string("rejected") : out.verdicts.back().reason,
                              options.max_attempts};
  return out;
}

FiltrationRun run_filtration(const std::vector<Triple>& triples, Gateway& teacher, Gateway& verifier,
                             const CotOptions& options) {
  std::vector<FiltrationOutcome> outcomes(triples.size());
  const auto workers = static_cast<std::size_t>(std::max(teacher.config().max_parallel, verifier.config().max_parallel));
  parallel_for(triples.size(), workers, [&](std::size_t i) {
    outcomes[i] = filtration_loop(triples[i], teacher, verifier, options);
  });
  FiltrationRun run;
  for (auto& o : outcomes) {
    run.synthesize_calls += static_cast<std::size_t>(o.synthesize_calls);
    run.verify_calls += static_cast<std::size_t>(o.verify_calls);
    if (o.record) run.accepted.push_back(std::move(*o.record));
    if (o.dropped) run.dropped.push_back(std::move(*o.dropped));
  }
  return run;
}

std::vector<std::pair<std::string, std::string>> manifest_entries() {
  return {
      {"backbone_model", "Qwen-3-8B"},
      {"framework", "LLaMA-Factory"},
      {"context_window", "16384"},
      {"attention", "Flash Attention v2"},
      {"target_modules", "All Linear Layers"},
      {"lora_rank", "32"},
      {"lora_alpha", "64"},
      {"lora_dropout", "0.1"},
      {"learning_rate", "5.0e-5"},
      {"lr_scheduler", "cosine"},
      {"warmup_ratio", "0.03"},
      {"optimizer", "AdamW"},
      {"num_epochs", "3"},
      {"per_device_batch_size", "2"},
      {"gradient_accumulation", "8"},
      {"effective_batch_size", "128"},
      {"reasoning_mode", "Slow Thinking"},
      {"dataset_template", "qwen"},
      {"think_open", std::string(kThinkOpen)},
      {"think_close", std::string(kThinkClose)},
  };
}

std::size_t export_sft(const std::vector<SftRecord>& records, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& manifest_path) {
  if (records.empty()) throw ValidationError("records", "nothing to export");
  for (const auto& path : {corpus_path, manifest_path}) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  }
  std::string corpus;
  for (const auto& r : records) {
    validate(r);
    corpus += Json{{"system", r.system_text}, {"user", r.user_text}, {"assistant", r.target_text}}.dump() + "\n";
  }
  {
    std::ofstream out(corpus_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write SFT corpus: " + corpus_path.string());
    out << corpus;
  }
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + manifest_path.string());
  for (const auto& [k, v] : manifest_entries()) out << k << " = " << v << "\n";
  out << "records = " << records.size() << "\n";
  out << "corpus_sha256 = " << sha256_hex(corpus) << "\n";
  return records.size();
}

std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find(" = ");
    if (eq == std::string::npos) throw RecordError(line_no, "expected 'key = value'");
    out.emplace_back(t.substr(0, eq), t.substr(eq + 3));
  }
  return out;
}

}  // namespace vplay::cot
