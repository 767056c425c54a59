#include "vplay/offline_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "vplay/datamodel.hpp"
#include "vplay/digest.hpp"
#include "vplay/prompts.hpp"
#include "vplay/random.hpp"
#include "vplay/text.hpp"

namespace vplay::offline {

namespace {

using text::icontains;

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Text between `open` and the next `close` (or the end); empty when `open` is absent.
std::string between(std::string_view s, std::string_view open, std::string_view close = {}) {
  const auto a = s.find(open);
  if (a == std::string_view::npos) return {};
  const auto start = a + open.size();
  if (close.empty()) return std::string(s.substr(start));
  const auto b = s.find(close, start);
  return std::string(s.substr(start, b == std::string_view::npos ? std::string_view::npos : b - start));
}

std::uint64_t mix(std::string_view s, std::optional<std::uint64_t> seed) {
  return derive_seed(seed.value_or(0), s);
}

int clamp_score(int v) { return std::clamp(v, 1, 5); }

template <class Terms>
int count_in(std::string_view text, const Terms& terms) {
  int n = 0;
  for (auto t : terms) {
    if (icontains(text, t)) ++n;
  }
  return n;
}

int count_terms(std::string_view text, const std::vector<std::string_view>& terms) { return count_in(text, terms); }
int count_terms(std::string_view text, std::initializer_list<std::string_view> terms) { return count_in(text, terms); }

const std::vector<std::string_view> kPositive = {
    "great", "love", "excellent", "fun", "brilliant", "amazing", "enjoy", "elegant", "favorite",
    "best", "fantastic", "satisfying", "clever", "smooth", "wonderful", "perfect", "delight"};
const std::vector<std::string_view> kNegative = {
    "boring", "hate", "bad", "terrible", "awful", "broken", "frustrat", "tedious", "worst",
    "dull", "annoying", "poor", "disappoint", "fiddly", "confusing", "mess", "drags"};

int sentiment(std::string_view text) {
  return count_terms(text, kPositive) - count_terms(text, kNegative);
}

const std::vector<std::string_view> kMechanicTerms = {
    "worker placement", "deck building", "deck-building", "auction", "drafting", "area control",
    "area majority", "engine", "dice", "tiles", "cards", "board", "tokens", "market", "bidding",
    "hand management", "push your luck", "set collection", "trading", "combat", "movement",
    "resources", "victory points", "turn order", "action"};

const std::vector<std::string_view> kComponentNouns = {
    "dice", "cards", "tiles", "board", "tokens", "meeple", "coins", "miniatures", "cubes", "timer",
    "spinner"};

struct FacetCue {
  Facet facet;
  std::vector<std::string_view> cues;
};

const std::array<FacetCue, 8>& facet_cues() {
  static const std::array<FacetCue, 8> cues = {{
      {Facet::RuleClarity, {"rulebook", "rules are", "teach", "ambigu", "learn", "explain"}},
      {Facet::CognitiveLoad, {"brain", "heavy", "complex", "analysis paralysis", "think", "plan ahead"}},
      {Facet::InteractionConflict, {"interaction", "take-that", "block", "conflict", "attack", "table talk", "solitaire"}},
      {Facet::LuckStrategy, {"luck", "random", "dice", "mitigat", "control", "strategy"}},
      {Facet::BalanceFairness, {"balance", "fair", "runaway", "first player", "overpowered", "faction"}},
      {Facet::ReplayabilityVariety, {"replay", "variety", "variab", "same every", "different every", "setup changes"}},
      {Facet::ThematicIntegration, {"theme", "thematic", "story", "immers", "flavor", "narrative"}},
      {Facet::PacingFlow, {"downtime", "pacing", "drag", "long", "quick", "length", "end trigger", "tempo"}},
  }};
  return cues;
}

std::vector<Facet> facets_of(std::string_view text) {
  std::vector<Facet> out;
  for (const auto& fc : facet_cues()) {
    for (auto cue : fc.cues) {
      if (icontains(text, cue)) {
        out.push_back(fc.facet);
        break;
      }
    }
  }
  return out;
}

// ---- rulebook structuring ----------------------------------------------

SectionKey route_header(std::string_view header) {
  struct Route {
    SectionKey key;
    std::vector<std::string_view> cues;
  };
  static const std::array<Route, 7> routes = {{
      {SectionKey::FaqEdgeCases, {"faq", "clarification", "question", "edge", "note", "variant"}},
      {SectionKey::ScoringEndGame, {"scoring", "end of", "end game", "game end", "winning", "victory", "final"}},
      {SectionKey::Setup, {"setup", "set up", "set-up", "preparation"}},
      {SectionKey::Components, {"component", "contents", "material", "in the box"}},
      {SectionKey::LoreObjective, {"overview", "objective", "goal", "story", "introduction", "lore", "background", "theme"}},
      {SectionKey::GameplayFlow, {"turn", "round", "flow", "sequence", "phase", "how to play", "playing the game", "gameplay"}},
      {SectionKey::CoreMechanics, {"action", "mechanic", "rule", "combat", "movement", "market", "trad"}},
  }};
  for (const auto& r : routes) {
    for (auto cue : r.cues) {
      if (icontains(header, cue)) return r.key;
    }
  }
  return SectionKey::CoreMechanics;
}

std::string structure_reply(std::string_view user) {
  const std::string raw = between(user, "Input Text:\n");
  std::map<SectionKey, std::vector<std::string>> bodies;
  SectionKey current = SectionKey::LoreObjective;
  bool in_fence = false;
  for (const auto& line : text::split_lines(raw)) {
    const auto t = text::trim(line);
    if (starts_with(t, "```")) {
      in_fence = !in_fence;
      continue;
    }
    if (!in_fence && starts_with(t, "#")) {
      std::size_t h = 0;
      while (h < t.size() && t[h] == '#') ++h;
      if (h <= 2) {
        current = route_header(t.substr(h));
        continue;
      }
      // Deeper headers stay as body text under a demoted marker.
      bodies[current].push_back("#### " + text::trim(std::string_view(t).substr(h)));
      continue;
    }
    bodies[current].push_back(std::string(line));
  }
  std::string out;
  for (auto key : kSectionKeys) {
    std::string body = text::trim(text::join(bodies[key], "\n"));
    if (body.empty()) body = std::string(kNotMentioned);
    out += "## " + std::to_string(static_cast<int>(key) + 1) + ". " + std::string(section_name(key)) +
           "\n" + body + "\n\n";
  }
  return out;
}

std::string rectify_reply(std::string_view user) {
  return text::trim(between(user, "[DRAFT RULEBOOK]:\n"));
}

// ---- review quality ----------------------------------------------------

Json annotate_one(const Json& item) {
  const std::string comment = item.value("comment", std::string());
  const double rating = item.value("rating", 5.0);
  const auto words = text::word_count(comment);
  Json out{{"is_valid", true}, {"filter_reason", nullptr}};
  auto invalid = [&](const char* reason) {
    out["is_valid"] = false;
    out["filter_reason"] = reason;
    out["scores"] = {{"mechanism_anchoring", 1}, {"causal_attribution", 1}, {"constructiveness", 1}};
    out["facets"] = Json::array();
    return out;
  };
  if (words < 20) return invalid("Too Short");
  const int gameplay = count_terms(comment, kMechanicTerms);
  if (gameplay == 0 && count_terms(comment, {"shipping", "kickstarter", "delivery", "customer service", "damaged"}) > 0) {
    return invalid("Irrelevant");
  }
  if (gameplay == 0 && count_terms(comment, {"artwork", "art ", "miniatures", "card stock", "illustration"}) > 0) {
    return invalid("Visuals Only");
  }
  const int mood = sentiment(comment);
  if ((rating <= 2.0 && mood >= 3) || (rating >= 9.5 && mood <= -3)) return invalid("Rating Mismatch");

  const int causal = count_terms(comment, {"because", "so ", "since", "which means", "leads to",
                                           "forces", "causes", "makes", "therefore", "as a result"});
  const int advice = count_terms(comment, {"should", "could", "would be better", "fix", "wish",
                                           "if only", "house rule", "cap ", "instead"});
  const int analysis = count_terms(comment, {"because", "strong", "weak", "balance", "advantage"});
  out["scores"] = {{"mechanism_anchoring", clamp_score(1 + gameplay)},
                   {"causal_attribution", clamp_score(1 + causal + (words > 60 ? 1 : 0))},
                   {"constructiveness", clamp_score(1 + advice + (analysis > 1 ? 1 : 0))}};
  Json facets = Json::array();
  for (auto f : facets_of(comment)) facets.push_back(std::string(facet_name(f)));
  out["facets"] = facets;
  return out;
}

std::string quality_reply(std::string_view user) {
  Json reviews = Json::parse(between(user, "REVIEWS (JSON list):\n"), nullptr, false);
  Json out = Json::array();
  if (reviews.is_array()) {
    for (const auto& r : reviews) out.push_back(annotate_one(r));
  }
  return out.dump(2);
}

// ---- persona labeling --------------------------------------------------

const std::array<std::vector<std::string_view>, 5>& persona_cues() {
  static const std::array<std::vector<std::string_view>, 5> cues = {{
      {"optimiz", "no luck", "perfect information", "tight", "punishing", "balance", "heavy", "crunchy",
       "engine", "efficien", "calculat", "strategy"},
      {"elegan", "streamlined", "downtime", "fiddly", "smooth", "quick", "setup", "fast", "simple rules",
       "bookkeeping", "length"},
      {"theme", "immers", "story", "epic", "journey", "flavor", "narrative", "world", "campaign",
       "level up", "explor"},
      {"party", "laugh", "friends", "family", "easy to teach", "group", "social", "bluff", "non-gamer",
       "kids", "table talk"},
      {"push your luck", "excit", "tension", "gambl", "high stakes", "dice", "risk", "chaos", "sixes",
       "kill", "thrill", "bust"},
  }};
  return cues;
}

std::string pick_persona(std::string_view comment, std::uint64_t h) {
  std::array<int, 5> score{};
  for (std::size_t p = 0; p < 5; ++p) score[p] = count_terms(comment, persona_cues()[p]);
  std::array<std::size_t, 5> order{0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
  std::size_t choice = order[0];
  if (score[order[0]] == 0) {
    choice = static_cast<std::size_t>(h % 5);
  } else if (score[order[0]] - score[order[1]] <= 1 && (h & 7) == 0) {
    // Close calls occasionally flip, so repeated votes can disagree.
    choice = order[1];
  }
  return std::string(persona_name(kPersonas[choice]));
}

std::string label_reply(std::string_view user, std::optional<std::uint64_t> seed) {
  Json reviews = Json::parse(between(user, "REVIEWS:\n"), nullptr, false);
  Json out = Json::array();
  if (reviews.is_array()) {
    for (const auto& r : reviews) {
      const std::string comment = r.value("comment", std::string());
      out.push_back({{"LLM_persona_name", pick_persona(comment, mix(comment, seed))}});
    }
  }
  return out.dump(2);
}

// ---- MDA synthesis and verification --------------------------------------

std::string first_sentence_with(const std::vector<std::string>& sentences,
                                const std::vector<std::string_view>& cues, std::size_t fallback) {
  for (const auto& s : sentences) {
    if (count_terms(s, cues) > 0) return s;
  }
  if (sentences.empty()) return {};
  return sentences[std::min(fallback, sentences.size() - 1)];
}

std::string synthesis_reply(std::string_view user) {
  const std::string persona_block = between(user, "**Player Persona (Reference Only):**\n", "\n\n**User Review");
  const std::string persona = text::trim(text::split_lines(persona_block).empty()
                                             ? std::string("The player")
                                             : text::split_lines(persona_block).front());
  std::string review = between(user, "**User Review (Ground Truth):**\n\"", "\"\n\n### TASK");
  const bool revising = user.find("### REVISION NOTE") != std::string_view::npos;
  const auto sentences = text::sentences(review);

  std::vector<std::string> mentioned;
  for (auto term : kMechanicTerms) {
    if (icontains(review, term)) mentioned.emplace_back(term);
  }
  std::string what = mentioned.empty()
                         ? "The review refers to the overall play experience: " + first_sentence_with(sentences, {}, 0)
                         : "The review explicitly mentions " + text::join(mentioned, ", ") + ".";
  std::string how = "At the table, " +
                    first_sentence_with(sentences, {"because", "so ", "forces", "makes", "leads", "when"}, 1);
  const int mood = sentiment(review);
  std::string feel;
  if (revising) {
    const std::string note = between(user, "### REVISION NOTE\n");
    const bool high = icontains(note, "high") || icontains(note, "positive");
    feel = "As " + persona + ", the reviewer comes away " +
           (high ? std::string("satisfied; the dynamics above reward the way they like to play.")
                 : std::string("disappointed; the dynamics above clash with what they look for."));
  } else {
    const std::string tone = mood > 0 ? "positive" : (mood < 0 ? "negative" : "mixed");
    feel = "As " + persona + ", the overall feeling is " + tone + ": " +
           first_sentence_with(sentences, kPositive, sentences.size() ? sentences.size() - 1 : 0);
  }
  Json out{{"thought_chain",
            {{"content_extraction", what}, {"dynamic_interaction", how}, {"experience_outcome", feel}}}};
  return out.dump(2);
}

std::string verifier_reply(std::string_view user) {
  const std::string rating_text = between(user, "- Ground Truth Rating: ", " / 10");
  double rating = 5.0;
  try {
    rating = std::stod(rating_text);
  } catch (...) {
  }
  const std::string chain = between(user, "- Synthesized MDA Chain: ");
  Json parsed = Json::parse(chain, nullptr, false);
  std::string feel;
  if (parsed.is_object()) feel = parsed.value("experience_outcome", std::string());
  Json out;
  if (rating > 7 && (icontains(feel, "frustrat") || icontains(feel, "broken") ||
                     icontains(feel, "disappointed") || icontains(feel, "negative"))) {
    out = {{"status", "REJECT"},
           {"reason", "Sentiment Mismatch: the experience reads as negative but the rating is high (" +
                          text::format_number(rating) + "/10)."},
           {"suggestion", "Rewrite the experience_outcome so it supports a high positive rating."}};
  } else if (rating < 4 && (icontains(feel, "thrilling") || icontains(feel, "positive") ||
                            icontains(feel, "satisfied"))) {
    out = {{"status", "REJECT"},
           {"reason", "Sentiment Mismatch: the experience reads as positive but the rating is low (" +
                          text::format_number(rating) + "/10)."},
           {"suggestion", "Rewrite the experience_outcome so it explains the low rating."}};
  } else {
    out = {{"status", "PASS"}, {"reason", "Grounded and consistent with the rating."}};
  }
  return out.dump(2);
}

// ---- simulation ----------------------------------------------------------

std::vector<std::string> rule_terms(std::string_view rules) {
  // Bold phrases are the most distinctive rule vocabulary.
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while ((pos = rules.find("**", pos)) != std::string_view::npos) {
    const auto end = rules.find("**", pos + 2);
    if (end == std::string_view::npos) break;
    auto term = text::trim(rules.substr(pos + 2, end - pos - 2));
    while (!term.empty() && (term.back() == ':' || term.back() == '.')) term.pop_back();
    if (term.size() >= 3 && term.size() <= 40 && seen.insert(text::to_lower(term)).second) {
      out.push_back(term);
    }
    pos = end + 2;
  }
  return out;
}

std::string simulation_reply(const std::vector<Message>& messages, std::optional<std::uint64_t> seed) {
  const std::string& system = messages.front().content;
  const std::string& user = messages.back().content;
  std::string persona = between(system, "Current Active Persona: **", "**");
  const std::string title = text::trim(between(user, "**Game:** ", "\n"));
  const std::string rules = between(user, "**Game Rules:**\n", "Rules analysis complete.");
  const bool think = user.find("<think>") != std::string_view::npos;

  Rng rng(mix(title + "|" + persona, seed));
  const double base = 5.5 + static_cast<double>(fnv1a64(title) % 300) / 100.0;
  const double bias = persona.empty() ? 0.0 : (static_cast<double>(fnv1a64(persona + title) % 200) / 100.0 - 1.0);
  const int rating = std::clamp(static_cast<int>(std::lround(base + bias + 1.2 * rng.normal())), 1, 10);

  auto terms = rule_terms(rules);
  if (terms.empty()) terms = {"the core loop", "the turn structure", "the scoring"};
  rng.shuffle(terms);
  const std::string& a = terms[0];
  const std::string& b = terms[terms.size() > 1 ? 1 : 0];

  static const std::array<std::string_view, 4> kOpeners = {
      "Played this last night with my group.", "Finally got this to the table.",
      "Third play of {title} and my view has settled.", "We tried {title} after a long week."};
  static const std::array<std::string_view, 4> kGood = {
      "{a} created real tension because every choice around {b} mattered.",
      "The way {a} feeds into {b} kept everyone leaning over the table.",
      "I loved how {a} forced tight decisions without slowing the game down.",
      "{b} gave us a couple of great swing moments and some loud reactions."};
  static const std::array<std::string_view, 4> kBad = {
      "{a} dragged, since we kept waiting on {b} to resolve.",
      "Honestly {a} felt fiddly and the payoff from {b} was thin.",
      "The interplay between {a} and {b} never clicked for us, so turns felt flat.",
      "Too much rode on {b}, which made {a} feel like busywork."};
  static const std::array<std::string_view, 3> kCloser = {
      "I would play it again, but it will not replace our favourites.",
      "Curious to see whether it holds up after more plays.",
      "It says a lot about who you play with."};
  const bool positive = rating >= 7;
  std::vector<std::pair<std::string, std::string>> vars = {{"title", title}, {"a", a}, {"b", b}};
  std::string review = text::fill(kOpeners[rng.below(kOpeners.size())], vars) + " ";
  const int body = 1 + static_cast<int>(rng.below(3));
  for (int i = 0; i < body; ++i) {
    const auto& pool = (positive == (i % 2 == 0)) ? kGood : kBad;
    review += text::fill(pool[rng.below(pool.size())], vars) + " ";
  }
  review += std::string(kCloser[rng.below(kCloser.size())]);

  Json out{{"rating", rating}, {"review", review}};
  if (!persona.empty()) out["persona"] = persona;
  std::string reply;
  if (think) {
    reply = "<think>\ncontent_extraction: The rules centre on " + a + " and " + b +
            ".\ndynamic_interaction: At the table " + a + " shapes how players approach " + b +
            ".\nexperience_outcome: " + (positive ? "That interplay feels rewarding." : "That interplay feels flat.") +
            "\n</think>\n";
  }
  return reply + out.dump();
}

// ---- evaluation judges ---------------------------------------------------

std::set<std::string> content_tokens(std::string_view s) {
  static const std::set<std::string> stop = {
      "about", "after", "again", "their", "there", "these", "those", "which", "while", "would",
      "could", "should", "really", "every", "other", "first", "being", "where", "still", "there's"};
  std::set<std::string> out;
  for (auto& t : text::normalized_tokens(s)) {
    if (t.size() >= 5 && !stop.count(t)) out.insert(t);
  }
  return out;
}

std::string fact_reply(std::string_view user) {
  const std::string rules = between(user, "**Official Rulebook Context:**\n", "\n**Player Review:**");
  const std::string review = between(user, "**Player Review:**\n", "\n**TASK:**");
  const auto vocab = content_tokens(rules);
  Json claims = Json::array();
  for (const auto& s : text::sentences(review)) {
    std::string missing_noun;
    for (auto noun : kComponentNouns) {
      if (icontains(s, noun) && !icontains(rules, noun)) missing_noun = std::string(noun);
    }
    if (!missing_noun.empty()) {
      claims.push_back({{"claim", s}, {"status", "CONTRADICTED"},
                        {"reason", "The rulebook has no " + missing_noun + "."}});
      continue;
    }
    int hits = 0;
    for (const auto& t : content_tokens(s)) hits += vocab.count(t) ? 1 : 0;
    if (hits >= 2) {
      claims.push_back({{"claim", s}, {"status", "SUPPORTED"}, {"reason", "Named in the rulebook."}});
    } else if (hits == 1) {
      claims.push_back({{"claim", s}, {"status", "INFERRED"}, {"reason", "Consistent summary of the rules."}});
    }
  }
  return claims.dump(2);
}

std::vector<std::string> numbered_items(std::string_view block, std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(block)) {
    const auto t = text::trim(line);
    if (!starts_with(t, prefix)) continue;
    const auto colon = t.find(": ");
    if (colon != std::string::npos) out.push_back(t.substr(colon + 2));
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::string diversity_reply(std::string_view user) {
  const auto reviews = numbered_items(between(user, "):**\n", "\n**Task:**"), "Review ");
  double dist = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    for (std::size_t j = i + 1; j < reviews.size(); ++j) {
      dist += 1.0 - jaccard(content_tokens(reviews[i]), content_tokens(reviews[j]));
      ++pairs;
    }
  }
  const double mean = pairs ? dist / pairs : 0.0;
  const int score = std::clamp(1 + static_cast<int>(mean * 5.0), 1, 5);
  return Json{{"score", score}, {"reason", "Mean pairwise lexical distance " + text::format_number(std::round(mean * 100) / 100)}}
      .dump(2);
}

std::string viewpoint_of(const std::string& review) {
  const auto sentences = text::sentences(review);
  std::string best;
  int best_score = -1;
  for (const auto& s : sentences) {
    const int sc = count_terms(s, kMechanicTerms) + static_cast<int>(facets_of(s).size());
    if (sc > best_score) {
      best = s;
      best_score = sc;
    }
  }
  auto words = text::split_whitespace(best);
  if (words.size() > 14) words.resize(14);
  return text::join(words, " ");
}

std::string mining_reply(std::string_view user) {
  Json current = Json::parse(between(user, "**Current Viewpoints List:**\n", "\n\n**New Reviews Batch:**"),
                             nullptr, false);
  std::vector<std::string> points;
  if (current.is_array()) {
    for (const auto& p : current) {
      if (p.is_string()) points.push_back(p.get<std::string>());
    }
  }
  for (const auto& r : numbered_items(between(user, "**New Reviews Batch:**\n", "\n\n**Task:**"), "Review ")) {
    const auto v = viewpoint_of(r);
    if (v.empty()) continue;
    const auto tv = content_tokens(v);
    const bool dup = std::any_of(points.begin(), points.end(),
                                 [&](const std::string& p) { return jaccard(tv, content_tokens(p)) >= 0.5; });
    if (!dup) points.push_back(v);
  }
  return Json(points).dump(2);
}

std::string matching_reply(std::string_view user) {
  const std::string checklist = between(user, "**Unmatched Viewpoints Checklist:**\n", "\n\n**Reviews Batch:**");
  const auto reviews = numbered_items(between(user, "**Reviews Batch:**\n", "\n\n**Task:**"), "Review ");
  std::set<std::string> review_tokens;
  for (const auto& r : reviews) {
    auto t = content_tokens(r);
    review_tokens.insert(t.begin(), t.end());
  }
  Json ids = Json::array();
  for (const auto& line : text::split_lines(checklist)) {
    const auto t = text::trim(line);
    if (!starts_with(t, "ID ")) continue;
    const auto colon = t.find(": ");
    if (colon == std::string::npos) continue;
    const int id = std::atoi(t.substr(3, colon - 3).c_str());
    const auto vt = content_tokens(t.substr(colon + 2));
    std::size_t hit = 0;
    for (const auto& x : vt) hit += review_tokens.count(x);
    if (!vt.empty() && 2 * hit >= vt.size()) ids.push_back(id);
  }
  return ids.dump();
}

}  // namespace

std::string reply(const std::vector<Message>& messages, std::optional<std::uint64_t> seed) {
  if (messages.empty()) return "";
  const std::string_view system =
      messages.front().role == "system" ? std::string_view(messages.front().content) : std::string_view();
  const std::string_view user = messages.back().content;
  if (system == prompts::kStructureSystem) return structure_reply(user);
  if (system == prompts::kRectifySystem) return rectify_reply(user);
  if (system == prompts::kQualitySystem) return quality_reply(user);
  if (starts_with(system, prompts::kLabelSystem.substr(0, 60))) return label_reply(user, seed);
  if (system == prompts::kSynthesisSystem) return synthesis_reply(user);
  if (system == prompts::kVerifierSystem) return verifier_reply(user);
  if (system == prompts::kFactSystem) return fact_reply(user);
  if (starts_with(system, prompts::kDiversitySystem.substr(0, 50))) return diversity_reply(user);
  if (starts_with(system, prompts::kMiningSystem.substr(0, 50))) return mining_reply(user);
  if (starts_with(system, prompts::kMatchingSystem.substr(0, 40))) return matching_reply(user);
  if (system == prompts::kNoPersonaSystem ||
      starts_with(system, prompts::kSimulationSystem.substr(0, 50))) {
    return simulation_reply(messages, seed);
  }
  return "I am an offline stand-in and do not recognise this prompt.";
}

std::vector<double> hash_embedding(std::string_view text, std::size_t dim) {
  std::vector<double> v(std::max<std::size_t>(dim, 2), 0.0);
  const std::size_t buckets = v.size() - 1;
  for (const auto& tok : text::normalized_tokens(text)) {
    const auto h = fnv1a64(tok);
    v[h % buckets] += (h >> 63) ? -1.0 : 1.0;
  }
  v.back() = 1.0;
  return v;
}

}  // namespace vplay::offline
