#include "vplay/rulebook.hpp"

#include <array>
#include <map>

#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/gateway.hpp"
#include "vplay/prompts.hpp"
#include "vplay/text.hpp"

namespace vplay::rulebook {

std::vector<std::string> validate_rulebook(const StructuredRulebook& doc) {
  std::vector<std::string> violations;
  std::array<int, kSectionKeys.size()> seen{};
  std::vector<SectionKey> first_order;
  for (const auto& s : doc.sections) {
    const auto idx = static_cast<std::size_t>(s.key);
    if (idx >= seen.size()) {
      violations.push_back("unknown section key");
      continue;
    }
    if (seen[idx]++ > 0) {
      violations.push_back("duplicate section: " + std::string(section_name(s.key)));
    } else {
      first_order.push_back(s.key);
    }
    if (text::trim(s.text).empty()) {
      violations.push_back("empty section: " + std::string(section_name(s.key)));
    }
  }
  for (auto key : kSectionKeys) {
    if (seen[static_cast<std::size_t>(key)] == 0) {
      violations.push_back("missing section: " + std::string(section_name(key)));
    }
  }
  for (std::size_t i = 1; i < first_order.size(); ++i) {
    if (first_order[i] < first_order[i - 1]) {
      violations.push_back("sections out of canonical order");
      break;
    }
  }
  return violations;
}

namespace {

std::string strip_wrappers(std::string s) {
  for (bool changed = true; changed;) {
    changed = false;
    s = text::trim(s);
    for (std::string_view w : {"**", "__"}) {
      if (s.size() >= 2 * w.size() && s.compare(0, w.size(), w) == 0 &&
          s.compare(s.size() - w.size(), w.size(), w) == 0) {
        s = s.substr(w.size(), s.size() - 2 * w.size());
        changed = true;
      }
    }
  }
  return s;
}

bool is_fence(std::string_view line) { return text::trim(line).rfind("```", 0) == 0; }

bool is_rule(std::string_view line) {
  const auto t = text::trim(line);
  if (t.size() < 3) return false;
  return t.find_first_not_of('-') == std::string::npos ||
         t.find_first_not_of('*') == std::string::npos ||
         t.find_first_not_of('_') == std::string::npos;
}

std::string clean_body(const std::vector<std::string>& lines) {
  std::size_t begin = 0, end = lines.size();
  auto blank_or_rule = [&](std::size_t i) {
    return text::trim(lines[i]).empty() || is_rule(lines[i]);
  };
  while (begin < end && text::trim(lines[begin]).empty()) ++begin;
  while (end > begin && blank_or_rule(end - 1)) --end;
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += '\n';
    std::string_view l = lines[i];
    while (!l.empty() && (l.back() == ' ' || l.back() == '\t' || l.back() == '\r')) l.remove_suffix(1);
    out += l;
  }
  return out;
}

}  // namespace

std::optional<SectionKey> match_header(std::string_view line) {
  auto t = text::trim(line);
  std::size_t hashes = 0;
  while (hashes < t.size() && t[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return std::nullopt;
  if (hashes < t.size() && t[hashes] != ' ' && t[hashes] != '\t') return std::nullopt;
  std::string h = text::trim(std::string_view(t).substr(hashes));
  while (!h.empty() && h.back() == '#') h.pop_back();
  h = strip_wrappers(h);
  std::size_t i = 0;
  while (i < h.size() && h[i] >= '0' && h[i] <= '9') ++i;
  if (i > 0 && i < h.size() && (h[i] == '.' || h[i] == ')')) ++i;
  if (i > 0) h = strip_wrappers(h.substr(i));
  while (!h.empty() && h.back() == ':') h.pop_back();
  h = text::trim(h);
  for (auto key : kSectionKeys) {
    if (text::iequals(h, section_name(key))) return key;
  }
  return std::nullopt;
}

ParsedDocument parse_sections(std::string_view markdown) {
  ParsedDocument doc;
  std::vector<std::pair<SectionKey, std::vector<std::string>>> raw;
  for (const auto& line : text::split_lines(markdown)) {
    if (is_fence(line)) continue;
    if (auto key = match_header(line)) {
      raw.push_back({*key, {}});
      continue;
    }
    if (!raw.empty()) raw.back().second.push_back(line);
  }
  std::map<SectionKey, int> counts;
  for (auto& [key, lines] : raw) {
    RulebookSection s{key, clean_body(lines)};
    const std::string name(section_name(key));
    if (++counts[key] == 2) doc.duplicated.push_back(name);
    if (s.text.empty()) doc.empty.push_back(name);
    doc.sections.push_back(std::move(s));
  }
  for (auto key : kSectionKeys) {
    if (!counts.count(key)) doc.missing.emplace_back(section_name(key));
  }
  return doc;
}

StructuredRulebook assemble(const ParsedDocument& parsed, std::string game_id, std::string source_hash) {
  if (!parsed.ok()) throw StructuringError("cannot assemble an incomplete document", parsed.missing);
  StructuredRulebook out{std::move(game_id), {}, std::move(source_hash)};
  for (auto key : kSectionKeys) {
    for (const auto& s : parsed.sections) {
      if (s.key == key) {
        out.sections.push_back(s);
        break;
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> problems(const ParsedDocument& p) {
  std::vector<std::string> out = p.missing;
  for (const auto& d : p.duplicated) out.push_back(d + " (duplicated)");
  for (const auto& e : p.empty) out.push_back(e + " (empty)");
  return out;
}

// Sends the request; on a schema failure re-queries once with a reminder.
ParsedDocument query_sections(Gateway& gateway, ChatRequest request, const std::string& stage) {
  auto parsed = parse_sections(gateway.chat(request).text);
  if (parsed.ok()) return parsed;
  request.messages.back().content +=
      "\n\nReminder: your previous output was invalid. missing headers: " +
      text::join(problems(parsed), ", ") +
      ". Output all seven headers exactly once, in order, each with content or \"Not Mentioned\".";
  request.tag += ":requery";
  parsed = parse_sections(gateway.chat(request).text);
  if (parsed.ok()) return parsed;
  auto missing = problems(parsed);
  throw StructuringError(stage + " output still invalid after re-query; missing headers: " +
                             text::join(missing, ", "),
                         std::move(missing));
}

}  // namespace

StructuredRulebook structure_rulebook(std::string_view raw_markdown, const std::string& game_id,
                                      Gateway& gateway, const RulebookOptions& options) {
  if (text::trim(raw_markdown).empty()) {
    throw ValidationError("raw_markdown", "raw rulebook for " + game_id + " is empty");
  }
  ChatRequest req;
  req.messages = {{"system", std::string(prompts::kStructureSystem)},
                  {"user", text::fill(prompts::kStructureUser,
                                      {{"RAW_MARKDOWN_CONTENT", std::string(raw_markdown)}})}};
  req.max_tokens = options.max_tokens;
  req.seed = options.seed;
  req.tag = "structure:" + game_id;
  const auto parsed = query_sections(gateway, std::move(req), "structuring");
  return assemble(parsed, game_id, sha256_hex(raw_markdown));
}

RectifyResult rectify_rulebook(const StructuredRulebook& draft, std::string_view raw_markdown,
                               Gateway& gateway, const RulebookOptions& options) {
  validate(draft);
  ChatRequest req;
  req.messages = {{"system", std::string(prompts::kRectifySystem)},
                  {"user", text::fill(prompts::kRectifyUser,
                                      {{"RAW_SOURCE_TEXT", std::string(raw_markdown)},
                                       {"QWEN_GENERATED_STRUCT", draft.to_markdown()}})}};
  req.max_tokens = options.max_tokens;
  req.seed = options.seed;
  req.tag = "rectify:" + draft.game_id;
  const auto parsed = query_sections(gateway, std::move(req), "rectification");
  RectifyResult out{assemble(parsed, draft.game_id, draft.source_hash), {draft.game_id, {}}};
  for (std::size_t i = 0; i < out.doc.sections.size(); ++i) {
    if (out.doc.sections[i].text != draft.sections[i].text) {
      out.diff.changed_sections.emplace_back(section_name(out.doc.sections[i].key));
    }
  }
  return out;
}

}  // namespace vplay::rulebook
