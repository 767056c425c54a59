#include "vplay/records.hpp"

#include <cmath>
#include <set>

namespace vplay {

namespace {

// Reads the keys of one JSON object and rejects anything it did not consume.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ValidationError(context_, context_ + ": expected a JSON object");
  }

  const Json& required(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw ValidationError(key, context_ + ": missing key '" + key + "'");
    seen_.insert(key);
    return *it;
  }

  const Json* optional(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string string(const std::string& key) {
    const auto& v = required(key);
    if (!v.is_string()) throw ValidationError(key, context_ + ": '" + key + "' must be a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) {
    const auto& v = required(key);
    if (!v.is_number()) throw ValidationError(key, context_ + ": '" + key + "' must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) { return as_int(required(key), key); }

  bool boolean(const std::string& key) {
    const auto& v = required(key);
    if (!v.is_boolean()) throw ValidationError(key, context_ + ": '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  std::vector<std::string> strings(const std::string& key) { return as_strings(required(key), key); }

  int as_int(const Json& v, const std::string& key) const {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::fabs(d) < 2e9) return static_cast<int>(d);
    }
    throw ValidationError(key, context_ + ": '" + key + "' must be an integer");
  }

  std::vector<std::string> as_strings(const Json& v, const std::string& key) const {
    if (!v.is_array()) throw ValidationError(key, context_ + ": '" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) {
        throw ValidationError(key, context_ + ": '" + key + "' must hold strings");
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ValidationError(it.key(), context_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

Persona persona_from(const std::string& name, const std::string& field) {
  auto p = parse_persona(name);
  if (!p) throw ValidationError(field, "unknown persona '" + name + "'");
  return *p;
}

Json facets_json(const std::set<Facet>& facets) {
  Json arr = Json::array();
  for (auto f : facets) arr.push_back(std::string(facet_name(f)));
  return arr;
}

}  // namespace

// ---- GameRecord ---------------------------------------------------------

Json encode(const GameRecord& r) {
  Json j{{"game_id", r.game_id},       {"title", r.title},
         {"weight", r.weight},         {"avg_rating", r.avg_rating},
         {"year", r.year},             {"mechanics", r.mechanics},
         {"themes", r.themes}};
  if (r.rank) j["rank"] = *r.rank;
  return j;
}

void decode(const Json& j, GameRecord& out) {
  ObjectReader rd(j, "GameRecord");
  out.game_id = rd.string("game_id");
  out.title = rd.string("title");
  out.weight = rd.number("weight");
  out.avg_rating = rd.number("avg_rating");
  out.year = rd.integer("year");
  out.rank.reset();
  if (const auto* rank = rd.optional("rank")) out.rank = rd.as_int(*rank, "rank");
  const auto mech = rd.strings("mechanics");
  const auto themes = rd.strings("themes");
  out.mechanics = {mech.begin(), mech.end()};
  out.themes = {themes.begin(), themes.end()};
  rd.finish();
}

// ---- StructuredRulebook -------------------------------------------------

Json encode(const StructuredRulebook& r) {
  Json sections = Json::object();
  for (const auto& s : r.sections) sections[std::string(section_name(s.key))] = s.text;
  return Json{{"game_id", r.game_id}, {"sections", sections}, {"source_hash", r.source_hash}};
}

void decode(const Json& j, StructuredRulebook& out) {
  ObjectReader rd(j, "StructuredRulebook");
  out.game_id = rd.string("game_id");
  out.source_hash = rd.string("source_hash");
  const auto& sections = rd.required("sections");
  ObjectReader srd(sections, "sections");
  out.sections.clear();
  for (auto key : kSectionKeys) {
    const std::string name(section_name(key));
    out.sections.push_back({key, srd.string(name)});
  }
  srd.finish();
  rd.finish();
}

// ---- reviews ------------------------------------------------------------

namespace {

void encode_raw_fields(const RawReview& r, Json& j) {
  j["review_id"] = r.review_id;
  j["game_id"] = r.game_id;
  j["rating"] = r.rating;
  j["text"] = r.text;
  j["source"] = r.source;
}

void decode_raw_fields(ObjectReader& rd, RawReview& out) {
  out.review_id = rd.string("review_id");
  out.game_id = rd.string("game_id");
  out.rating = rd.number("rating");
  out.text = rd.string("text");
  out.source = rd.string("source");
}

}  // namespace

Json encode(const RawReview& r) {
  Json j = Json::object();
  encode_raw_fields(r, j);
  return j;
}

void decode(const Json& j, RawReview& out) {
  ObjectReader rd(j, "RawReview");
  decode_raw_fields(rd, out);
  rd.finish();
}

Json encode(const QualityAnnotation& a) {
  Json j{{"is_valid", a.is_valid},
         {"mechanism_anchoring", a.mechanism_anchoring},
         {"causal_attribution", a.causal_attribution},
         {"constructiveness", a.constructiveness},
         {"facets", facets_json(a.facets)}};
  if (a.filter_reason) j["filter_reason"] = *a.filter_reason;
  return j;
}

void decode(const Json& j, QualityAnnotation& out) {
  ObjectReader rd(j, "QualityAnnotation");
  out.is_valid = rd.boolean("is_valid");
  out.filter_reason.reset();
  if (const auto* fr = rd.optional("filter_reason")) {
    if (!fr->is_string()) throw ValidationError("filter_reason", "filter_reason must be a string");
    out.filter_reason = fr->get<std::string>();
  }
  out.mechanism_anchoring = rd.integer("mechanism_anchoring");
  out.causal_attribution = rd.integer("causal_attribution");
  out.constructiveness = rd.integer("constructiveness");
  out.facets.clear();
  for (const auto& name : rd.strings("facets")) {
    auto f = parse_facet(name);
    if (!f) throw ValidationError("facets", "unknown facet '" + name + "'");
    out.facets.insert(*f);
  }
  rd.finish();
}

Json encode(const AnnotatedReview& r) {
  Json j = Json::object();
  encode_raw_fields(r.review, j);
  j["annotation"] = encode(r.annotation);
  return j;
}

void decode(const Json& j, AnnotatedReview& out) {
  ObjectReader rd(j, "AnnotatedReview");
  decode_raw_fields(rd, out.review);
  decode(rd.required("annotation"), out.annotation);
  rd.finish();
}

Json encode(const CuratedReview& r) {
  Json j = Json::object();
  encode_raw_fields(r.review, j);
  j["annotation"] = encode(r.annotation);
  j["persona"] = std::string(persona_label_name(r.persona));
  return j;
}

void decode(const Json& j, CuratedReview& out) {
  ObjectReader rd(j, "CuratedReview");
  decode_raw_fields(rd, out.review);
  decode(rd.required("annotation"), out.annotation);
  const auto label = rd.string("persona");
  out.persona = label == kUnassigned ? PersonaLabel{} : PersonaLabel{persona_from(label, "persona")};
  rd.finish();
}

// ---- persona / chain / simulation / sft ----------------------------------

Json encode(const PersonaProfile& p) {
  return Json{{"name", std::string(persona_name(p.name))}, {"profile_text", p.profile_text}};
}

void decode(const Json& j, PersonaProfile& out) {
  ObjectReader rd(j, "PersonaProfile");
  out.name = persona_from(rd.string("name"), "name");
  out.profile_text = rd.string("profile_text");
  rd.finish();
}

Json encode(const MdaChain& c) {
  return Json{{"content_extraction", c.content_extraction},
              {"dynamic_interaction", c.dynamic_interaction},
              {"experience_outcome", c.experience_outcome}};
}

void decode(const Json& j, MdaChain& out) {
  ObjectReader rd(j, "MdaChain");
  out.content_extraction = rd.string("content_extraction");
  out.dynamic_interaction = rd.string("dynamic_interaction");
  out.experience_outcome = rd.string("experience_outcome");
  rd.finish();
}

Json encode(const SimulatedReview& r) {
  Json j{{"game_id", r.game_id},
         {"persona", std::string(persona_name(r.persona))},
         {"rating", r.rating},
         {"review", r.review},
         {"run_index", r.run_index}};
  if (r.chain) j["chain"] = encode(*r.chain);
  return j;
}

void decode(const Json& j, SimulatedReview& out) {
  ObjectReader rd(j, "SimulatedReview");
  out.game_id = rd.string("game_id");
  out.persona = persona_from(rd.string("persona"), "persona");
  out.rating = rd.integer("rating");
  out.review = rd.string("review");
  out.run_index = rd.integer("run_index");
  out.chain.reset();
  if (const auto* c = rd.optional("chain")) {
    MdaChain chain;
    decode(*c, chain);
    out.chain = std::move(chain);
  }
  rd.finish();
}

Json encode(const SftRecord& r) {
  return Json{{"game_id", r.game_id},         {"review_id", r.review_id},
              {"persona", std::string(persona_name(r.persona))},
              {"system_text", r.system_text}, {"user_text", r.user_text},
              {"target_text", r.target_text}};
}

void decode(const Json& j, SftRecord& out) {
  ObjectReader rd(j, "SftRecord");
  out.game_id = rd.string("game_id");
  out.review_id = rd.string("review_id");
  out.persona = persona_from(rd.string("persona"), "persona");
  out.system_text = rd.string("system_text");
  out.user_text = rd.string("user_text");
  out.target_text = rd.string("target_text");
  rd.finish();
}

// ---- artifacts ----------------------------------------------------------

Json encode(const EmbeddingRecord& r) {
  return Json{{"review_id", r.review_id}, {"composite", r.composite}, {"vector", r.vector}};
}

void decode(const Json& j, EmbeddingRecord& out) {
  ObjectReader rd(j, "EmbeddingRecord");
  out.review_id = rd.string("review_id");
  out.composite = rd.string("composite");
  const auto& v = rd.required("vector");
  if (!v.is_array()) throw ValidationError("vector", "vector must be an array");
  out.vector.clear();
  for (const auto& e : v) {
    if (!e.is_number()) throw ValidationError("vector", "vector must hold numbers");
    out.vector.push_back(e.get<double>());
  }
  rd.finish();
}

Json encode(const RectificationDiff& r) {
  return Json{{"game_id", r.game_id}, {"changed_sections", r.changed_sections}};
}

void decode(const Json& j, RectificationDiff& out) {
  ObjectReader rd(j, "RectificationDiff");
  out.game_id = rd.string("game_id");
  out.changed_sections = rd.strings("changed_sections");
  rd.finish();
}

Json encode(const DroppedTriple& r) {
  return Json{{"game_id", r.game_id},
              {"review_id", r.review_id},
              {"reason", r.reason},
              {"attempts", r.attempts}};
}

void decode(const Json& j, DroppedTriple& out) {
  ObjectReader rd(j, "DroppedTriple");
  out.game_id = rd.string("game_id");
  out.review_id = rd.string("review_id");
  out.reason = rd.string("reason");
  out.attempts = rd.integer("attempts");
  rd.finish();
}

}  // namespace vplay
