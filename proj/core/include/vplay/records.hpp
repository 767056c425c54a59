#pragma once

// Line-delimited JSON persistence for every record type. One record per line,
// keys sorted (nlohmann's default object map), unknown keys rejected.

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vplay/datamodel.hpp"
#include "vplay/error.hpp"

namespace vplay {

using Json = nlohmann::json;

Json encode(const GameRecord& r);
Json encode(const StructuredRulebook& r);
Json encode(const RawReview& r);
Json encode(const QualityAnnotation& a);
Json encode(const AnnotatedReview& r);
Json encode(const CuratedReview& r);
Json encode(const PersonaProfile& p);
Json encode(const MdaChain& c);
Json encode(const SimulatedReview& r);
Json encode(const SftRecord& r);
Json encode(const EmbeddingRecord& r);
Json encode(const RectificationDiff& r);
Json encode(const DroppedTriple& r);

// Strict decoders: missing keys, wrong types and unknown keys throw ValidationError.
void decode(const Json& j, GameRecord& out);
void decode(const Json& j, StructuredRulebook& out);
void decode(const Json& j, RawReview& out);
void decode(const Json& j, QualityAnnotation& out);
void decode(const Json& j, AnnotatedReview& out);
void decode(const Json& j, CuratedReview& out);
void decode(const Json& j, PersonaProfile& out);
void decode(const Json& j, MdaChain& out);
void decode(const Json& j, SimulatedReview& out);
void decode(const Json& j, SftRecord& out);
void decode(const Json& j, EmbeddingRecord& out);
void decode(const Json& j, RectificationDiff& out);
void decode(const Json& j, DroppedTriple& out);

template <class T>
std::string serialize_record(const T& record) {
  return encode(record).dump();
}

// Parses and validates one line; `line_no` is only used in error messages.
template <class T>
T parse_record(std::string_view line, std::size_t line_no = 1) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw RecordError(line_no, std::string("malformed JSON: ") + e.what());
  }
  T out{};
  try {
    decode(j, out);
    validate(out);
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), "line " + std::to_string(line_no) + ": " + e.what());
  }
  return out;
}

template <class T>
std::vector<T> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open record file: " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_record<T>(line, line_no));
  }
  return out;
}

template <class T>
std::size_t save_records(std::span<const T> records, const std::filesystem::path& path) {
  for (const auto& r : records) validate(r);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write record file: " + path.string());
  for (const auto& r : records) out << serialize_record(r) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
  return records.size();
}

template <class T>
std::size_t save_records(const std::vector<T>& records, const std::filesystem::path& path) {
  return save_records(std::span<const T>(records), path);
}

}  // namespace vplay
