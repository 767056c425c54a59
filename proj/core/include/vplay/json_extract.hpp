#pragma once

// Pulls one JSON value out of free-form model output and checks it against a
// small structural schema.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vplay/records.hpp"

namespace vplay {

class Shape {
 public:
  enum class Kind { Any, Object, Array, String, Integer, Number, Boolean, Null, Nullable, Enum };

  struct Field;

  static Shape any();
  static Shape object(std::vector<Field> fields, bool allow_extra = false);
  static Shape array(Shape element, std::optional<std::size_t> exact_size = std::nullopt);
  static Shape string(bool non_empty = false);
  static Shape integer(std::optional<std::int64_t> min = std::nullopt,
                       std::optional<std::int64_t> max = std::nullopt);
  static Shape number();
  static Shape boolean();
  static Shape null();
  static Shape nullable(Shape inner);
  static Shape enumeration(std::vector<std::string> values);

  Kind kind() const;

  // Throws SchemaError; `path` prefixes messages ("$.scores.constructiveness").
  void check(const Json& value, const std::string& path = "$") const;

  struct Node;  // defined in the implementation

 private:
  std::shared_ptr<const Node> node_;
  explicit Shape(std::shared_ptr<const Node> node);
};

struct Shape::Field {
  std::string name;
  Shape shape;
  bool required = true;
};

// Strips code fences and surrounding prose, parses the first complete JSON
// value and validates it. ParseError when nothing parses, SchemaError when the
// value does not match.
Json extract_json(std::string_view raw, const Shape& expected);

// First parseable value (fenced blocks first, then the whole text); no shape check.
std::optional<Json> first_json_value(std::string_view raw);

}  // namespace vplay
