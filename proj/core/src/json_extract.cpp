#include "vplay/json_extract.hpp"

#include <algorithm>
#include <cmath>

#include "vplay/error.hpp"

namespace vplay {

struct Shape::Node {
  Kind kind = Kind::Any;
  std::vector<Field> fields;
  bool allow_extra = false;
  std::vector<Shape> children;  // Array element or Nullable inner
  std::optional<std::size_t> exact_size;
  bool non_empty = false;
  std::optional<std::int64_t> min, max;
  std::vector<std::string> values;
};

Shape::Shape(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Shape::Kind Shape::kind() const { return node_->kind; }

namespace {

std::shared_ptr<Shape::Node> make(Shape::Kind k) {
  auto n = std::make_shared<Shape::Node>();
  n->kind = k;
  return n;
}

}  // namespace

Shape Shape::any() { return Shape(make(Kind::Any)); }

Shape Shape::object(std::vector<Field> fields, bool allow_extra) {
  auto n = make(Kind::Object);
  n->fields = std::move(fields);
  n->allow_extra = allow_extra;
  return Shape(n);
}

Shape Shape::array(Shape element, std::optional<std::size_t> exact_size) {
  auto n = make(Kind::Array);
  n->children.push_back(std::move(element));
  n->exact_size = exact_size;
  return Shape(n);
}

Shape Shape::string(bool non_empty) {
  auto n = make(Kind::String);
  n->non_empty = non_empty;
  return Shape(n);
}

Shape Shape::integer(std::optional<std::int64_t> min, std::optional<std::int64_t> max) {
  auto n = make(Kind::Integer);
  n->min = min;
  n->max = max;
  return Shape(n);
}

Shape Shape::number() { return Shape(make(Kind::Number)); }
Shape Shape::boolean() { return Shape(make(Kind::Boolean)); }
Shape Shape::null() { return Shape(make(Kind::Null)); }

Shape Shape::nullable(Shape inner) {
  auto n = make(Kind::Nullable);
  n->children.push_back(std::move(inner));
  return Shape(n);
}

Shape Shape::enumeration(std::vector<std::string> values) {
  auto n = make(Kind::Enum);
  n->values = std::move(values);
  return Shape(n);
}

void Shape::check(const Json& v, const std::string& path) const {
  const Node& n = *node_;
  auto fail = [&](const std::string& what) { throw SchemaError(path + ": " + what); };
  switch (n.kind) {
    case Kind::Any:
      return;
    case Kind::Object: {
      if (!v.is_object()) fail("expected object");
      std::vector<std::string> missing, extra;
      for (const auto& f : n.fields) {
        if (f.required && !v.contains(f.name)) missing.push_back(f.name);
      }
      if (!n.allow_extra) {
        for (auto it = v.begin(); it != v.end(); ++it) {
          const bool known = std::any_of(n.fields.begin(), n.fields.end(),
                                         [&](const Field& f) { return f.name == it.key(); });
          if (!known) extra.push_back(it.key());
        }
      }
      if (!missing.empty() || !extra.empty()) {
        std::string msg = path + ": object keys do not match";
        if (!missing.empty()) {
          msg += "; missing:";
          for (const auto& k : missing) msg += " " + k;
        }
        if (!extra.empty()) {
          msg += "; extra:";
          for (const auto& k : extra) msg += " " + k;
        }
        throw SchemaError(msg, missing, extra);
      }
      for (const auto& f : n.fields) {
        auto it = v.find(f.name);
        if (it != v.end()) f.shape.check(*it, path + "." + f.name);
      }
      return;
    }
    case Kind::Array: {
      if (!v.is_array()) fail("expected array");
      if (n.exact_size && v.size() != *n.exact_size) {
        fail("expected " + std::to_string(*n.exact_size) + " elements, got " +
             std::to_string(v.size()));
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        n.children[0].check(v[i], path + "[" + std::to_string(i) + "]");
      }
      return;
    }
    case Kind::String:
      if (!v.is_string()) fail("expected string");
      if (n.non_empty && v.get<std::string>().find_first_not_of(" \t\r\n") == std::string::npos) {
        fail("expected non-empty string");
      }
      return;
    case Kind::Integer: {
      std::int64_t x = 0;
      if (v.is_number_integer()) {
        x = v.get<std::int64_t>();
      } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
                 std::fabs(v.get<double>()) < 9e15) {
        x = static_cast<std::int64_t>(v.get<double>());
      } else {
        fail("expected integer");
      }
      if ((n.min && x < *n.min) || (n.max && x > *n.max)) fail("integer out of range");
      return;
    }
    case Kind::Number:
      if (!v.is_number()) fail("expected number");
      return;
    case Kind::Boolean:
      if (!v.is_boolean()) fail("expected boolean");
      return;
    case Kind::Null:
      if (!v.is_null()) fail("expected null");
      return;
    case Kind::Nullable:
      if (!v.is_null()) n.children[0].check(v, path);
      return;
    case Kind::Enum:
      if (!v.is_string() ||
          std::find(n.values.begin(), n.values.end(), v.get<std::string>()) == n.values.end()) {
        fail("value not in vocabulary");
      }
      return;
  }
}

namespace {

// End (exclusive) of the balanced bracket run starting at `start`, honoring
// string literals; npos when unbalanced.
std::size_t balanced_end(std::string_view s, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escape = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escape) {
        escape = false;
      } else if (c == '\\') {
        escape = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '{':
      case '[':
        stack.push_back(c);
        break;
      case '}':
      case ']': {
        const char want = c == '}' ? '{' : '[';
        if (stack.empty() || stack.back() != want) return std::string_view::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      }
      default:
        break;
    }
  }
  return std::string_view::npos;
}

std::optional<Json> try_parse(std::string_view s) {
  try {
    return Json::parse(s.begin(), s.end(), nullptr, true, true);
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

std::optional<Json> scan(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{' && s[i] != '[') continue;
    const auto end = balanced_end(s, i);
    if (end == std::string_view::npos) continue;
    if (auto v = try_parse(s.substr(i, end - i))) return v;
  }
  return std::nullopt;
}

// Bodies of ``` fenced blocks in order.
std::vector<std::string_view> fenced_blocks(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto open = s.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body = s.find('\n', open);
    if (body == std::string_view::npos) break;
    // A fence directly followed by JSON on the same line ("```json{") keeps that text.
    const auto first_bracket = s.find_first_of("{[", open + 3);
    if (first_bracket != std::string_view::npos && first_bracket < body) body = first_bracket;
    else body += 1;
    const auto close = s.find("```", body);
    if (close == std::string_view::npos) {
      out.push_back(s.substr(body));
      break;
    }
    out.push_back(s.substr(body, close - body));
    pos = close + 3;
  }
  return out;
}

}  // namespace

std::optional<Json> first_json_value(std::string_view raw) {
  for (auto block : fenced_blocks(raw)) {
    if (auto v = scan(block)) return v;
  }
  return scan(raw);
}

Json extract_json(std::string_view raw, const Shape& expected) {
  auto v = first_json_value(raw);
  if (!v) {
    std::string excerpt(raw.substr(0, 120));
    throw ParseError("no parseable JSON value in reply: " + excerpt);
  }
  expected.check(*v);
  return *v;
}

}  // namespace vplay
