#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vplay {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A domain invariant was violated; `field()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A line of a record file could not be decoded or validated.
class RecordError : public Error {
 public:
  RecordError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

// Non-success HTTP status (or malformed body) from an endpoint.
class EndpointError : public Error {
 public:
  EndpointError(int status, std::string body_excerpt, const std::string& message)
      : Error(message), status_(status), body_(std::move(body_excerpt)) {}
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

// No parseable JSON value in a model reply.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A JSON value parsed but did not match the expected shape.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::vector<std::string> missing,
              std::vector<std::string> extra)
      : Error(message), missing_(std::move(missing)), extra_(std::move(extra)) {}
  explicit SchemaError(const std::string& message) : Error(message) {}
  const std::vector<std::string>& missing_keys() const noexcept { return missing_; }
  const std::vector<std::string>& extra_keys() const noexcept { return extra_; }

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

class StructuringError : public Error {
 public:
  StructuringError(const std::string& message, std::vector<std::string> missing_headers)
      : Error(message), missing_(std::move(missing_headers)) {}
  const std::vector<std::string>& missing_headers() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class SynthesisError : public Error {
 public:
  using Error::Error;
};

class ClusteringError : public Error {
 public:
  using Error::Error;
};

// A metric has no defined value for its input (e.g. zero bigrams).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::vector<std::string> keys)
      : Error(message), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace vplay
