#pragma once

// The one path to every model: OpenAI-style chat completions and embeddings
// with retries, a per-endpoint concurrency cap and an audit trail.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vplay/random.hpp"
#include "vplay/records.hpp"

namespace vplay {

struct EndpointConfig {
  std::string base_url;      // http(s)://host[:port]/v1, "mock:offline" or "mock:script:<file>"
  std::string model_name;
  std::string api_key_env;   // name of the env var holding the key; may be empty for mocks
  double temperature = 0.7;
  int max_parallel = 4;
  int max_retries = 3;
  std::chrono::milliseconds timeout{120000};
};

void validate(const EndpointConfig& c);

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::vector<Message> messages;
  std::optional<int> max_tokens;
  std::optional<double> temperature;  // overrides the endpoint default (judges use 0)
  std::optional<std::uint64_t> seed;  // forwarded on the wire; part of the request digest
  std::string tag;                    // audit label, e.g. "annotate:g1:batch3"
};

void validate(const ChatRequest& r);

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
  int attempts = 1;
};

// Stable digest of the request content (messages and seed).
std::string request_digest(const ChatRequest& r);

// OpenAI wire body for a chat request.
Json chat_body(const EndpointConfig& c, const ChatRequest& r);

struct WireReply {
  int status = 200;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
 public:
  virtual ~Transport() = default;
  // POST `body` to `route` ("/chat/completions" or "/embeddings"). Connection
  // failures throw TransportError; any HTTP status is returned.
  virtual WireReply post(const std::string& route, const std::string& body, const Headers& headers,
                         std::chrono::milliseconds timeout) = 0;
};

// Append-only JSONL audit file shared by every gateway in a run.
class AuditLog {
 public:
  explicit AuditLog(std::filesystem::path path);
  void append(const Json& entry);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

struct GatewayOptions {
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds backoff_cap{30000};
  std::function<void(std::chrono::milliseconds)> sleeper;  // defaults to sleep_for
  std::uint64_t jitter_seed = 0x5eed;
  std::shared_ptr<AuditLog> audit;
  std::size_t embed_batch = 64;
  std::string role;  // recorded in audit entries
};

class Gateway {
 public:
  Gateway(EndpointConfig config, std::shared_ptr<Transport> transport, GatewayOptions options = {});

  ChatResponse chat(const ChatRequest& request);

  // One unit-norm vector per input, all of one dimension.
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

  const EndpointConfig& config() const { return config_; }
  std::size_t wire_requests() const { return wire_requests_.load(); }

 private:
  WireReply send(const std::string& route, const Json& body, const std::string& tag, int& attempts);
  std::chrono::milliseconds backoff(int retry);

  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  std::string api_key_;

  std::mutex slot_mu_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;

  std::mutex jitter_mu_;
  Rng jitter_;
  std::atomic<std::size_t> wire_requests_{0};
};

// Transport for `config.base_url`.
std::shared_ptr<Transport> make_transport(const EndpointConfig& config);

}  // namespace vplay
