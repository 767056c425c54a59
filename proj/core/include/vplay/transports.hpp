#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "vplay/gateway.hpp"

namespace vplay {

// Real HTTP(S) transport; `base_url` like "https://api.example.com/v1".
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);
  WireReply post(const std::string& route, const std::string& body, const Headers& headers,
                 std::chrono::milliseconds timeout) override;

 private:
  std::string scheme_host_;
  std::string path_prefix_;
};

// In-process transport driven by a handler; counts calls and tracks the
// number of concurrent requests.
class MockTransport final : public Transport {
 public:
  using Handler = std::function<WireReply(const std::string& route, const Json& body)>;

  explicit MockTransport(Handler handler, std::chrono::milliseconds delay = std::chrono::milliseconds(0));

  WireReply post(const std::string& route, const std::string& body, const Headers& headers,
                 std::chrono::milliseconds timeout) override;

  std::size_t calls() const { return calls_.load(); }
  int peak_in_flight() const { return peak_.load(); }

  // Handler answering every chat request with fn(messages, seed).
  static Handler chat(std::function<std::string(const std::vector<Message>&, std::optional<std::uint64_t>)> fn);

  static WireReply chat_reply(const std::string& text);
  static WireReply embedding_reply(const std::vector<std::vector<double>>& vectors);

 private:
  Handler handler_;
  std::chrono::milliseconds delay_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

// Deterministic offline model: heuristic replies for every prompt family and
// a hashed bag-of-words embedder.
class OfflineTransport final : public Transport {
 public:
  WireReply post(const std::string& route, const std::string& body, const Headers& headers,
                 std::chrono::milliseconds timeout) override;
};

// Canned replies keyed by request digest, loaded from a JSONL file of
// {"digest": ..., "text": ...} lines. Unknown digests answer HTTP 404.
class ScriptTransport final : public Transport {
 public:
  explicit ScriptTransport(const std::filesystem::path& path);
  explicit ScriptTransport(std::map<std::string, std::string> replies);

  WireReply post(const std::string& route, const std::string& body, const Headers& headers,
                 std::chrono::milliseconds timeout) override;

 private:
  std::map<std::string, std::string> replies_;
};

Json decode_chat_messages(const Json& body, std::vector<Message>& out);

}  // namespace vplay
