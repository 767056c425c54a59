#include "vplay/transports.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <thread>

#include "vplay/error.hpp"
#include "vplay/offline_model.hpp"

namespace vplay {

// ---- http -------------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("base_url", "url lacks a scheme");
  const auto path_start = base_url.find('/', scheme_end + 3);
  scheme_host_ = base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

WireReply HttpTransport::post(const std::string& route, const std::string& body,
                              const Headers& headers, std::chrono::milliseconds timeout) {
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers h;
  std::string content_type = "application/json";
  for (const auto& [k, v] : headers) {
    if (k == "Content-Type") content_type = v;
    else h.emplace(k, v);
  }
  auto res = client.Post(path_prefix_ + route, h, body, content_type);
  if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

// ---- mock -------------------------------------------------------------

MockTransport::MockTransport(Handler handler, std::chrono::milliseconds delay)
    : handler_(std::move(handler)), delay_(delay) {}

WireReply MockTransport::post(const std::string& route, const std::string& body, const Headers&,
                              std::chrono::milliseconds) {
  ++calls_;
  const int now = ++in_flight_;
  int peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  struct Leave {
    std::atomic<int>& n;
    ~Leave() { --n; }
  } leave{in_flight_};
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return handler_(route, Json::parse(body));
}

Json decode_chat_messages(const Json& body, std::vector<Message>& out) {
  out.clear();
  for (const auto& m : body.at("messages")) {
    out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  return body;
}

MockTransport::Handler MockTransport::chat(
    std::function<std::string(const std::vector<Message>&, std::optional<std::uint64_t>)> fn) {
  return [fn = std::move(fn)](const std::string& route, const Json& body) -> WireReply {
    if (route != "/chat/completions") return {404, "unsupported route"};
    std::vector<Message> messages;
    decode_chat_messages(body, messages);
    std::optional<std::uint64_t> seed;
    if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
    return chat_reply(fn(messages, seed));
  };
}

WireReply MockTransport::chat_reply(const std::string& text) {
  Json j{{"object", "chat.completion"},
         {"choices", Json::array({{{"index", 0},
                                   {"message", {{"role", "assistant"}, {"content", text}}},
                                   {"finish_reason", "stop"}}})},
         {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
  return {200, j.dump()};
}

WireReply MockTransport::embedding_reply(const std::vector<std::vector<double>>& vectors) {
  Json data = Json::array();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    data.push_back({{"object", "embedding"}, {"index", i}, {"embedding", vectors[i]}});
  }
  return {200, Json{{"object", "list"}, {"data", data}}.dump()};
}

// ---- offline ------------------------------------------------------------

WireReply OfflineTransport::post(const std::string& route, const std::string& body, const Headers&,
                                 std::chrono::milliseconds) {
  const auto j = Json::parse(body);
  if (route == "/embeddings") {
    std::vector<std::vector<double>> vectors;
    for (const auto& t : j.at("input")) vectors.push_back(offline::hash_embedding(t.get<std::string>()));
    return MockTransport::embedding_reply(vectors);
  }
  if (route == "/chat/completions") {
    std::vector<Message> messages;
    decode_chat_messages(j, messages);
    std::optional<std::uint64_t> seed;
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    return MockTransport::chat_reply(offline::reply(messages, seed));
  }
  return {404, "unsupported route " + route};
}

// ---- script -------------------------------------------------------------

ScriptTransport::ScriptTransport(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mock script: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = Json::parse(line);
      replies_[j.at("digest").get<std::string>()] = j.at("text").get<std::string>();
    } catch (const Json::exception& e) {
      throw RecordError(line_no, std::string("bad mock script line: ") + e.what());
    }
  }
}

ScriptTransport::ScriptTransport(std::map<std::string, std::string> replies)
    : replies_(std::move(replies)) {}

WireReply ScriptTransport::post(const std::string& route, const std::string& body, const Headers&,
                                std::chrono::milliseconds) {
  if (route != "/chat/completions") return {404, "script transport serves chat only"};
  const auto j = Json::parse(body);
  ChatRequest req;
  decode_chat_messages(j, req.messages);
  if (j.contains("seed")) req.seed = j.at("seed").get<std::uint64_t>();
  const auto digest = request_digest(req);
  auto it = replies_.find(digest);
  if (it == replies_.end()) return {404, "no scripted reply for digest " + digest};
  return MockTransport::chat_reply(it->second);
}

}  // namespace vplay
