#include "vplay/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "vplay/digest.hpp"
#include "vplay/error.hpp"
#include "vplay/transports.hpp"

namespace vplay {

void validate(const EndpointConfig& c) {
  if (c.base_url.empty()) throw ValidationError("base_url", "endpoint base_url must be set");
  if (c.model_name.empty()) throw ValidationError("model_name", "endpoint model_name must be set");
  if (!(c.temperature >= 0.0)) throw ValidationError("temperature", "temperature must be >= 0");
  if (c.max_parallel < 1) throw ValidationError("max_parallel", "max_parallel must be >= 1");
  if (c.max_retries < 0) throw ValidationError("max_retries", "max_retries must be >= 0");
  if (c.timeout.count() <= 0) throw ValidationError("timeout", "timeout must be positive");
}

void validate(const ChatRequest& r) {
  if (r.messages.empty()) throw ValidationError("messages", "chat request without messages");
  for (std::size_t i = 0; i < r.messages.size(); ++i) {
    const auto& role = r.messages[i].role;
    if (role != "system" && role != "user" && role != "assistant") {
      throw ValidationError("messages", "unknown role '" + role + "'");
    }
    if (role == "system" && i != 0) {
      throw ValidationError("messages", "system message must come first");
    }
  }
}

std::string request_digest(const ChatRequest& r) {
  Json j = Json::array();
  for (const auto& m : r.messages) j.push_back({{"content", m.content}, {"role", m.role}});
  Json key{{"messages", j}};
  if (r.seed) key["seed"] = *r.seed;
  return sha256_hex(key.dump());
}

Json chat_body(const EndpointConfig& c, const ChatRequest& r) {
  Json messages = Json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  Json body{{"model", c.model_name},
            {"messages", messages},
            {"temperature", r.temperature.value_or(c.temperature)}};
  if (r.max_tokens) body["max_tokens"] = *r.max_tokens;
  if (r.seed) body["seed"] = *r.seed;
  return body;
}

// ---- audit ------------------------------------------------------------------

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot open audit log: " + path_.string());
}

void AuditLog::append(const Json& entry) {
  const auto line = entry.dump();
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

// ---- gateway ----------------------------------------------------------------

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body) { return body.substr(0, 300); }

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) {
    text.replace(pos, secret.size(), "[REDACTED]");
    pos += 10;
  }
  return text;
}

}  // namespace

Gateway::Gateway(EndpointConfig config, std::shared_ptr<Transport> transport, GatewayOptions options)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      options_(std::move(options)),
      jitter_(options_.jitter_seed) {
  validate(config_);
  if (!transport_) throw ValidationError("transport", "gateway needs a transport");
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (options_.embed_batch == 0) options_.embed_batch = 1;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

std::chrono::milliseconds Gateway::backoff(int retry) {
  const double base = static_cast<double>(options_.backoff_base.count());
  const double cap = static_cast<double>(options_.backoff_cap.count());
  const double ceiling = std::min(cap, base * std::pow(2.0, retry));
  double u = 0.0;
  {
    std::lock_guard lock(jitter_mu_);
    u = jitter_.uniform01();
  }
  return std::chrono::milliseconds(static_cast<std::int64_t>(u * ceiling));
}

WireReply Gateway::send(const std::string& route, const Json& body, const std::string& tag,
                        int& attempts) {
  Headers headers{{"Content-Type", "application/json"}};
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  const std::string payload = body.dump();

  {
    std::unique_lock lock(slot_mu_);
    slot_cv_.wait(lock, [&] { return in_flight_ < config_.max_parallel; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->slot_mu_);
        --g->in_flight_;
      }
      g->slot_cv_.notify_one();
    }
  } release{this};

  std::optional<WireReply> last_reply;
  std::string last_transport_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) options_.sleeper(backoff(attempt - 1));
    attempts = attempt + 1;
    ++wire_requests_;
    Json entry{{"role", options_.role}, {"tag", tag}, {"route", route}, {"attempt", attempts},
               {"model", config_.model_name}, {"request", body}};
    try {
      WireReply reply = transport_->post(route, payload, headers, config_.timeout);
      entry["status"] = reply.status;
      entry["response"] = redact(reply.body, api_key_);
      if (options_.audit) options_.audit->append(entry);
      if (reply.status >= 200 && reply.status < 300) return reply;
      if (!retryable(reply.status)) {
        throw EndpointError(reply.status, excerpt(reply.body),
                            "endpoint returned HTTP " + std::to_string(reply.status));
      }
      last_reply = std::move(reply);
      last_transport_error.clear();
    } catch (const TransportError& e) {
      entry["error"] = redact(e.what(), api_key_);
      if (options_.audit) options_.audit->append(entry);
      last_transport_error = e.what();
      last_reply.reset();
    }
  }
  if (last_reply) {
    throw EndpointError(last_reply->status, excerpt(last_reply->body),
                        "endpoint returned HTTP " + std::to_string(last_reply->status) + " after " +
                            std::to_string(attempts) + " attempts");
  }
  throw TransportError("transport failed after " + std::to_string(attempts) +
                       " attempts: " + last_transport_error);
}

ChatResponse Gateway::chat(const ChatRequest& request) {
  validate(request);
  const auto started = std::chrono::steady_clock::now();
  ChatResponse out;
  const auto reply = send("/chat/completions", chat_body(config_, request), request.tag, out.attempts);
  out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  try {
    const auto j = Json::parse(reply.body);
    out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      out.usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
      out.usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
    }
  } catch (const Json::exception&) {
    throw EndpointError(reply.status, excerpt(reply.body), "malformed chat completion body");
  }
  return out;
}

std::vector<std::vector<double>> Gateway::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("texts", "embed needs at least one text");
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.embed_batch) {
    const auto end = std::min(texts.size(), start + options_.embed_batch);
    Json body{{"model", config_.model_name},
              {"input", std::vector<std::string>(texts.begin() + start, texts.begin() + end)}};
    int attempts = 0;
    const auto reply = send("/embeddings", body, "embed:" + std::to_string(start), attempts);
    std::vector<std::vector<double>> batch(end - start);
    try {
      const auto j = Json::parse(reply.body);
      const auto& data = j.at("data");
      if (data.size() != batch.size()) {
        throw EndpointError(reply.status, excerpt(reply.body), "embedding count mismatch");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
        if (idx >= batch.size() || !batch[idx].empty()) {
          throw EndpointError(reply.status, excerpt(reply.body), "bad embedding index");
        }
        batch[idx] = data[i].at("embedding").get<std::vector<double>>();
      }
    } catch (const Json::exception&) {
      throw EndpointError(reply.status, excerpt(reply.body), "malformed embeddings body");
    }
    for (auto& v : batch) out.push_back(std::move(v));
  }
  const std::size_t dim = out.front().size();
  for (auto& v : out) {
    if (v.size() != dim || dim == 0) {
      throw EndpointError(200, "", "embedding dimension mismatch within batch");
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw EndpointError(200, "", "zero or non-finite embedding vector");
    }
    for (double& x : v) x /= norm;
  }
  return out;
}

std::shared_ptr<Transport> make_transport(const EndpointConfig& config) {
  const auto& url = config.base_url;
  if (url == "mock:offline") return std::make_shared<OfflineTransport>();
  constexpr std::string_view kScript = "mock:script:";
  if (url.rfind(kScript, 0) == 0) {
    return std::make_shared<ScriptTransport>(std::filesystem::path(url.substr(kScript.size())));
  }
  if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
    return std::make_shared<HttpTransport>(url);
  }
  throw ValidationError("base_url", "unsupported endpoint url: " + url);
}

}  // namespace vplay
