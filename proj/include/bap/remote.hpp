#pragma once

// Configuration-driven HTTP adapters for remote completion and embedding
// services. Vendor APIs differ only in where fields live, so the request body
// is a JSON template and every field is addressed by a JSON pointer.
//
// Provider config (JSON):
//   {
//     "kind": "remote",
//     "endpoint": "https://api.example.com/v1/chat/completions",
//     "auth_header": "Authorization",      // omitted: no auth
//     "auth_env": "OPENAI_API_KEY",        // env var holding the credential
//     "auth_prefix": "Bearer ",
//     "request_template": {},              // extra fixed fields
//     "model_pointer": "/model",
//     "temperature_pointer": "/temperature",
//     "max_tokens_pointer": "/max_tokens",
//     "messages_pointer": "/messages",     // chat style, or
//     "prompt_pointer": "",                // raw prompt string at this pointer
//     "response_pointer": "/choices/0/message/content",
//     "role_mapping": "single_user",       // or "system_split"
//     "user_role": "user", "system_role": "system",
//     "max_attempts": 5, "initial_backoff_ms": 500, "max_backoff_ms": 30000,
//     "max_in_flight": 4, "requests_per_minute": 60,
//     "timeout_s": 120
//   }
//
// Embedding configs use "input_pointer" (default "/input"), "model",
// "response_pointer" (default "/data/0/embedding") and "dimension".

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <bap/provider.hpp>
#include <bap/retrieval.hpp>

#include "json.hpp"

#include <cstdlib>
#include <memory>
#include <string>

namespace bap {

struct HttpTarget {
  std::string origin;  // scheme://host[:port]
  std::string path;

  static HttpTarget parse(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint is not an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }
};

struct RemoteConfig {
  std::string endpoint;
  std::string auth_header;
  std::string auth_env;
  std::string auth_prefix = "Bearer ";
  nlohmann::json request_template = nlohmann::json::object();
  std::string model_pointer = "/model";
  std::string temperature_pointer = "/temperature";
  std::string max_tokens_pointer = "/max_tokens";
  std::string messages_pointer = "/messages";
  std::string prompt_pointer;
  std::string response_pointer = "/choices/0/message/content";
  std::string role_mapping = "single_user";
  std::string user_role = "user";
  std::string system_role = "system";
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
  std::size_t requests_per_minute = 60;
  int timeout_s = 120;

  // embedding adapters
  std::string model;
  std::string input_pointer = "/input";
  std::size_t dimension = 0;

  static RemoteConfig from_json(const nlohmann::json& j, bool embedding = false) {
    RemoteConfig c;
    if (embedding) c.response_pointer = "/data/0/embedding";
    c.endpoint = j.value("endpoint", std::string{});
    if (c.endpoint.empty()) throw ConfigError("provider config: endpoint is required");
    c.auth_header = j.value("auth_header", c.auth_header);
    c.auth_env = j.value("auth_env", c.auth_env);
    c.auth_prefix = j.value("auth_prefix", c.auth_prefix);
    c.request_template = j.value("request_template", c.request_template);
    if (!c.request_template.is_object()) throw ConfigError("provider config: request_template must be an object");
    c.model_pointer = j.value("model_pointer", c.model_pointer);
    c.temperature_pointer = j.value("temperature_pointer", c.temperature_pointer);
    c.max_tokens_pointer = j.value("max_tokens_pointer", c.max_tokens_pointer);
    c.messages_pointer = j.value("messages_pointer", c.messages_pointer);
    c.prompt_pointer = j.value("prompt_pointer", c.prompt_pointer);
    c.response_pointer = j.value("response_pointer", c.response_pointer);
    c.role_mapping = j.value("role_mapping", c.role_mapping);
    if (c.role_mapping != "single_user" && c.role_mapping != "system_split")
      throw ConfigError("provider config: role_mapping must be single_user or system_split");
    c.user_role = j.value("user_role", c.user_role);
    c.system_role = j.value("system_role", c.system_role);
    c.retry.max_attempts = j.value("max_attempts", c.retry.max_attempts);
    c.retry.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", 500));
    c.retry.max_backoff = std::chrono::milliseconds(j.value("max_backoff_ms", 30000));
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.model = j.value("model", c.model);
    c.input_pointer = j.value("input_pointer", c.input_pointer);
    c.dimension = j.value("dimension", c.dimension);
    return c;
  }
};

namespace detail {

inline void set_at(nlohmann::json& doc, const std::string& pointer, nlohmann::json value) {
  if (pointer.empty()) return;
  try {
    doc[nlohmann::json::json_pointer(pointer)] = std::move(value);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad JSON pointer '" + pointer + "': " + e.what());
  }
}

// POSTs a JSON body and returns the parsed JSON response. Maps HTTP outcomes
// onto provider error kinds.
class JsonPoster {
 public:
  explicit JsonPoster(const RemoteConfig& cfg) : cfg_(cfg), target_(HttpTarget::parse(cfg.endpoint)) {}

  nlohmann::json post(const nlohmann::json& body) const {
    httplib::Client cli(target_.origin);
    cli.set_connection_timeout(std::chrono::seconds(cfg_.timeout_s));
    cli.set_read_timeout(std::chrono::seconds(cfg_.timeout_s));
    cli.set_write_timeout(std::chrono::seconds(cfg_.timeout_s));
    httplib::Headers headers;
    if (!cfg_.auth_header.empty()) {
      const char* secret = cfg_.auth_env.empty() ? nullptr : std::getenv(cfg_.auth_env.c_str());
      if (!secret || !*secret)
        throw ProviderError(ProviderErrorKind::authentication, "credential env var " + cfg_.auth_env + " is not set");
      headers.emplace(cfg_.auth_header, cfg_.auth_prefix + secret);
    }
    auto res = cli.Post(target_.path, headers, body.dump(), "application/json");
    if (!res) throw ProviderError(ProviderErrorKind::transient, "HTTP error: " + httplib::to_string(res.error()));
    int status = res->status;
    if (status == 401 || status == 403)
      throw ProviderError(ProviderErrorKind::authentication, "HTTP " + std::to_string(status));
    if (status == 408 || status == 409 || status == 429 || status >= 500)
      throw ProviderError(ProviderErrorKind::transient, "HTTP " + std::to_string(status));
    if (status < 200 || status >= 300)
      throw ProviderError(ProviderErrorKind::rejected, "HTTP " + std::to_string(status) + ": " + res->body);
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProviderError(ProviderErrorKind::malformed_response, "response body is not JSON");
    }
  }

 private:
  const RemoteConfig& cfg_;
  HttpTarget target_;
};

inline const nlohmann::json& at_pointer(const nlohmann::json& doc, const std::string& pointer) {
  try {
    return doc.at(nlohmann::json::json_pointer(pointer));
  } catch (const nlohmann::json::exception&) {
    throw ProviderError(ProviderErrorKind::malformed_response, "response has nothing at " + pointer);
  }
}

}  // namespace detail

class RemoteCompletionProvider final : public CompletionProvider {
 public:
  RemoteCompletionProvider(std::string label, RemoteConfig cfg, Sleeper sleep = real_sleep)
      : label_(std::move(label)),
        cfg_(std::move(cfg)),
        limiter_(cfg_.max_in_flight, cfg_.requests_per_minute),
        sleep_(std::move(sleep)) {}

  std::string name() const override { return label_; }

  // The outgoing JSON body for a request.
  nlohmann::json request_body(const CompletionRequest& r) const {
    nlohmann::json body = cfg_.request_template;
    detail::set_at(body, cfg_.model_pointer, r.model_id);
    detail::set_at(body, cfg_.temperature_pointer, r.temperature);
    detail::set_at(body, cfg_.max_tokens_pointer, r.max_new_tokens);
    if (!cfg_.prompt_pointer.empty()) {
      detail::set_at(body, cfg_.prompt_pointer, r.prompt.text);
      return body;
    }
    nlohmann::json messages = nlohmann::json::array();
    const SectionSpan* sys = cfg_.role_mapping == "system_split" ? r.prompt.section("system") : nullptr;
    if (sys) {
      std::string_view t(r.prompt.text);
      messages.push_back({{"role", cfg_.system_role}, {"content", t.substr(sys->begin, sys->end - sys->begin)}});
      std::string rest(t.substr(0, sys->begin));
      rest += t.substr(sys->end);
      messages.push_back({{"role", cfg_.user_role}, {"content", rest}});
    } else {
      messages.push_back({{"role", cfg_.user_role}, {"content", r.prompt.text}});
    }
    detail::set_at(body, cfg_.messages_pointer, std::move(messages));
    return body;
  }

  CompletionRecord complete(const CompletionRequest& request) override {
    auto body = request_body(request);
    detail::JsonPoster poster(cfg_);
    int attempts = 0;
    auto started = std::chrono::steady_clock::now();
    auto response = with_retries(
        [&] {
          ++attempts;
          auto permit = limiter_.acquire();
          return poster.post(body);
        },
        cfg_.retry, sleep_);
    const auto& text = detail::at_pointer(response, cfg_.response_pointer);
    if (!text.is_string())
      throw ProviderError(ProviderErrorKind::malformed_response, cfg_.response_pointer + " is not a string");
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    nlohmann::json meta = {{"provider", label_}, {"endpoint", cfg_.endpoint}, {"attempts", attempts}};
    if (response.contains("model")) meta["model"] = response["model"];
    if (response.contains("usage")) meta["usage"] = response["usage"];
    return {request_hash(request), text.get<std::string>(), latency.count(), std::move(meta), utc_now_iso8601()};
  }

  const RateLimiter& limiter() const { return limiter_; }

 private:
  std::string label_;
  RemoteConfig cfg_;
  RateLimiter limiter_;
  Sleeper sleep_;
};

class RemoteEmbedding final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedding(RemoteConfig cfg, Sleeper sleep = real_sleep)
      : cfg_(std::move(cfg)), limiter_(cfg_.max_in_flight, cfg_.requests_per_minute), sleep_(std::move(sleep)) {
    if (cfg_.dimension == 0) throw ConfigError("embedding config: dimension is required");
  }

  std::string name() const override { return "remote:" + cfg_.model + "@" + cfg_.endpoint; }
  std::size_t dimension() const override { return cfg_.dimension; }

  Embedding embed(std::string_view text) const override {
    nlohmann::json body = cfg_.request_template;
    if (!cfg_.model.empty()) detail::set_at(body, cfg_.model_pointer, cfg_.model);
    detail::set_at(body, cfg_.input_pointer, std::string(text));
    detail::JsonPoster poster(cfg_);
    auto response = with_retries(
        [&] {
          auto permit = limiter_.acquire();
          return poster.post(body);
        },
        cfg_.retry, sleep_);
    const auto& arr = detail::at_pointer(response, cfg_.response_pointer);
    if (!arr.is_array()) throw ProviderError(ProviderErrorKind::malformed_response, "embedding is not an array");
    Embedding v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number()) throw ProviderError(ProviderErrorKind::malformed_response, "non-numeric embedding component");
      v.push_back(x.get<double>());
    }
    normalize(v);
    return v;
  }

 private:
  RemoteConfig cfg_;
  mutable RateLimiter limiter_;
  Sleeper sleep_;
};

}  // namespace bap
