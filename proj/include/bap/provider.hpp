#pragma once

// Completion backends, the content-addressed response cache, retry with
// exponential backoff, and a request rate limiter.

#include <bap/corpus.hpp>
#include <bap/dsl.hpp>
#include <bap/prompting.hpp>
#include <bap/retrieval.hpp>
#include <bap/util.hpp>

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

namespace bap {

struct CompletionRequest {
  std::string model_id;
  PromptText prompt;
  double temperature = 0.0;
  int max_new_tokens = 500;
  // Which turn the prompt was built for. Not part of the request hash; only
  // the mock providers read it.
  TurnKey turn;
};

// Content hash of (model_id, prompt text, temperature, max_new_tokens), plus
// `salt` when non-empty.
inline std::string request_hash(const CompletionRequest& r, const std::string& salt = {}) {
  nlohmann::json j = {{"model_id", r.model_id},
                      {"prompt", r.prompt.text},
                      {"temperature", r.temperature},
                      {"max_new_tokens", r.max_new_tokens}};
  if (!salt.empty()) j["salt"] = salt;
  return sha256_hex(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

struct CompletionRecord {
  std::string request_hash;
  std::string response_text;
  long long latency_ms = 0;
  nlohmann::json provider_meta = nlohmann::json::object();
  std::string timestamp;  // ISO-8601 UTC

  friend bool operator==(const CompletionRecord&, const CompletionRecord&) = default;
};

inline nlohmann::json to_json(const CompletionRecord& r) {
  return {{"request_hash", r.request_hash},
          {"response_text", r.response_text},
          {"response_digest", sha256_hex(r.response_text)},
          {"latency_ms", r.latency_ms},
          {"provider_meta", r.provider_meta},
          {"timestamp", r.timestamp}};
}

// Throws Error when fields are missing or the response digest does not match.
inline CompletionRecord completion_record_from_json(const nlohmann::json& j) {
  try {
    CompletionRecord r;
    r.request_hash = j.at("request_hash").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<long long>();
    r.provider_meta = j.value("provider_meta", nlohmann::json::object());
    r.timestamp = j.value("timestamp", std::string{});
    if (j.at("response_digest").get<std::string>() != sha256_hex(r.response_text))
      throw Error("response digest mismatch");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad completion record: ") + e.what());
  }
}

inline std::string utc_now_iso8601() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Fixed stamp for deterministic providers, so repeated runs are byte-identical.
inline constexpr const char* kEpochTimestamp = "1970-01-01T00:00:00Z";

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::string name() const = 0;
  // True when complete() is a pure function of the request.
  virtual bool deterministic() const { return false; }
  virtual CompletionRecord complete(const CompletionRequest& request) = 0;
  // Extra cache-key material. Providers whose answer depends on more than the
  // request content (the mocks read the turn) must return it here, or two
  // turns with identical prompts would share one cached answer.
  virtual std::string cache_salt(const CompletionRequest&) const { return {}; }
};

inline std::string turn_salt(const TurnKey& k) { return k.game_id + "#" + std::to_string(k.turn_index); }

// Emits the gold code of the requested turn. Scores F1 = 1 by construction.
class EchoOracle final : public CompletionProvider {
 public:
  explicit EchoOracle(const std::vector<TurnPair>& pairs) {
    for (const auto& p : pairs) gold_[{p.game_id, p.turn_index}] = p.gold_actions;
  }

  std::string name() const override { return "echo-oracle"; }
  bool deterministic() const override { return true; }
  std::string cache_salt(const CompletionRequest& r) const override { return turn_salt(r.turn); }

  CompletionRecord complete(const CompletionRequest& request) override {
    auto it = gold_.find(request.turn);
    if (it == gold_.end())
      throw ProviderError(ProviderErrorKind::rejected,
                          "echo-oracle: unknown turn " + request.turn.game_id + "#" +
                              std::to_string(request.turn.turn_index));
    return {request_hash(request, cache_salt(request)), serialize_actions(it->second), 0, {{"provider", name()}}, kEpochTimestamp};
  }

 private:
  std::map<TurnKey, std::vector<Action>> gold_;
};

// Emits the gold code of the most similar training turn.
class NearestNeighbor final : public CompletionProvider {
 public:
  NearestNeighbor(std::shared_ptr<const ExampleIndex> index, std::shared_ptr<const EmbeddingProvider> embedder,
                  const std::vector<TurnPair>& turns)
      : index_(std::move(index)), embedder_(std::move(embedder)) {
    for (const auto& p : turns) instruction_[{p.game_id, p.turn_index}] = p.instruction;
  }

  std::string name() const override { return "nearest-neighbor"; }
  bool deterministic() const override { return true; }
  std::string cache_salt(const CompletionRequest& r) const override { return turn_salt(r.turn); }

  CompletionRecord complete(const CompletionRequest& request) override {
    auto it = instruction_.find(request.turn);
    if (it == instruction_.end())
      throw ProviderError(ProviderErrorKind::rejected, "nearest-neighbor: unknown turn " + request.turn.game_id);
    auto hits = top_k(*index_, *embedder_, it->second, 1);
    nlohmann::json meta = {{"provider", name()}};
    std::string text;
    if (!hits.empty()) {
      text = serialize_actions(hits.front().pair->gold_actions);
      meta["neighbor"] = {{"game_id", hits.front().pair->game_id}, {"turn_index", hits.front().pair->turn_index}};
    }
    return {request_hash(request, cache_salt(request)), std::move(text), 0, std::move(meta), kEpochTimestamp};
  }

 private:
  std::shared_ptr<const ExampleIndex> index_;
  std::shared_ptr<const EmbeddingProvider> embedder_;
  std::map<TurnKey, std::string> instruction_;
};

// --- cache -------------------------------------------------------------------

// One JSON file per record at <root>/<h[0:2]>/<h[2:4]>/<h>.json. Existing
// valid records are never overwritten.
class ResponseCache {
 public:
  using WarningSink = std::function<void(const std::string&)>;

  explicit ResponseCache(std::filesystem::path root, WarningSink warn = default_warning)
      : root_(std::move(root)), warn_(std::move(warn)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path path_for(const std::string& hash) const {
    return root_ / hash.substr(0, 2) / hash.substr(2, 2) / (hash + ".json");
  }

  std::optional<CompletionRecord> lookup(const std::string& hash) const { return read(hash, true); }

  // A corrupt record at the same path is replaced.
  void store(const CompletionRecord& rec) {
    std::lock_guard lk(mu_);
    if (read(rec.request_hash, false)) return;
    write_file_atomic(path_for(rec.request_hash), to_json(rec).dump(2) + "\n");
  }

  std::size_t size() const {
    std::size_t n = 0;
    std::error_code ec;
    if (!std::filesystem::exists(root_, ec)) return 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root_))
      if (e.is_regular_file() && e.path().extension() == ".json") ++n;
    return n;
  }

  static void default_warning(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

 private:
  std::optional<CompletionRecord> read(const std::string& hash, bool warn) const {
    auto p = path_for(hash);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
      auto rec = completion_record_from_json(nlohmann::json::parse(read_file(p)));
      if (rec.request_hash != hash) throw Error("record filed under the wrong hash");
      return rec;
    } catch (const std::exception& e) {
      if (warn) warn_("cache record " + p.string() + " is corrupt (" + e.what() + "); treating as miss");
      return std::nullopt;
    }
  }

  std::filesystem::path root_;
  WarningSink warn_;
  std::mutex mu_;
};

struct CacheStats {
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> misses{0};
};

inline CompletionRecord cached_complete(CompletionProvider& provider, const CompletionRequest& request,
                                        ResponseCache& cache, CacheStats* stats = nullptr) {
  auto hash = request_hash(request, provider.cache_salt(request));
  if (auto hit = cache.lookup(hash)) {
    if (stats) ++stats->hits;
    return *hit;
  }
  if (stats) ++stats->misses;
  auto rec = provider.complete(request);
  rec.request_hash = hash;
  cache.store(rec);
  return rec;
}

// --- retry and rate limiting ------------------------------------------------------

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  std::chrono::milliseconds backoff(int attempt) const {  // attempt is 1-based
    double ms = static_cast<double>(initial_backoff.count());
    for (int i = 1; i < attempt; ++i) ms *= multiplier;
    return std::chrono::milliseconds(static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count()))));
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

// Calls fn until it succeeds or fails with a non-transient error. Transient
// failures past the attempt limit become retries_exhausted.
template <class Fn>
auto with_retries(Fn&& fn, const RetryPolicy& policy, const Sleeper& sleep = real_sleep) -> decltype(fn()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      if (!e.retryable()) throw;
      if (attempt >= policy.max_attempts)
        throw ProviderError(ProviderErrorKind::retries_exhausted,
                            std::to_string(attempt) + " attempts, last: " + e.what());
      sleep(policy.backoff(attempt));
    }
  }
}

// Bounds concurrent requests and requests started per window. acquire()
// blocks until both limits allow another request; nothing is dropped.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  RateLimiter(std::size_t max_in_flight, std::size_t per_window,
              std::chrono::milliseconds window = std::chrono::minutes(1))
      : max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
        per_window_(std::max<std::size_t>(1, per_window)),
        window_(window) {}

  class Permit {
   public:
    explicit Permit(RateLimiter* rl) : rl_(rl) {}
    Permit(Permit&& o) noexcept : rl_(std::exchange(o.rl_, nullptr)) {}
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (rl_) rl_->release();
    }

   private:
    RateLimiter* rl_;
  };

  Permit acquire() {
    std::unique_lock lk(mu_);
    for (;;) {
      auto now = Clock::now();
      while (!starts_.empty() && now - starts_.front() >= window_) starts_.pop_front();
      if (in_flight_ < max_in_flight_ && starts_.size() < per_window_) break;
      if (in_flight_ >= max_in_flight_)
        cv_.wait(lk);
      else
        cv_.wait_until(lk, starts_.front() + window_);
    }
    ++in_flight_;
    starts_.push_back(Clock::now());
    max_observed_ = std::max(max_observed_, in_flight_);
    return Permit(this);
  }

  std::size_t max_observed_in_flight() const {
    std::lock_guard lk(mu_);
    return max_observed_;
  }

 private:
  void release() {
    {
      std::lock_guard lk(mu_);
      --in_flight_;
    }
    cv_.notify_all();
  }

  std::size_t max_in_flight_;
  std::size_t per_window_;
  std::chrono::milliseconds window_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::size_t max_observed_ = 0;
  std::deque<Clock::time_point> starts_;
};

}  // namespace bap
