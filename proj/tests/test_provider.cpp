#include <bap/provider.hpp>

#include <gtest/gtest.h>

#include <thread>

#include "support.hpp"

using namespace bap;
using namespace bap::test;
using enum Color;
using namespace std::chrono_literals;

namespace {

TurnPair pair_of(std::string game, std::size_t turn, std::string instruction, std::vector<Action> gold) {
  TurnPair p;
  p.game_id = std::move(game);
  p.turn_index = turn;
  p.instruction = std::move(instruction);
  p.gold_actions = std::move(gold);
  return p;
}

CompletionRequest request_for(const TurnPair& p, std::string model = "m", double temperature = 0.0) {
  CompletionRequest r;
  r.model_id = std::move(model);
  r.prompt.text = "prompt for " + p.instruction;
  r.temperature = temperature;
  r.turn = key_of(p);
  return r;
}

class ScriptedProvider final : public CompletionProvider {
 public:
  std::string name() const override { return "scripted"; }
  CompletionRecord complete(const CompletionRequest& r) override {
    ++calls;
    return {request_hash(r), "reply " + std::to_string(calls.load()), 12, {{"n", calls.load()}}, "2024-01-01T00:00:00Z"};
  }
  std::atomic<int> calls{0};
};

}  // namespace

TEST(Request, HashCoversParameters) {
  auto p = pair_of("g", 0, "x", {});
  auto base = request_for(p);
  EXPECT_EQ(base.temperature, 0.0);
  EXPECT_EQ(base.max_new_tokens, 500);
  auto h = request_hash(base);
  EXPECT_EQ(h.size(), 64u);
  EXPECT_NE(request_hash(request_for(p, "m", 0.5)), h);
  EXPECT_NE(request_hash(request_for(p, "other")), h);
  auto tokens = base;
  tokens.max_new_tokens = 100;
  EXPECT_NE(request_hash(tokens), h);
  auto other_turn = base;
  other_turn.turn = {"h", 3};
  EXPECT_EQ(request_hash(other_turn), h);
}

TEST(Echo, EmitsCanonicalGold) {
  auto p = pair_of("g", 2, "build", {place(red, 0, 1, 0), pick(red, 0, 1, 0)});
  EchoOracle echo({p});
  auto rec = echo.complete(request_for(p));
  EXPECT_EQ(rec.response_text, "place(color='red',x=0,y=1,z=0)\npick(color='red',x=0,y=1,z=0)");
  EXPECT_EQ(extract_actions(rec.response_text).actions, p.gold_actions);
  EXPECT_EQ(rec.timestamp, kEpochTimestamp);
  auto unknown = request_for(pair_of("nope", 0, "", {}));
  EXPECT_THROW(echo.complete(unknown), ProviderError);
}

TEST(NearestNeighbor, EqualsTopOneGold) {
  std::vector<TurnPair> train = {pair_of("t", 0, "start with a column of 5 red bricks", {place(red, 0, 1, 0)}),
                                 pair_of("t", 1, "remove the middle block", {pick(blue, 1, 1, 1)}),
                                 pair_of("t", 2, "add two lines of purple bricks", {place(purple, 2, 1, 2)})};
  auto lex = std::make_shared<LexicalEmbedding>();
  auto index = std::make_shared<ExampleIndex>(build_index(*lex, train));
  std::vector<TurnPair> test = {pair_of("q", 0, "start with a column of 5 purple bricks", {}),
                                pair_of("q", 1, "take out the block in the middle", {}),
                                pair_of("q", 2, "two purple lines please", {})};
  NearestNeighbor nn(index, lex, test);
  for (const auto& q : test) {
    auto expect = serialize_actions(top_k(*index, *lex, q.instruction, 1).front().pair->gold_actions);
    EXPECT_EQ(nn.complete(request_for(q)).response_text, expect);
  }
}

TEST(Cache, SecondCallIsAHit) {
  TempDir dir;
  ResponseCache cache(dir.path());
  ScriptedProvider prov;
  auto r = request_for(pair_of("g", 0, "x", {}));
  CacheStats stats;
  auto a = cached_complete(prov, r, cache, &stats);
  auto b = cached_complete(prov, r, cache, &stats);
  EXPECT_EQ(prov.calls.load(), 1);
  EXPECT_EQ(stats.hits.load(), 1u);
  EXPECT_EQ(stats.misses.load(), 1u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(cache.size(), 1u);
  auto path = cache.path_for(a.request_hash);
  EXPECT_EQ(path.parent_path().filename().string(), a.request_hash.substr(2, 2));
  EXPECT_EQ(path.parent_path().parent_path().filename().string(), a.request_hash.substr(0, 2));

  cached_complete(prov, request_for(pair_of("g", 0, "x", {}), "m", 0.7), cache, &stats);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Cache, CorruptRecordIsAMissWithWarning) {
  TempDir dir;
  std::vector<std::string> warnings;
  ResponseCache cache(dir.path(), [&](const std::string& w) { warnings.push_back(w); });
  ScriptedProvider prov;
  auto r = request_for(pair_of("g", 0, "x", {}));
  auto first = cached_complete(prov, r, cache);
  auto path = cache.path_for(first.request_hash);
  auto j = nlohmann::json::parse(read_file(path));
  j["response_text"] = "tampered";
  write_file_atomic(path, j.dump());
  auto second = cached_complete(prov, r, cache);
  EXPECT_EQ(prov.calls.load(), 2);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_NE(second.response_text, "tampered");

  write_file_atomic(path, "{not json");
  EXPECT_FALSE(cache.lookup(first.request_hash));
}

TEST(Cache, MockKeysIncludeTheTurn) {
  TempDir dir;
  ResponseCache cache(dir.path());
  auto a = pair_of("g", 0, "same words", {place(red, 0, 1, 0)});
  auto b = pair_of("g", 1, "same words", {place(blue, 0, 1, 0)});
  EchoOracle echo({a, b});
  auto ra = cached_complete(echo, request_for(a), cache);
  auto rb = cached_complete(echo, request_for(b), cache);
  EXPECT_NE(ra.request_hash, rb.request_hash);
  EXPECT_EQ(rb.response_text, serialize_actions(b.gold_actions));
}

TEST(Retry, BacksOffThenSucceeds) {
  std::vector<std::chrono::milliseconds> slept;
  RetryPolicy policy;
  int attempts = 0;
  auto result = with_retries(
      [&] {
        if (++attempts < 4) throw ProviderError(ProviderErrorKind::transient, "503");
        return 7;
      },
      policy, [&](auto d) { slept.push_back(d); });
  EXPECT_EQ(result, 7);
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{500ms, 1000ms, 2000ms}));
}

TEST(Retry, ExhaustionIsDistinct) {
  RetryPolicy policy;
  policy.max_attempts = 3;
  int attempts = 0;
  try {
    with_retries([&]() -> int { ++attempts; throw ProviderError(ProviderErrorKind::transient, "429"); }, policy,
                 [](auto) {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::retries_exhausted);
  }
  EXPECT_EQ(attempts, 3);
}

TEST(Retry, NonTransientIsNotRetried) {
  int attempts = 0;
  for (auto kind : {ProviderErrorKind::authentication, ProviderErrorKind::malformed_response, ProviderErrorKind::rejected}) {
    attempts = 0;
    try {
      with_retries([&]() -> int { ++attempts; throw ProviderError(kind, "x"); }, RetryPolicy{}, [](auto) {});
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.kind(), kind);
    }
    EXPECT_EQ(attempts, 1);
  }
}

TEST(Retry, BackoffIsCapped) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff(1), 500ms);
  EXPECT_EQ(p.backoff(7), 30000ms);
  EXPECT_EQ(p.backoff(20), 30000ms);
}

TEST(RateLimiter, BoundsInFlight) {
  RateLimiter rl(2, 1000);
  std::atomic<int> in_flight{0}, peak{0}, done{0};
  std::vector<std::jthread> ts;
  for (int i = 0; i < 8; ++i)
    ts.emplace_back([&] {
      auto permit = rl.acquire();
      int now = ++in_flight;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(5ms);
      --in_flight;
      ++done;
    });
  ts.clear();
  EXPECT_EQ(done.load(), 8);
  EXPECT_LE(peak.load(), 2);
  EXPECT_LE(rl.max_observed_in_flight(), 2u);
}

TEST(RateLimiter, DelaysButNeverDropsPerWindow) {
  RateLimiter rl(10, 3, 100ms);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 7; ++i) auto permit = rl.acquire();
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, 200ms);  // requests 4-6 wait one window, 7 waits two
}
