#include <bap/eval.hpp>

#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "support.hpp"

using namespace bap;
using namespace bap::test;
using enum Color;

namespace {

TurnMatch counts(std::size_t tp, std::size_t pred, std::size_t gold) {
  TurnMatch m;
  m.tp = tp;
  m.pred_count = pred;
  m.gold_count = gold;
  m.exact = tp == pred && tp == gold;
  return m;
}

}  // namespace

TEST(MatchTurn, Examples) {
  auto self = match_turn({place(green, 0, 1, 4)}, {place(green, 0, 1, 4)});
  EXPECT_EQ(self.tp, 1u);
  EXPECT_TRUE(self.exact);

  auto empty = match_turn({}, {place(red, 0, 1, 0)});
  EXPECT_EQ(empty.tp, 0u);
  EXPECT_FALSE(empty.exact);

  auto two = match_turn({place(red, 0, 1, 0), place(red, 0, 2, 0), place(blue, 1, 1, 0)},
                        {place(red, 0, 1, 0), place(red, 0, 2, 0), place(red, 0, 3, 0)});
  EXPECT_EQ(two.tp, 2u);
  EXPECT_FALSE(two.exact);
}

TEST(MatchTurn, DuplicatesMatchOnce) {
  auto m = match_turn({place(red, 0, 1, 0), place(red, 0, 1, 0), place(red, 0, 1, 0)}, {place(red, 0, 1, 0)});
  EXPECT_EQ(m.tp, 1u);
  auto k = match_turn({place(red, 0, 1, 0)}, {pick(red, 0, 1, 0)});
  EXPECT_EQ(k.tp, 0u);
}

TEST(MatchTurn, EqualsBipartiteOracleAndIsOrderFree) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    auto pred = random_small_actions(rng, 7), gold = random_small_actions(rng, 7);
    auto m = match_turn(pred, gold);
    ASSERT_EQ(m.tp, max_bipartite_matching(pred, gold));
    ASSERT_LE(m.tp, std::min(pred.size(), gold.size()));
    ASSERT_EQ(m.exact, m.tp == pred.size() && m.tp == gold.size());
    std::shuffle(pred.begin(), pred.end(), rng);
    std::shuffle(gold.begin(), gold.end(), rng);
    ASSERT_EQ(match_turn(pred, gold).tp, m.tp);
    auto more = pred;
    more.push_back(place(yellow, 5, 5, 5));
    ASSERT_EQ(match_turn(more, gold).tp, m.tp);
  }
}

TEST(MatchTurn, OrderedPrefixVariant) {
  std::vector<Action> gold = {place(red, 0, 1, 0), place(red, 0, 2, 0), place(red, 0, 3, 0)};
  std::vector<Action> swapped = {place(red, 0, 2, 0), place(red, 0, 1, 0), place(red, 0, 3, 0)};
  EXPECT_EQ(match_turn(swapped, gold, MatchMode::multiset).tp, 3u);
  EXPECT_EQ(match_turn(swapped, gold, MatchMode::ordered_prefix).tp, 0u);
  EXPECT_EQ(match_turn({gold[0], gold[1]}, gold, MatchMode::ordered_prefix).tp, 2u);
}

TEST(MicroF1, HandCase) {
  auto m = micro_f1({counts(2, 3, 3), counts(1, 1, 2)});
  EXPECT_NEAR(m.precision, 0.75, 1e-9);
  EXPECT_NEAR(m.recall, 0.6, 1e-9);
  EXPECT_NEAR(m.f1, 2.0 * 0.45 / 1.35, 1e-9);
  EXPECT_EQ(m.tp_sum, 3u);
  EXPECT_EQ(m.turn_count, 2u);
}

TEST(MicroF1, ZeroConventions) {
  auto none = micro_f1({});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  auto no_pred = micro_f1({counts(0, 0, 4)});
  EXPECT_EQ(no_pred.precision, 0.0);
  EXPECT_EQ(no_pred.f1, 0.0);
  EXPECT_EQ(micro_f1({counts(2, 2, 2), counts(1, 1, 1)}).f1, 1.0);
}

TEST(MicroF1, SingleTurnEqualsDirect) {
  auto m = micro_f1({counts(3, 4, 6)});
  double p = 3.0 / 4, r = 3.0 / 6;
  EXPECT_DOUBLE_EQ(m.f1, 2 * p * r / (p + r));
}

TEST(MicroF1, MatchesRecomputationFromSums) {
  std::mt19937_64 rng(8);
  std::vector<TurnMatch> ms;
  std::size_t tp = 0, pred = 0, gold = 0;
  for (int i = 0; i < 200; ++i) {
    auto p = random_small_actions(rng, 6), g = random_small_actions(rng, 6);
    ms.push_back(match_turn(p, g));
    tp += max_bipartite_matching(p, g);
    pred += p.size();
    gold += g.size();
  }
  auto m = micro_f1(ms);
  double P = static_cast<double>(tp) / static_cast<double>(pred), R = static_cast<double>(tp) / static_cast<double>(gold);
  EXPECT_NEAR(m.precision, P, 1e-12);
  EXPECT_NEAR(m.recall, R, 1e-12);
  EXPECT_NEAR(m.f1, 2 * P * R / (P + R), 1e-12);
}

TEST(EvaluateRun, MissingCompletionScoredEmpty) {
  auto a = aggregate_turns(make_game("g", "test", {say("one"), act(place(red, 0, 1, 0)), say("two"), act(place(red, 0, 2, 0))}));
  auto r = evaluate_run(a, [](const TurnPair& p) -> std::optional<std::string> {
    if (p.turn_index == 0) return serialize_actions(p.gold_actions);
    return std::nullopt;
  });
  ASSERT_EQ(r.missing.size(), 1u);
  EXPECT_EQ(r.missing[0], (TurnKey{"g", 1}));
  EXPECT_EQ(r.turns[1].pred_count, 0u);
  EXPECT_TRUE(r.turns[1].missing_completion);
  EXPECT_EQ(r.overall.precision, 1.0);
  EXPECT_EQ(r.overall.recall, 0.5);
}

TEST(EvaluateRun, NetGoldVariant) {
  auto pairs = aggregate_turns(make_game(
      "g", "test", {say("x"), act(place(red, 0, 1, 0)), act(place(blue, 1, 1, 0)), act(pick(blue, 1, 1, 0))}));
  auto r = evaluate_run(pairs, [](const TurnPair& p) { return std::optional<std::string>(serialize_actions(p.gold_actions)); });
  EXPECT_EQ(r.overall.f1, 1.0);
  EXPECT_EQ(r.overall.gold_sum, 3u);
  EXPECT_EQ(r.variant_net_gold.gold_sum, 1u);
  EXPECT_EQ(r.variant_net_gold.tp_sum, 1u);
}

TEST(EvaluateRun, DiagnosticsCarried) {
  auto pairs = aggregate_turns(make_game("g", "test", {say("x"), act(place(red, 0, 1, 0))}));
  auto r = evaluate_run(pairs, [](const TurnPair&) {
    return std::optional<std::string>("Output\nplace(color='red',x=0,y=1,z=0)\nplace(color='teal',x=0,y=1,z=0)");
  });
  EXPECT_EQ(r.turns[0].diagnostics.malformed_call_count, 1u);
  EXPECT_EQ(r.turns[0].diagnostics.ignored_line_count, 1u);
  EXPECT_TRUE(r.turns[0].exact);
  auto j = to_json(r);
  EXPECT_EQ(j["turns"][0]["diagnostics"]["malformed_call_count"], 1);
  EXPECT_EQ(metrics_from_json(j["overall"]).f1, r.overall.f1);
}

TEST(Table, Layout) {
  Metrics m = metrics_from_counts(1, 2, 4, 3);
  auto t = render_table({{"GPT-4", m, std::nullopt, 0.39}, {"echo", metrics_from_counts(5, 5, 5, 2), m, std::nullopt}});
  EXPECT_NE(t.find("Model"), std::string::npos);
  EXPECT_NE(t.find("GPT-4  0.3333  0.5000  0.2500  -"), std::string::npos);
  EXPECT_NE(t.find("0.39"), std::string::npos);
  EXPECT_NE(t.find("echo   1.0000"), std::string::npos);
}
