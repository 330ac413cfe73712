#include <bap/world.hpp>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bap;
using enum Color;

namespace {

// Rescans from the start after every cancellation.
std::vector<Action> net_actions_by_rescan(std::vector<Action> s) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < s.size() && !changed; ++i) {
      if (s[i].kind != ActionKind::place) continue;
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        if (s[j].cell() != s[i].cell()) continue;
        if (s[j].kind == ActionKind::pick && s[j].color == s[i].color) {
          s.erase(s.begin() + static_cast<long>(j));
          s.erase(s.begin() + static_cast<long>(i));
          changed = true;
        }
        break;  // first later action at the cell decides
      }
    }
  }
  return s;
}

WorldState replayed(const std::vector<Action>& s, const GridSpec& spec = {}) {
  auto r = apply_sequence(WorldState(spec), s, ReplayMode::strict);
  EXPECT_TRUE(r.violations.empty());
  return r.world;
}

}  // namespace

TEST(NewWorld, DefaultStock) {
  auto w = new_world();
  EXPECT_EQ(w.occupied_count(), 0u);
  for (auto c : kAllColors) EXPECT_EQ(w.inventory(c), 20);
  EXPECT_EQ(w.total_inventory(), 120);
  EXPECT_FALSE(w.at({0, 1, 0}));
}

TEST(NewWorld, TotalIsColorsTimesStock) {
  GridSpec s;
  s.per_color_stock = 7;
  EXPECT_EQ(new_world(s).total_inventory(), 42);
}

TEST(Apply, PlaceThenPick) {
  auto w0 = new_world();
  auto r1 = apply(w0, place(green, 0, 1, 4));
  ASSERT_TRUE(std::holds_alternative<WorldState>(r1));
  auto& w1 = std::get<WorldState>(r1);
  EXPECT_EQ(w1.occupancy(), (std::map<Cell, Color>{{{0, 1, 4}, green}}));
  EXPECT_EQ(w1.inventory(green), 19);
  auto r2 = apply(w1, pick(green, 0, 1, 4));
  ASSERT_TRUE(std::holds_alternative<WorldState>(r2));
  EXPECT_EQ(std::get<WorldState>(r2), w0);
}

TEST(Apply, ViolationReasons) {
  auto reason = [](const WorldState& w, const Action& a) {
    auto r = apply(w, a, {"g", 3, 1});
    if (!std::holds_alternative<Violation>(r)) return std::optional<ViolationReason>{};
    auto v = std::get<Violation>(r);
    EXPECT_EQ(v.context, (TurnContext{"g", 3, 1}));
    EXPECT_EQ(v.action, a);
    return std::optional<ViolationReason>{v.reason};
  };
  auto w = new_world();
  EXPECT_EQ(reason(w, pick(red, 0, 2, 0)), ViolationReason::cell_empty);
  EXPECT_EQ(reason(w, place(red, 6, 1, 0)), ViolationReason::out_of_bounds);
  EXPECT_EQ(reason(w, place(red, 0, 10, 0)), ViolationReason::out_of_bounds);
  w = std::get<WorldState>(apply(w, place(red, 0, 1, 0)));
  EXPECT_EQ(reason(w, place(blue, 0, 1, 0)), ViolationReason::cell_occupied);
  EXPECT_EQ(reason(w, pick(blue, 0, 1, 0)), ViolationReason::color_mismatch);

  GridSpec one;
  one.per_color_stock = 1;
  auto w1 = std::get<WorldState>(apply(new_world(one), place(red, 0, 1, 0)));
  EXPECT_EQ(reason(w1, place(red, 1, 1, 0)), ViolationReason::inventory_exhausted);
}

TEST(Apply, FailedApplyLeavesInputUntouched) {
  auto w = std::get<WorldState>(apply(new_world(), place(red, 0, 1, 0)));
  auto copy = w;
  (void)apply(w, place(red, 0, 1, 0));
  (void)apply(w, pick(blue, 0, 1, 0));
  EXPECT_EQ(w, copy);
}

TEST(Apply, AdjacencyRuleIsOptIn) {
  GridSpec s = GridSpec::prompt();
  EXPECT_TRUE(std::holds_alternative<WorldState>(apply(new_world(s), place(red, 0, 5, 0))));
  s.require_adjacency = true;
  auto r = apply(new_world(s), place(red, 0, 5, 0));
  ASSERT_TRUE(std::holds_alternative<Violation>(r));
  EXPECT_EQ(std::get<Violation>(r).reason, ViolationReason::unsupported);
  auto w = std::get<WorldState>(apply(new_world(s), place(red, 0, 1, 0)));
  EXPECT_TRUE(std::holds_alternative<WorldState>(apply(w, place(red, 0, 2, 0))));
}

TEST(Sequence, RedColumn) {
  std::vector<Action> col;
  for (int y = 1; y <= 5; ++y) col.push_back(place(red, 0, y, 1));
  auto r = apply_sequence(new_world(), col, ReplayMode::strict);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.world.occupied_count(), 5u);
  for (int y = 1; y <= 5; ++y) EXPECT_EQ(r.world.at({0, y, 1}), red);
  EXPECT_EQ(r.world.inventory(red), 15);
}

TEST(Sequence, EmptyIsIdentity) {
  auto w = std::get<WorldState>(apply(new_world(), place(red, 0, 1, 0)));
  EXPECT_EQ(apply_sequence(w, {}, ReplayMode::strict).world, w);
}

TEST(Sequence, LenientSkipsStrictStops) {
  std::vector<Action> s = {place(red, 0, 1, 0), place(red, 0, 1, 0), place(blue, 1, 1, 0)};
  auto lenient = apply_sequence(new_world(), s, ReplayMode::lenient, {"g", 2, 0});
  EXPECT_EQ(lenient.world.occupied_count(), 2u);
  ASSERT_EQ(lenient.violations.size(), 1u);
  EXPECT_EQ(lenient.violations[0].reason, ViolationReason::cell_occupied);
  EXPECT_EQ(lenient.violations[0].context, (TurnContext{"g", 2, 1}));

  auto strict = apply_sequence(new_world(), s, ReplayMode::strict);
  EXPECT_EQ(strict.world.occupied_count(), 1u);
  EXPECT_EQ(strict.violations.size(), 1u);
}

TEST(NetActions, Examples) {
  EXPECT_TRUE(net_actions({place(red, -2, 0, -1), pick(red, -2, 0, -1)}).empty());
  EXPECT_EQ(net_actions({place(green, 0, 1, 4)}), std::vector<Action>{place(green, 0, 1, 4)});
  EXPECT_EQ(net_actions({place(red, 0, 1, 0), place(blue, 1, 1, 0), pick(red, 0, 1, 0), place(red, 0, 1, 0)}),
            (std::vector<Action>{place(blue, 1, 1, 0), place(red, 0, 1, 0)}));
}

TEST(NetActions, PickBeforePlaceDoesNotCancel) {
  std::vector<Action> s = {pick(red, 0, 1, 0), place(red, 0, 1, 0)};
  EXPECT_EQ(net_actions(s), s);
}

TEST(NetActions, NestedPairsCancelInsideOut) {
  std::vector<Action> s = {place(red, 0, 1, 0), pick(red, 0, 1, 0), place(blue, 0, 1, 0), pick(blue, 0, 1, 0)};
  EXPECT_TRUE(net_actions(s).empty());
  EXPECT_TRUE(has_builder_mistake(s));
  EXPECT_FALSE(has_builder_mistake({place(red, 0, 1, 0), place(red, 0, 2, 0)}));
}

TEST(NetActions, MatchesRescanOracleOnArbitraryLists) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3000; ++i) {
    std::vector<Action> s;
    for (int n = static_cast<int>(rng() % 12); n > 0; --n) s.push_back(test::random_action(rng, 0, 1));
    ASSERT_EQ(net_actions(s), net_actions_by_rescan(s));
  }
}

TEST(Properties, RandomValidSequences) {
  std::mt19937_64 rng(17);
  GridSpec spec;
  for (int i = 0; i < 1000; ++i) {
    auto s = test::random_valid_sequence(rng, spec, 1 + rng() % 40);
    WorldState w(spec);
    for (const auto& a : s) {
      if (a.kind == ActionKind::place && !w.at(a.cell())) {
        auto there = std::get<WorldState>(apply(w, a));
        ASSERT_EQ(std::get<WorldState>(apply(there, pick(a.color, a.x, a.y, a.z))), w);
      }
      w = std::get<WorldState>(apply(w, a));
      for (auto c : kAllColors) {
        ASSERT_EQ(w.inventory(c) + static_cast<int>(w.occupied_count(c)), spec.per_color_stock);
        ASSERT_GE(w.inventory(c), 0);
      }
      ASSERT_LE(w.occupied_count(), kColorCount * static_cast<std::size_t>(spec.per_color_stock));
    }
    auto n = net_actions(s);
    ASSERT_LE(n.size(), s.size());
    ASSERT_EQ(net_actions(n), n);
    ASSERT_EQ(replayed(n).occupancy(), w.occupancy());
  }
}

TEST(Dump, SortedLines) {
  auto w = apply_sequence(new_world(), {place(red, 1, 1, 0), place(blue, -1, 2, 3), place(green, -1, 1, 3)},
                          ReplayMode::strict)
               .world;
  EXPECT_EQ(w.dump(), "-1 1 3 green\n-1 2 3 blue\n1 1 0 red\n");
}
