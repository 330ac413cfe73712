#pragma once

// Builder-mistake detection over gold data: a turn is flagged when its gold
// block contains a place later undone by a matching pick.

#include <bap/corpus.hpp>
#include <bap/world.hpp>

#include <vector>

namespace bap {

struct MistakeReport {
  struct Turn {
    std::string game_id;
    std::size_t turn_index = 0;
    bool flagged = false;
    std::size_t cancelled_actions = 0;
  };
  std::vector<Turn> turns;
  std::size_t flagged_count = 0;
  // flagged_count / turns.size(); 0 for no turns.
  double flagged_fraction = 0.0;
};

inline MistakeReport detect_builder_mistakes(const std::vector<TurnPair>& pairs) {
  MistakeReport r;
  r.turns.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto net = net_actions(p.gold_actions);
    MistakeReport::Turn t{p.game_id, p.turn_index, net.size() != p.gold_actions.size(),
                          p.gold_actions.size() - net.size()};
    if (t.flagged) ++r.flagged_count;
    r.turns.push_back(std::move(t));
  }
  if (!pairs.empty()) r.flagged_fraction = static_cast<double>(r.flagged_count) / static_cast<double>(pairs.size());
  return r;
}

}  // namespace bap
