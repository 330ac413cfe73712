#pragma once

// Bounded voxel grid with per-colour inventories.
//
// WorldState is a value: apply() returns a new state and never touches its
// input. Scoring never depends on grounding; the simulator feeds diagnostics
// (replay violations, builder-mistake detection, world dumps).

#include <bap/action.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace bap {

struct Range {
  int min = 0;
  int max = 0;
  bool contains(int v) const { return v >= min && v <= max; }
  int extent() const { return max - min + 1; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct GridSpec {
  Range x{-5, 5};
  Range y{0, 9};
  Range z{-5, 5};
  int per_color_stock = 20;
  // Optional support rule: a placed block must rest on the lowest layer or
  // touch an occupied face-neighbour.
  bool require_adjacency = false;

  bool contains(const Cell& c) const { return x.contains(c.x) && y.contains(c.y) && z.contains(c.z); }
  long volume() const { return static_cast<long>(x.extent()) * y.extent() * z.extent(); }
  bool valid() const {
    return x.min <= x.max && y.min <= y.max && z.min <= z.max && per_color_stock > 0;
  }

  // Wide bounds used when replaying corpus data (the data contains Y=0).
  static GridSpec corpus() { return {}; }
  // The bounds the prompt describes to the model: 11x9x11, ground at Y=1.
  static GridSpec prompt() {
    GridSpec s;
    s.y = {1, 9};
    return s;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class ViolationReason { out_of_bounds, cell_occupied, cell_empty, color_mismatch, inventory_exhausted, unsupported };

inline std::string_view to_string(ViolationReason r) {
  switch (r) {
    case ViolationReason::out_of_bounds: return "out_of_bounds";
    case ViolationReason::cell_occupied: return "cell_occupied";
    case ViolationReason::cell_empty: return "cell_empty";
    case ViolationReason::color_mismatch: return "color_mismatch";
    case ViolationReason::inventory_exhausted: return "inventory_exhausted";
    case ViolationReason::unsupported: return "unsupported";
  }
  return "?";
}

struct TurnContext {
  std::string game_id;
  std::size_t turn_index = 0;
  std::size_t action_index = 0;
  friend bool operator==(const TurnContext&, const TurnContext&) = default;
};

struct Violation {
  Action action;
  ViolationReason reason;
  TurnContext context;
  friend bool operator==(const Violation&, const Violation&) = default;
};

class WorldState {
 public:
  WorldState() : WorldState(GridSpec{}) {}
  explicit WorldState(GridSpec spec) : spec_(spec) { inventory_.fill(spec.per_color_stock); }

  const GridSpec& spec() const { return spec_; }
  const std::map<Cell, Color>& occupancy() const { return cells_; }
  std::size_t occupied_count() const { return cells_.size(); }

  std::optional<Color> at(const Cell& c) const {
    auto it = cells_.find(c);
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }

  int inventory(Color c) const { return inventory_[static_cast<std::size_t>(c)]; }
  int total_inventory() const {
    int t = 0;
    for (int v : inventory_) t += v;
    return t;
  }
  std::size_t occupied_count(Color c) const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [c](const auto& kv) { return kv.second == c; }));
  }

  // Checks preconditions; returns the reason the action cannot apply, if any.
  std::optional<ViolationReason> check(const Action& a) const {
    const Cell c = a.cell();
    if (!spec_.contains(c)) return ViolationReason::out_of_bounds;
    auto cur = at(c);
    if (a.kind == ActionKind::place) {
      if (cur) return ViolationReason::cell_occupied;
      if (inventory(a.color) <= 0) return ViolationReason::inventory_exhausted;
      if (spec_.require_adjacency && !supported(c)) return ViolationReason::unsupported;
    } else {
      if (!cur) return ViolationReason::cell_empty;
      if (*cur != a.color) return ViolationReason::color_mismatch;
    }
    return std::nullopt;
  }

  // Applies an action known to pass check().
  void apply_unchecked(const Action& a) {
    auto& inv = inventory_[static_cast<std::size_t>(a.color)];
    if (a.kind == ActionKind::place) {
      cells_.emplace(a.cell(), a.color);
      --inv;
    } else {
      cells_.erase(a.cell());
      ++inv;
    }
  }

  // "x y z color" per occupied cell, lexicographic by (x, y, z).
  std::string dump() const {
    std::ostringstream os;
    for (const auto& [c, col] : cells_) os << c.x << ' ' << c.y << ' ' << c.z << ' ' << to_string(col) << '\n';
    return os.str();
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;

 private:
  bool supported(const Cell& c) const {
    if (c.y == spec_.y.min) return true;
    static constexpr int d[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& o : d)
      if (cells_.count({c.x + o[0], c.y + o[1], c.z + o[2]})) return true;
    return false;
  }

  GridSpec spec_;
  std::map<Cell, Color> cells_;
  std::array<int, kColorCount> inventory_{};
};

inline WorldState new_world(const GridSpec& spec = GridSpec{}) { return WorldState(spec); }

inline std::variant<WorldState, Violation> apply(const WorldState& w, const Action& a,
                                                 const TurnContext& ctx = {}) {
  if (auto r = w.check(a)) return Violation{a, *r, ctx};
  WorldState next = w;
  next.apply_unchecked(a);
  return next;
}

enum class ReplayMode { strict, lenient };

struct Replay {
  WorldState world;
  std::vector<Violation> violations;
};

// strict: stop at the first violation, returning the state before it.
// lenient: skip violating actions and keep going.
inline Replay apply_sequence(WorldState world, const std::vector<Action>& actions, ReplayMode mode,
                             TurnContext ctx = {}) {
  Replay out{std::move(world), {}};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ctx.action_index = i;
    if (auto r = out.world.check(actions[i])) {
      out.violations.push_back({actions[i], *r, ctx});
      if (mode == ReplayMode::strict) break;
      continue;
    }
    out.world.apply_unchecked(actions[i]);
  }
  return out;
}

// Removes every place that is later undone by a pick of the same colour at
// the same cell with nothing else touching that cell in between. Works as a
// stack per cell: a pick cancels the cell's most recent surviving action when
// that action is a matching place.
inline std::vector<Action> net_actions(const std::vector<Action>& actions) {
  std::vector<bool> keep(actions.size(), true);
  std::map<Cell, std::vector<std::size_t>> stacks;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    auto& st = stacks[a.cell()];
    if (a.kind == ActionKind::pick && !st.empty()) {
      const Action& top = actions[st.back()];
      if (top.kind == ActionKind::place && top.color == a.color) {
        keep[st.back()] = false;
        keep[i] = false;
        st.pop_back();
        continue;
      }
    }
    st.push_back(i);
  }
  std::vector<Action> out;
  out.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (keep[i]) out.push_back(actions[i]);
  return out;
}

inline bool has_builder_mistake(const std::vector<Action>& actions) {
  return net_actions(actions).size() != actions.size();
}

}  // namespace bap
