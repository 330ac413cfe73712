#pragma once

// Builder actions: the place/pick vocabulary shared by every module.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>

namespace bap {

enum class ActionKind : std::uint8_t { place = 0, pick = 1 };

// Closed colour set of the building task. Order is the storage order for
// inventories; it has no other meaning.
enum class Color : std::uint8_t { red = 0, blue, orange, purple, yellow, green };

inline constexpr std::size_t kColorCount = 6;

inline constexpr std::array<Color, kColorCount> kAllColors = {
    Color::red, Color::blue, Color::orange, Color::purple, Color::yellow, Color::green};

inline std::string_view to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::blue: return "blue";
    case Color::orange: return "orange";
    case Color::purple: return "purple";
    case Color::yellow: return "yellow";
    case Color::green: return "green";
  }
  return "?";
}

inline std::string_view to_string(ActionKind k) { return k == ActionKind::place ? "place" : "pick"; }

inline std::optional<Color> color_from_string(std::string_view s) {
  for (Color c : kAllColors)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline std::optional<ActionKind> kind_from_string(std::string_view s) {
  if (s == "place") return ActionKind::place;
  if (s == "pick") return ActionKind::pick;
  return std::nullopt;
}

struct Cell {
  int x = 0;
  int y = 0;
  int z = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Action {
  ActionKind kind = ActionKind::place;
  Color color = Color::red;
  int x = 0;
  int y = 0;
  int z = 0;

  Cell cell() const { return {x, y, z}; }

  friend auto operator<=>(const Action&, const Action&) = default;
};

inline Action place(Color c, int x, int y, int z) { return {ActionKind::place, c, x, y, z}; }
inline Action pick(Color c, int x, int y, int z) { return {ActionKind::pick, c, x, y, z}; }

inline std::ostream& operator<<(std::ostream& os, const Action& a) {
  return os << to_string(a.kind) << "(" << to_string(a.color) << "," << a.x << "," << a.y << ","
            << a.z << ")";
}

}  // namespace bap
