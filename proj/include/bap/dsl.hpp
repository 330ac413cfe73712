#pragma once

// The action code language:
//
//   call     := name "(" args ")" [";"]
//   name     := "place" | "pick"
//   args     := positional | keyword | positional "," keyword
//   keyword  := kwarg { "," kwarg }          kwarg := ("color"|"x"|"y"|"z") "=" value
//   positional := value { "," value }        in the order color, x, y, z
//   value    := quoted-string | bare-word | integer
//
// Quotes may be ', ", ` or typographic single/double quotes. Whitespace is
// free between tokens. Canonical output is place(color='C',x=X,y=Y,z=Z).

#include <bap/action.hpp>
#include <bap/util.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bap {

enum class DslErrorKind { syntax, unknown_function, unknown_color, bad_coordinate, missing_argument };

inline std::string_view to_string(DslErrorKind k) {
  switch (k) {
    case DslErrorKind::syntax: return "syntax";
    case DslErrorKind::unknown_function: return "unknown_function";
    case DslErrorKind::unknown_color: return "unknown_color";
    case DslErrorKind::bad_coordinate: return "bad_coordinate";
    case DslErrorKind::missing_argument: return "missing_argument";
  }
  return "?";
}

class DslError : public Error {
 public:
  DslError(DslErrorKind kind, const std::string& msg)
      : Error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  DslErrorKind kind() const { return kind_; }

 private:
  DslErrorKind kind_;
};

struct ParseNote {
  std::size_t line = 0;  // 1-based, after fence stripping
  std::string message;
};

struct ParseDiagnostics {
  std::size_t ignored_line_count = 0;
  bool truncated_at_new_instruction = false;
  std::size_t malformed_call_count = 0;
  std::vector<ParseNote> notes;
};

inline std::string serialize_action(const Action& a) {
  std::string s;
  s.reserve(40);
  s += to_string(a.kind);
  s += "(color='";
  s += to_string(a.color);
  s += "',x=";
  s += std::to_string(a.x);
  s += ",y=";
  s += std::to_string(a.y);
  s += ",z=";
  s += std::to_string(a.z);
  s += ")";
  return s;
}

inline std::string serialize_actions(const std::vector<Action>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += '\n';
    out += serialize_action(actions[i]);
  }
  return out;
}

namespace detail {

class CallParser {
 public:
  explicit CallParser(std::string_view s, std::size_t pos = 0) : s_(s), pos_(pos) {}

  std::size_t pos() const { return pos_; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool at_end() const { return pos_ >= s_.size(); }

  std::string_view identifier() {
    std::size_t b = pos_;
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
    }
    return s_.substr(b, pos_ - b);
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Parses one call starting at the current position; leaves pos after ')'.
  Action call() {
    skip_ws();
    std::size_t name_at = pos_;
    auto name = identifier();
    if (name.empty()) throw DslError(DslErrorKind::syntax, "expected function name at " + where(name_at));
    auto kind = kind_from_string(name);
    if (!kind) throw DslError(DslErrorKind::unknown_function, "'" + std::string(name) + "'");
    if (!consume('(')) throw DslError(DslErrorKind::syntax, "expected '(' after " + std::string(name));

    // slots: color, x, y, z
    std::array<std::optional<Value>, 4> slots;
    std::size_t positional = 0;
    bool seen_keyword = false;
    skip_ws();
    if (!consume(')')) {
      for (;;) {
        skip_ws();
        std::size_t arg_at = pos_;
        std::size_t save = pos_;
        auto key = identifier();
        skip_ws();
        int slot = -1;
        if (!key.empty() && pos_ < s_.size() && s_[pos_] == '=') {
          ++pos_;
          slot = slot_of(key);
          if (slot < 0) throw DslError(DslErrorKind::syntax, "unknown argument '" + std::string(key) + "'");
          seen_keyword = true;
        } else {
          pos_ = save;
          if (seen_keyword)
            throw DslError(DslErrorKind::syntax, "positional argument after keyword at " + where(arg_at));
          if (positional >= 4) throw DslError(DslErrorKind::syntax, "too many arguments");
          slot = static_cast<int>(positional++);
        }
        if (slots[slot]) throw DslError(DslErrorKind::syntax, "duplicate argument at " + where(arg_at));
        slots[slot] = value();
        if (consume(',')) {
          skip_ws();
          if (consume(')')) break;  // trailing comma
          continue;
        }
        if (consume(')')) break;
        throw DslError(DslErrorKind::syntax, "expected ',' or ')' at " + where(pos_));
      }
    }

    static constexpr const char* names[4] = {"color", "x", "y", "z"};
    for (int i = 0; i < 4; ++i)
      if (!slots[i]) throw DslError(DslErrorKind::missing_argument, names[i]);

    Action a;
    a.kind = *kind;
    auto color = color_from_string(to_lower_ascii(slots[0]->text));
    if (!color) throw DslError(DslErrorKind::unknown_color, "'" + slots[0]->text + "'");
    a.color = *color;
    a.x = coordinate(*slots[1], "x");
    a.y = coordinate(*slots[2], "y");
    a.z = coordinate(*slots[3], "z");
    return a;
  }

 private:
  struct Value {
    std::string text;
    bool quoted = false;
  };

  static int slot_of(std::string_view key) {
    if (key == "color" || key == "colour") return 0;
    if (key == "x") return 1;
    if (key == "y") return 2;
    if (key == "z") return 3;
    return -1;
  }

  std::string where(std::size_t p) const { return "offset " + std::to_string(p); }

  // Returns the byte length of an opening/closing quote at pos, or 0.
  std::size_t quote_len(std::size_t p) const {
    if (p >= s_.size()) return 0;
    char c = s_[p];
    if (c == '\'' || c == '"' || c == '`') return 1;
    // U+2018..U+201D: E2 80 98..9D
    if (static_cast<unsigned char>(c) == 0xE2 && p + 2 < s_.size() &&
        static_cast<unsigned char>(s_[p + 1]) == 0x80) {
      auto t = static_cast<unsigned char>(s_[p + 2]);
      if (t >= 0x98 && t <= 0x9D) return 3;
    }
    return 0;
  }

  Value value() {
    skip_ws();
    if (std::size_t q = quote_len(pos_)) {
      pos_ += q;
      std::size_t b = pos_;
      while (pos_ < s_.size() && quote_len(pos_) == 0) ++pos_;
      if (pos_ >= s_.size()) throw DslError(DslErrorKind::syntax, "unterminated string");
      Value v{std::string(s_.substr(b, pos_ - b)), true};
      pos_ += quote_len(pos_);
      return v;
    }
    std::size_t b = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')' && s_[pos_] != '(' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (pos_ == b) throw DslError(DslErrorKind::syntax, "expected value at " + where(b));
    return {std::string(s_.substr(b, pos_ - b)), false};
  }

  static int coordinate(const Value& v, const char* name) {
    std::string_view t = trim(v.text);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    int out = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
      throw DslError(DslErrorKind::bad_coordinate, std::string(name) + "='" + v.text + "'");
    return out;
  }

  std::string_view s_;
  std::size_t pos_;
};

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

// Drops list markers and markdown emphasis in front of a line: "- ", "* ",
// "1. ", "2) ", "**". A leading '#' is a comment and is kept.
inline std::string_view strip_line_marker(std::string_view line) {
  line = trim(line);
  while (!line.empty() && (line.front() == '*' || line.front() == '>')) line.remove_prefix(1);
  if (!line.empty() && line.front() == '-') line.remove_prefix(1);
  std::size_t d = 0;
  while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
  if (d > 0 && d < line.size() && (line[d] == '.' || line[d] == ')') && d + 1 < line.size() &&
      line[d + 1] == ' ')
    line.remove_prefix(d + 1);
  return trim(line);
}

inline bool is_label_line(std::string_view line) {
  line = trim(line);
  while (!line.empty() && line.front() == '#') line.remove_prefix(1);
  auto l = strip_line_marker(line);
  return starts_with_ci(l, "instruction") || starts_with_ci(l, "output") ||
         starts_with_ci(l, "mission has started");
}

// A line "looks like a call" when it begins with an identifier immediately
// followed by '(' (or place/pick followed by optional space and '(').
inline bool looks_like_call(std::string_view line) {
  CallParser p(line);
  auto id = p.identifier();
  if (id.empty()) return false;
  std::size_t after = p.pos();
  if (after < line.size() && line[after] == '(') return true;
  if (id == "place" || id == "pick") {
    p.skip_ws();
    return !p.at_end() && line[p.pos()] == '(';
  }
  return false;
}

// Removes ``` fences. A fence line may carry a language tag (```python) and,
// rarely, code on the same line after it.
inline std::string strip_fences(std::string_view line) {
  std::string out(line);
  for (;;) {
    auto f = out.find("```");
    if (f == std::string::npos) break;
    std::size_t e = f + 3;
    // language tag directly after an opening fence
    while (e < out.size() && (std::isalnum(static_cast<unsigned char>(out[e])) || out[e] == '_' ||
                              out[e] == '+' || out[e] == '-'))
      ++e;
    std::string_view tag(out.data() + f + 3, e - f - 3);
    if (tag == "place" || tag == "pick") e = f + 3;  // not a tag, it's code
    out.erase(f, e - f);
  }
  return out;
}

}  // namespace detail

// Parses exactly one call; surrounding whitespace and one trailing ';' are allowed.
inline Action parse_action_call(std::string_view text) {
  detail::CallParser p(text);
  Action a = p.call();
  p.consume(';');
  p.skip_ws();
  if (!p.at_end()) throw DslError(DslErrorKind::syntax, "trailing text after call");
  return a;
}

struct Extraction {
  std::vector<Action> actions;
  ParseDiagnostics diagnostics;
};

// Scans a raw model response line by line. Never throws on content.
inline Extraction extract_actions(std::string_view response) {
  Extraction out;
  auto& diag = out.diagnostics;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < response.size()) {
    std::size_t nl = response.find('\n', start);
    std::string_view raw =
        response.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? response.size() : nl + 1;

    std::string cleaned = detail::strip_fences(raw);
    std::string_view line = trim(cleaned);
    if (line.empty()) continue;  // blank and fence-only lines are not counted
    ++line_no;

    if (!out.actions.empty() && detail::is_label_line(line)) {
      diag.truncated_at_new_instruction = true;
      diag.notes.push_back({line_no, "stopped at new instruction/label line"});
      break;
    }

    std::string_view body = detail::strip_line_marker(line);
    if (!detail::looks_like_call(body)) {
      ++diag.ignored_line_count;
      continue;
    }

    // One or more calls separated by ';', ',' or whitespace.
    std::vector<Action> found;
    detail::CallParser p(body);
    try {
      for (;;) {
        found.push_back(p.call());
        p.skip_ws();
        if (p.at_end()) break;
        if (auto rest = body.substr(p.pos()); rest.starts_with('#') || rest.starts_with("//")) break;
        if (!p.consume(';') && !p.consume(',')) {
          p.skip_ws();
          if (!detail::looks_like_call(body.substr(p.pos())))
            throw DslError(DslErrorKind::syntax, "trailing text after call");
        }
        p.skip_ws();
        if (p.at_end()) break;
        if (auto rest = body.substr(p.pos()); rest.starts_with('#') || rest.starts_with("//")) break;
      }
      out.actions.insert(out.actions.end(), found.begin(), found.end());
    } catch (const DslError& e) {
      // Calls parsed before the bad one on the same line are kept.
      out.actions.insert(out.actions.end(), found.begin(), found.end());
      ++diag.malformed_call_count;
      diag.notes.push_back({line_no, e.what()});
    }
  }
  return out;
}

}  // namespace bap
