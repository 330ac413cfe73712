#pragma once

// Dialogue games in the normalized JSONL schema and their conversion into
// (instruction, gold action block) turn pairs.
//
// One game per line:
//   {"game_id": str, "split": "train"|"dev"|"test",
//    "target_structure_id": str (optional),
//    "events": [{"kind":"utterance","speaker":"architect"|"builder","text":str}
//             | {"kind":"builder_action",
//                "action":{"kind":"place"|"pick","color":str,"x":int,"y":int,"z":int}}]}

#include <bap/action.hpp>
#include <bap/util.hpp>
#include <bap/world.hpp>

#include "json.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bap {

enum class Speaker { architect, builder };
enum class EventKind { utterance, builder_action };

inline std::string_view to_string(Speaker s) { return s == Speaker::architect ? "architect" : "builder"; }

struct Event {
  EventKind kind = EventKind::utterance;
  Speaker speaker = Speaker::architect;  // utterances only
  std::string text;                      // utterances only
  Action action;                         // builder actions only

  static Event utterance(Speaker s, std::string t) { return {EventKind::utterance, s, std::move(t), {}}; }
  static Event builder_action(const Action& a) { return {EventKind::builder_action, Speaker::builder, {}, a}; }

  friend bool operator==(const Event&, const Event&) = default;
};

struct DialogueGame {
  std::string game_id;
  std::string split;
  std::optional<std::string> target_structure_id;
  std::vector<Event> events;

  friend bool operator==(const DialogueGame&, const DialogueGame&) = default;
};

struct TurnPair {
  std::string game_id;
  std::size_t turn_index = 0;
  std::string instruction;
  std::vector<Action> gold_actions;
  WorldState world_before;
};

struct TurnKey {
  std::string game_id;
  std::size_t turn_index = 0;
  friend auto operator<=>(const TurnKey&, const TurnKey&) = default;
};

inline TurnKey key_of(const TurnPair& p) { return {p.game_id, p.turn_index}; }

struct SplitStats {
  std::string split;
  std::size_t game_count = 0;
  std::size_t pair_count = 0;
  friend bool operator==(const SplitStats&, const SplitStats&) = default;
};

// A record that could not be loaded. `record` is the 1-based line number.
struct CorpusDiagnostic {
  std::size_t record = 0;
  std::string field;
  std::string message;
};

struct LoadedCorpus {
  std::vector<DialogueGame> games;
  std::vector<CorpusDiagnostic> diagnostics;
};

inline const std::vector<std::string>& split_names() {
  static const std::vector<std::string> names = {"train", "dev", "test"};
  return names;
}

inline bool is_split_name(std::string_view s) {
  return s == "train" || s == "dev" || s == "test";
}

// --- JSON mapping ---------------------------------------------------------

inline nlohmann::json to_json(const Action& a) {
  return {{"kind", to_string(a.kind)}, {"color", to_string(a.color)}, {"x", a.x}, {"y", a.y}, {"z", a.z}};
}

namespace detail {

struct SchemaError {
  std::string field;
  std::string message;
};

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError{path + key, "missing"};
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError{path + key, "expected string"};
  return v.get<std::string>();
}

inline int require_int(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer()) throw SchemaError{path + key, "expected integer"};
  auto n = v.get<long long>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
    throw SchemaError{path + key, "integer out of range"};
  return static_cast<int>(n);
}

inline Action action_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError{path, "expected object"};
  Action a;
  auto kind = kind_from_string(require_string(j, "kind", path));
  if (!kind) throw SchemaError{path + "kind", "expected place|pick"};
  a.kind = *kind;
  auto color = color_from_string(require_string(j, "color", path));
  if (!color) throw SchemaError{path + "color", "unknown color"};
  a.color = *color;
  a.x = require_int(j, "x", path);
  a.y = require_int(j, "y", path);
  a.z = require_int(j, "z", path);
  return a;
}

inline DialogueGame game_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError{"", "expected object"};
  DialogueGame g;
  g.game_id = require_string(j, "game_id", "");
  if (g.game_id.empty()) throw SchemaError{"game_id", "empty"};
  g.split = require_string(j, "split", "");
  if (!is_split_name(g.split)) throw SchemaError{"split", "expected train|dev|test"};
  if (auto it = j.find("target_structure_id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError{"target_structure_id", "expected string"};
    g.target_structure_id = it->get<std::string>();
  }
  const auto& events = require(j, "events", "");
  if (!events.is_array()) throw SchemaError{"events", "expected array"};
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    std::string path = "events[" + std::to_string(i) + "].";
    if (!e.is_object()) throw SchemaError{path.substr(0, path.size() - 1), "expected object"};
    auto kind = require_string(e, "kind", path);
    if (kind == "utterance") {
      auto sp = require_string(e, "speaker", path);
      Speaker s;
      if (sp == "architect") s = Speaker::architect;
      else if (sp == "builder") s = Speaker::builder;
      else throw SchemaError{path + "speaker", "expected architect|builder"};
      if (e.contains("action")) throw SchemaError{path + "action", "not allowed on utterance"};
      g.events.push_back(Event::utterance(s, require_string(e, "text", path)));
    } else if (kind == "builder_action") {
      if (e.contains("text") || e.contains("speaker"))
        throw SchemaError{path + (e.contains("text") ? "text" : "speaker"), "not allowed on builder_action"};
      g.events.push_back(Event::builder_action(action_from_json(require(e, "action", path), path + "action.")));
    } else {
      throw SchemaError{path + "kind", "expected utterance|builder_action"};
    }
  }
  return g;
}

}  // namespace detail

inline nlohmann::json to_json(const DialogueGame& g) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : g.events) {
    if (e.kind == EventKind::utterance)
      events.push_back({{"kind", "utterance"}, {"speaker", to_string(e.speaker)}, {"text", e.text}});
    else
      events.push_back({{"kind", "builder_action"}, {"action", to_json(e.action)}});
  }
  nlohmann::json j = {{"game_id", g.game_id}, {"split", g.split}, {"events", std::move(events)}};
  if (g.target_structure_id) j["target_structure_id"] = *g.target_structure_id;
  return j;
}

// One canonical line per game (sorted keys, no spaces), LF terminated.
inline std::string write_corpus(const std::vector<DialogueGame>& games) {
  std::string out;
  for (const auto& g : games) {
    out += to_json(g).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

// Parses JSONL text. Records that fail to parse or violate the schema, and
// duplicate game ids, become diagnostics. An empty `split` keeps every split.
inline LoadedCorpus parse_corpus(std::string_view text, std::string_view split = {}) {
  LoadedCorpus out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      out.diagnostics.push_back({line_no, "", std::string("invalid JSON: ") + e.what()});
      continue;
    }
    try {
      DialogueGame g = detail::game_from_json(j);
      if (!split.empty() && g.split != split) continue;
      if (!seen.insert(g.game_id).second) {
        out.diagnostics.push_back({line_no, "game_id", "duplicate game id '" + g.game_id + "'"});
        continue;
      }
      out.games.push_back(std::move(g));
    } catch (const detail::SchemaError& e) {
      out.diagnostics.push_back({line_no, e.field, e.message});
    }
  }
  return out;
}

// `path` is either a JSONL file (filtered by split) or a directory holding
// <split>.jsonl.
inline LoadedCorpus load_corpus(const std::filesystem::path& path, std::string_view split) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error("corpus path does not exist: " + path.string());
  fs::path file = path;
  if (fs::is_directory(path)) {
    file = path / (std::string(split) + ".jsonl");
    if (!fs::exists(file)) throw Error("corpus directory has no " + file.filename().string());
  }
  return parse_corpus(read_file(file), split);
}

// Joins all utterances since the previous builder-action block with ". " and
// pairs them with the following block of consecutive builder actions.
// world_before is the lenient replay of earlier gold blocks from an empty
// world; replay violations are appended to `violations` when given.
inline std::vector<TurnPair> aggregate_turns(const DialogueGame& game, const GridSpec& spec = GridSpec::corpus(),
                                             std::vector<Violation>* violations = nullptr) {
  std::vector<TurnPair> pairs;
  WorldState world(spec);
  std::string instruction;
  bool have_text = false;
  std::size_t i = 0;
  const auto& ev = game.events;
  while (i < ev.size()) {
    if (ev[i].kind == EventKind::utterance) {
      if (have_text) instruction += ". ";
      instruction += ev[i].text;
      have_text = true;
      ++i;
      continue;
    }
    TurnPair tp;
    tp.game_id = game.game_id;
    tp.turn_index = pairs.size();
    tp.instruction = std::move(instruction);
    tp.world_before = world;
    while (i < ev.size() && ev[i].kind == EventKind::builder_action) tp.gold_actions.push_back(ev[i++].action);
    auto replay = apply_sequence(world, tp.gold_actions, ReplayMode::lenient, {game.game_id, tp.turn_index, 0});
    world = std::move(replay.world);
    if (violations) violations->insert(violations->end(), replay.violations.begin(), replay.violations.end());
    pairs.push_back(std::move(tp));
    instruction.clear();
    have_text = false;
  }
  return pairs;
}

inline std::vector<TurnPair> aggregate_all(const std::vector<DialogueGame>& games) {
  std::vector<TurnPair> out;
  for (const auto& g : games) {
    auto p = aggregate_turns(g);
    out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  return out;
}

inline SplitStats split_stats(const std::vector<DialogueGame>& games, std::string split = {}) {
  SplitStats s;
  s.split = std::move(split);
  s.game_count = games.size();
  for (const auto& g : games) s.pair_count += aggregate_turns(g).size();
  return s;
}

}  // namespace bap
