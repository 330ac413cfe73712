#pragma once

// Best-effort importer for the public Minecraft Dialogue corpus.
//
// Expected layout (searched recursively under the root):
//   splits.json                          {"train": [ids], "val"|"dev": [ids], "test": [ids]}
//   .../<game_id>/postprocessed-observations.json
// Each observation file holds "WorldStates": a list of snapshots, each with a
// cumulative "ChatHistory" (lines "<Architect> text" / "<Builder> text") and
// the full "BlocksInGrid" list. Builder actions are recovered by diffing
// consecutive block sets; new chat lines of a snapshot precede its actions.

#include <bap/corpus.hpp>

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bap {

struct RawImport {
  std::vector<DialogueGame> games;  // all splits, sorted by (split order, game_id)
  std::vector<std::string> notes;
};

namespace detail {

inline std::optional<Color> color_in(std::string_view type) {
  std::string t = to_lower_ascii(type);
  for (Color c : kAllColors)
    if (t.find(to_string(c)) != std::string::npos) return c;
  return std::nullopt;
}

inline std::map<Cell, Color> blocks_of(const nlohmann::json& state, std::vector<std::string>& notes,
                                       const std::string& game_id) {
  std::map<Cell, Color> out;
  auto it = state.find("BlocksInGrid");
  if (it == state.end() || !it->is_array()) return out;
  for (const auto& b : *it) {
    const nlohmann::json* coords = &b;
    if (auto a = b.find("AbsoluteCoordinates"); a != b.end()) coords = &*a;
    if (!coords->contains("X") || !coords->contains("Y") || !coords->contains("Z")) {
      notes.push_back(game_id + ": block without coordinates skipped");
      continue;
    }
    std::string type = b.value("Type", b.value("Colour", std::string{}));
    auto color = color_in(type);
    if (!color) {
      notes.push_back(game_id + ": block of unknown type '" + type + "' skipped");
      continue;
    }
    out[{(*coords)["X"].get<int>(), (*coords)["Y"].get<int>(), (*coords)["Z"].get<int>()}] = *color;
  }
  return out;
}

inline Event chat_event(std::string_view line) {
  auto strip = [&](std::string_view tag) -> std::optional<std::string> {
    if (line.substr(0, tag.size()) == tag) return std::string(trim(line.substr(tag.size())));
    return std::nullopt;
  };
  if (auto t = strip("<Architect>")) return Event::utterance(Speaker::architect, *t);
  if (auto t = strip("<Builder>")) return Event::utterance(Speaker::builder, *t);
  return Event::utterance(Speaker::architect, std::string(trim(line)));
}

}  // namespace detail

inline std::vector<Event> import_observations(const nlohmann::json& obs, const std::string& game_id,
                                              std::vector<std::string>& notes) {
  std::vector<Event> events;
  auto states = obs.find("WorldStates");
  if (states == obs.end() || !states->is_array()) throw Error(game_id + ": no WorldStates array");
  std::size_t chat_seen = 0;
  std::map<Cell, Color> prev;
  for (const auto& st : *states) {
    if (auto ch = st.find("ChatHistory"); ch != st.end() && ch->is_array()) {
      for (std::size_t i = chat_seen; i < ch->size(); ++i)
        if ((*ch)[i].is_string()) events.push_back(detail::chat_event((*ch)[i].get<std::string>()));
      chat_seen = std::max(chat_seen, ch->size());
    }
    auto cur = detail::blocks_of(st, notes, game_id);
    for (const auto& [cell, color] : prev) {
      auto it = cur.find(cell);
      if (it == cur.end() || it->second != color)
        events.push_back(Event::builder_action(pick(color, cell.x, cell.y, cell.z)));
    }
    for (const auto& [cell, color] : cur) {
      auto it = prev.find(cell);
      if (it == prev.end() || it->second != color)
        events.push_back(Event::builder_action(place(color, cell.x, cell.y, cell.z)));
    }
    prev = std::move(cur);
  }
  return events;
}

inline RawImport import_raw_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  RawImport out;
  fs::path splits_file;
  std::vector<fs::path> observation_files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto name = e.path().filename().string();
    if (name == "splits.json" && splits_file.empty()) splits_file = e.path();
    if (name == "postprocessed-observations.json") observation_files.push_back(e.path());
  }
  if (splits_file.empty()) throw Error("raw corpus: no splits.json under " + root.string());

  auto splits = nlohmann::json::parse(read_file(splits_file));
  std::map<std::string, std::string> split_of;
  for (const auto& [key, ids] : splits.items()) {
    std::string split = key == "val" ? "dev" : key;
    if (!is_split_name(split) || !ids.is_array()) continue;
    for (const auto& id : ids)
      if (id.is_string()) split_of[id.get<std::string>()] = split;
  }

  std::sort(observation_files.begin(), observation_files.end());
  for (const auto& f : observation_files) {
    std::string game_id = f.parent_path().filename().string();
    auto it = split_of.find(game_id);
    if (it == split_of.end()) {
      // Split files sometimes list the log directory one level up.
      it = split_of.find(f.parent_path().parent_path().filename().string());
    }
    if (it == split_of.end()) {
      out.notes.push_back(game_id + ": not listed in splits.json, skipped");
      continue;
    }
    DialogueGame g;
    g.game_id = game_id;
    g.split = it->second;
    auto obs = nlohmann::json::parse(read_file(f));
    g.events = import_observations(obs, game_id, out.notes);
    out.games.push_back(std::move(g));
  }
  auto rank = [](const std::string& s) { return s == "train" ? 0 : s == "dev" ? 1 : 2; };
  std::stable_sort(out.games.begin(), out.games.end(), [&](const auto& a, const auto& b) {
    return std::pair(rank(a.split), a.game_id) < std::pair(rank(b.split), b.game_id);
  });
  return out;
}

}  // namespace bap
