#pragma once

// Lexicon-based error analysis: which turns mention spatial relations, shapes
// or anaphora, and how often those turns are predicted exactly.
//
// Lexicon files: one lowercase term per line, '#' starts a comment, terms may
// span several words. Annotation files: CSV rows "game_id,turn_index,label",
// an optional header row is skipped.

#include <bap/corpus.hpp>
#include <bap/eval.hpp>
#include <bap/util.hpp>

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bap {

struct Lexicon {
  std::string category;
  std::vector<std::vector<std::string>> terms;  // each term as its token sequence
  std::string source;
};

// Lowercase ASCII alphanumeric runs; everything else separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline Lexicon parse_lexicon(std::string category, std::string_view text, std::string source = {}) {
  Lexicon lex{std::move(category), {}, std::move(source)};
  std::set<std::vector<std::string>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (seen.insert(toks).second) lex.terms.push_back(std::move(toks));
  }
  if (lex.terms.empty()) throw ConfigError("lexicon '" + lex.category + "' has no terms");
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw ConfigError("missing lexicon " + file.string());
  return parse_lexicon(file.stem().string(), read_file(file), file.string());
}

// Loads every *.txt in `dir`, one category per file, sorted by category.
inline std::vector<Lexicon> load_lexicons(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("missing lexicon directory " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Lexicon> out;
  for (const auto& f : files) out.push_back(load_lexicon(f));
  return out;
}

inline bool mentions(const std::vector<std::string>& tokens, const Lexicon& lex) {
  for (const auto& term : lex.terms) {
    if (term.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + term.size() <= tokens.size(); ++i)
      if (std::equal(term.begin(), term.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

inline std::set<std::string> categorize(std::string_view instruction, const std::vector<Lexicon>& lexicons) {
  auto tokens = tokenize(instruction);
  std::set<std::string> out;
  for (const auto& lex : lexicons)
    if (mentions(tokens, lex)) out.insert(lex.category);
  return out;
}

struct CategoryStats {
  std::string category;
  std::size_t total_turns = 0;
  std::vector<TurnKey> turns;          // turns mentioning the category
  std::vector<TurnKey> correct_turns;  // subset predicted exactly
  double utterance_fraction = 0.0;
  std::optional<double> correct_fraction;  // nullopt when no turn is in the category
};

namespace detail {

inline std::map<TurnKey, const TurnMatch*> index_matches(const EvalReport& report) {
  std::map<TurnKey, const TurnMatch*> by_key;
  for (const auto& t : report.turns) by_key[{t.game_id, t.turn_index}] = &t;
  return by_key;
}

inline const TurnMatch& match_for(const std::map<TurnKey, const TurnMatch*>& by_key, const TurnPair& p) {
  auto it = by_key.find(key_of(p));
  if (it == by_key.end())
    throw Error("eval report has no turn " + p.game_id + "#" + std::to_string(p.turn_index));
  return *it->second;
}

}  // namespace detail

inline std::vector<CategoryStats> category_report(const EvalReport& report, const std::vector<TurnPair>& pairs,
                                                  const std::vector<Lexicon>& lexicons) {
  auto by_key = detail::index_matches(report);
  std::vector<CategoryStats> out;
  for (const auto& lex : lexicons) out.push_back({lex.category, pairs.size(), {}, {}, 0.0, std::nullopt});
  for (const auto& p : pairs) {
    const TurnMatch& m = detail::match_for(by_key, p);
    auto tokens = tokenize(p.instruction);
    for (std::size_t i = 0; i < lexicons.size(); ++i) {
      if (!mentions(tokens, lexicons[i])) continue;
      out[i].turns.push_back(key_of(p));
      if (m.exact) out[i].correct_turns.push_back(key_of(p));
    }
  }
  for (auto& s : out) {
    if (s.total_turns) s.utterance_fraction = static_cast<double>(s.turns.size()) / static_cast<double>(s.total_turns);
    if (!s.turns.empty())
      s.correct_fraction = static_cast<double>(s.correct_turns.size()) / static_cast<double>(s.turns.size());
  }
  return out;
}

struct Annotation {
  TurnKey turn;
  std::string label;
};

inline std::vector<Annotation> parse_annotations(std::string_view csv) {
  std::vector<Annotation> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::string(trim(cell)));
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(std::string(trim(cell)));
    if (cells.size() != 3) throw Error("annotations line " + std::to_string(line_no) + ": expected 3 columns");
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      if (line_no == 1 && out.empty()) continue;  // header
      throw Error("annotations line " + std::to_string(line_no) + ": bad turn_index '" + cells[1] + "'");
    }
    out.push_back({{cells[0], idx}, cells[2]});
  }
  return out;
}

struct LabelStats {
  std::string label;
  std::size_t turns = 0;
  std::size_t exact = 0;
  std::size_t unmatched = 0;  // annotations naming turns absent from the run
};

// Joins manual annotations onto evaluated turns, per label.
inline std::vector<LabelStats> annotation_report(const EvalReport& report, const std::vector<Annotation>& notes) {
  auto by_key = detail::index_matches(report);
  std::map<std::string, LabelStats> acc;
  for (const auto& a : notes) {
    auto& s = acc[a.label];
    s.label = a.label;
    auto it = by_key.find(a.turn);
    if (it == by_key.end()) {
      ++s.unmatched;
      continue;
    }
    ++s.turns;
    if (it->second->exact) ++s.exact;
  }
  std::vector<LabelStats> out;
  for (auto& [_, s] : acc) out.push_back(std::move(s));
  return out;
}

inline nlohmann::json to_json(const CategoryStats& s) {
  auto keys = [](const std::vector<TurnKey>& ks) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& k : ks) a.push_back({{"game_id", k.game_id}, {"turn_index", k.turn_index}});
    return a;
  };
  return {{"category", s.category},
          {"total_turns", s.total_turns},
          {"category_turns", s.turns.size()},
          {"correct_turns", s.correct_turns.size()},
          {"utterance_fraction", s.utterance_fraction},
          {"correct_fraction", s.correct_fraction ? nlohmann::json(*s.correct_fraction) : nlohmann::json(nullptr)},
          {"turn_ids", keys(s.turns)},
          {"correct_turn_ids", keys(s.correct_turns)}};
}

inline std::string render_category_table(const std::vector<CategoryStats>& stats) {
  std::ostringstream os;
  os << "Category   In-category      Correct\n";
  os << "-----------------------------------\n";
  for (const auto& s : stats) {
    std::string name = s.category;
    name.resize(std::max<std::size_t>(name.size(), 10), ' ');
    os << name << " " << format_fixed(100.0 * s.utterance_fraction, 2) << "% (" << s.turns.size() << ")  "
       << (s.correct_fraction ? format_fixed(100.0 * *s.correct_fraction, 2) + "%" : std::string("n/a")) << "\n";
  }
  return os.str();
}

}  // namespace bap
