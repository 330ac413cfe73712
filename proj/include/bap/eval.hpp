#pragma once

// Per-turn action matching and micro-averaged precision/recall/F1.
//
// A predicted action matches a gold action when kind, colour, x, y and z are
// all equal. Matching is a multiset intersection: order is ignored and each
// gold action absorbs at most one prediction.

#include <bap/corpus.hpp>
#include <bap/dsl.hpp>
#include <bap/world.hpp>

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bap {

struct TurnMatch {
  std::string game_id;
  std::size_t turn_index = 0;
  std::size_t tp = 0;
  std::size_t pred_count = 0;
  std::size_t gold_count = 0;
  bool exact = false;
  bool missing_completion = false;
  ParseDiagnostics diagnostics;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t turn_count = 0;
  std::size_t tp_sum = 0;
  std::size_t pred_sum = 0;
  std::size_t gold_sum = 0;
};

enum class MatchMode { multiset, ordered_prefix };

inline std::size_t multiset_overlap(const std::vector<Action>& pred, const std::vector<Action>& gold) {
  std::map<Action, std::size_t> remaining;
  for (const auto& g : gold) ++remaining[g];
  std::size_t tp = 0;
  for (const auto& p : pred) {
    auto it = remaining.find(p);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++tp;
    }
  }
  return tp;
}

// Length of the common prefix. Comparison variant for order-sensitive scoring.
inline std::size_t prefix_overlap(const std::vector<Action>& pred, const std::vector<Action>& gold) {
  std::size_t n = 0;
  while (n < pred.size() && n < gold.size() && pred[n] == gold[n]) ++n;
  return n;
}

inline TurnMatch match_turn(const std::vector<Action>& pred, const std::vector<Action>& gold,
                            MatchMode mode = MatchMode::multiset) {
  TurnMatch m;
  m.tp = mode == MatchMode::multiset ? multiset_overlap(pred, gold) : prefix_overlap(pred, gold);
  m.pred_count = pred.size();
  m.gold_count = gold.size();
  m.exact = m.tp == m.pred_count && m.tp == m.gold_count;
  return m;
}

inline Metrics metrics_from_counts(std::size_t tp, std::size_t pred, std::size_t gold, std::size_t turns) {
  Metrics m;
  m.turn_count = turns;
  m.tp_sum = tp;
  m.pred_sum = pred;
  m.gold_sum = gold;
  m.precision = pred ? static_cast<double>(tp) / static_cast<double>(pred) : 0.0;
  m.recall = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
  m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

// Sums counts over turns, then divides once.
inline Metrics micro_f1(const std::vector<TurnMatch>& matches) {
  std::size_t tp = 0, pred = 0, gold = 0;
  for (const auto& m : matches) {
    tp += m.tp;
    pred += m.pred_count;
    gold += m.gold_count;
  }
  return metrics_from_counts(tp, pred, gold, matches.size());
}

struct EvalReport {
  Metrics overall;
  // Same predictions scored against gold with builder mistakes removed.
  Metrics variant_net_gold;
  std::vector<TurnMatch> turns;
  std::vector<TurnKey> missing;
};

// A turn's response text, or nullopt when the run has no completion for it.
using ResponseLookup = std::function<std::optional<std::string>(const TurnPair&)>;

inline EvalReport evaluate_run(const std::vector<TurnPair>& pairs, const ResponseLookup& response_for,
                               MatchMode mode = MatchMode::multiset) {
  EvalReport r;
  std::vector<TurnMatch> net_matches;
  for (const auto& p : pairs) {
    auto text = response_for(p);
    Extraction ex;
    if (text) ex = extract_actions(*text);
    TurnMatch m = match_turn(ex.actions, p.gold_actions, mode);
    m.game_id = p.game_id;
    m.turn_index = p.turn_index;
    m.missing_completion = !text;
    m.diagnostics = std::move(ex.diagnostics);
    if (!text) r.missing.push_back({p.game_id, p.turn_index});
    net_matches.push_back(match_turn(ex.actions, net_actions(p.gold_actions), mode));
    r.turns.push_back(std::move(m));
  }
  r.overall = micro_f1(r.turns);
  r.variant_net_gold = micro_f1(net_matches);
  return r;
}

inline nlohmann::json to_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},           {"turn_count", m.turn_count},
          {"tp_sum", m.tp_sum},       {"pred_sum", m.pred_sum}, {"gold_sum", m.gold_sum}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.turn_count = j.at("turn_count").get<std::size_t>();
  m.tp_sum = j.at("tp_sum").get<std::size_t>();
  m.pred_sum = j.at("pred_sum").get<std::size_t>();
  m.gold_sum = j.at("gold_sum").get<std::size_t>();
  return m;
}

inline nlohmann::json to_json(const ParseDiagnostics& d) {
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& n : d.notes) notes.push_back({{"line", n.line}, {"message", n.message}});
  return {{"ignored_line_count", d.ignored_line_count},
          {"truncated_at_new_instruction", d.truncated_at_new_instruction},
          {"malformed_call_count", d.malformed_call_count},
          {"notes", notes}};
}

inline nlohmann::json to_json(const TurnMatch& t) {
  return {{"game_id", t.game_id},       {"turn_index", t.turn_index}, {"tp", t.tp},
          {"pred_count", t.pred_count}, {"gold_count", t.gold_count}, {"exact", t.exact},
          {"missing_completion", t.missing_completion}, {"diagnostics", to_json(t.diagnostics)}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : r.turns) turns.push_back(to_json(t));
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& m : r.missing) missing.push_back({{"game_id", m.game_id}, {"turn_index", m.turn_index}});
  return {{"overall", to_json(r.overall)},
          {"variant_net_gold", to_json(r.variant_net_gold)},
          {"turns", turns},
          {"missing", missing}};
}

inline std::string format_fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Fixed-width "Model | F1" table. Each row is (label, overall, net-gold variant).
struct ReportRow {
  std::string label;
  Metrics overall;
  std::optional<Metrics> net_gold;
  std::optional<double> reference_f1;
};

inline std::string render_table(const std::vector<ReportRow>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.label.size());
  bool any_ref = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.reference_f1.has_value(); });
  auto pad = [](std::string s, std::size_t n) {
    if (s.size() < n) s.append(n - s.size(), ' ');
    return s;
  };
  std::ostringstream os;
  std::string header = pad("Model", w) + "  " + pad("F1", 6) + "  " + pad("P", 6) + "  " + pad("R", 6) + "  " +
                       pad("F1-net", 6) + "  " + pad("turns", 6);
  if (any_ref) header += "  ref-F1";
  os << header << "\n" << std::string(header.size(), '-') << "\n";
  for (const auto& r : rows) {
    os << pad(r.label, w) << "  " << format_fixed(r.overall.f1) << "  " << format_fixed(r.overall.precision) << "  "
       << format_fixed(r.overall.recall) << "  " << (r.net_gold ? format_fixed(r.net_gold->f1) : pad("-", 6)) << "  "
       << pad(std::to_string(r.overall.turn_count), 6);
    if (any_ref) os << "  " << (r.reference_f1 ? format_fixed(*r.reference_f1, 2) : "-");
    os << "\n";
  }
  return os.str();
}

}  // namespace bap
