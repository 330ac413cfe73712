#pragma once

// End-to-end pipeline over run directories.
//
//   <runs>/<run_id>/manifest.json                  configuration + per-turn status
//   <runs>/<run_id>/prompts/<game>__<turn>.txt      rendered prompt snapshots
//   <runs>/<run_id>/responses/<game>__<turn>.json   completion records
//   <runs>/<run_id>/reports/                        eval / analysis outputs
//
// Completions go through the shared response cache, so rerunning an
// interrupted run only contacts the provider for turns it never finished.

#include <bap/analysis.hpp>
#include <bap/corpus.hpp>
#include <bap/eval.hpp>
#include <bap/mistakes.hpp>
#include <bap/prompting.hpp>
#include <bap/provider.hpp>
#include <bap/raw_import.hpp>
#include <bap/remote.hpp>
#include <bap/retrieval.hpp>

#include "json.hpp"

#include <array>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace bap {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path corpus;
  std::string split = "test";
  std::string train_split = "train";
  // "echo", "nearest", or a provider config JSON file.
  std::string provider = "echo";
  std::string model_id;
  PromptConfig prompt;
  // "lexical" or an embedding config JSON file.
  std::string retrieval = "lexical";
  fs::path index_file;  // optional prebuilt index
  fs::path templates_root;
  fs::path cache_dir;
  fs::path runs_dir = "runs";
  std::string run_id;
  std::size_t parallel = 0;  // 0: 4 for remote providers, hardware threads for mocks
  double temperature = 0.0;
  int max_new_tokens = 500;
};

enum class TurnStatus { pending, done, failed };

inline std::string_view to_string(TurnStatus s) {
  switch (s) {
    case TurnStatus::pending: return "pending";
    case TurnStatus::done: return "done";
    case TurnStatus::failed: return "failed";
  }
  return "?";
}

inline TurnStatus turn_status_from(std::string_view s) {
  if (s == "done") return TurnStatus::done;
  if (s == "failed") return TurnStatus::failed;
  return TurnStatus::pending;
}

struct ManifestTurn {
  std::string game_id;
  std::size_t turn_index = 0;
  TurnStatus status = TurnStatus::pending;
  std::string request_hash;
  std::string error;
};

struct RunManifest {
  std::string run_id;
  std::string corpus_path;
  std::string corpus_digest;
  std::string split;
  std::string provider;
  std::string model_id;
  PromptConfig prompt;
  std::string retrieval_provider;
  std::string train_split;
  double temperature = 0.0;
  int max_new_tokens = 500;
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestTurn> turns;

  std::size_t count(TurnStatus s) const {
    return static_cast<std::size_t>(std::count_if(turns.begin(), turns.end(), [s](const auto& t) { return t.status == s; }));
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : m.turns) {
    nlohmann::json j = {{"game_id", t.game_id}, {"turn_index", t.turn_index}, {"status", to_string(t.status)}};
    if (!t.request_hash.empty()) j["request_hash"] = t.request_hash;
    if (!t.error.empty()) j["error"] = t.error;
    turns.push_back(std::move(j));
  }
  return {{"run_id", m.run_id},
          {"corpus", {{"path", m.corpus_path}, {"digest", m.corpus_digest}}},
          {"split", m.split},
          {"provider", m.provider},
          {"model_id", m.model_id},
          {"prompt_config", to_json(m.prompt)},
          {"retrieval", {{"provider", m.retrieval_provider}, {"k", m.prompt.k_examples}, {"train_split", m.train_split}}},
          {"generation", {{"temperature", m.temperature}, {"max_new_tokens", m.max_new_tokens}}},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"turns", std::move(turns)}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.corpus_path = j.at("corpus").at("path").get<std::string>();
  m.corpus_digest = j.at("corpus").at("digest").get<std::string>();
  m.split = j.at("split").get<std::string>();
  m.provider = j.at("provider").get<std::string>();
  m.model_id = j.at("model_id").get<std::string>();
  m.prompt = prompt_config_from_json(j.at("prompt_config"));
  m.retrieval_provider = j.at("retrieval").at("provider").get<std::string>();
  m.train_split = j.at("retrieval").value("train_split", std::string("train"));
  m.temperature = j.at("generation").at("temperature").get<double>();
  m.max_new_tokens = j.at("generation").at("max_new_tokens").get<int>();
  m.started_at = j.value("started_at", std::string{});
  m.finished_at = j.value("finished_at", std::string{});
  for (const auto& t : j.at("turns"))
    m.turns.push_back({t.at("game_id").get<std::string>(), t.at("turn_index").get<std::size_t>(),
                       turn_status_from(t.at("status").get<std::string>()), t.value("request_hash", std::string{}),
                       t.value("error", std::string{})});
  return m;
}

inline std::string turn_file_stem(const std::string& game_id, std::size_t turn_index) {
  std::string safe;
  for (char c : game_id) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return safe + "__" + std::to_string(turn_index);
}

// Corpus file actually read for a split (directory layout or single file).
inline fs::path corpus_file_for(const fs::path& corpus, const std::string& split) {
  return fs::is_directory(corpus) ? corpus / (split + ".jsonl") : corpus;
}

struct LoadedSplit {
  std::vector<DialogueGame> games;
  std::vector<TurnPair> pairs;
  std::string digest;
};

inline LoadedSplit load_split(const fs::path& corpus, const std::string& split, std::ostream* log = &std::cerr) {
  auto loaded = load_corpus(corpus, split);
  if (log)
    for (const auto& d : loaded.diagnostics)
      *log << "warning: " << corpus_file_for(corpus, split).string() << " record " << d.record
           << (d.field.empty() ? "" : " field " + d.field) << ": " << d.message << "\n";
  LoadedSplit out;
  out.pairs = aggregate_all(loaded.games);
  out.games = std::move(loaded.games);
  out.digest = sha256_hex(read_file(corpus_file_for(corpus, split)));
  return out;
}

inline std::shared_ptr<const EmbeddingProvider> make_embedder(const std::string& spec, const fs::path& cache_dir) {
  std::shared_ptr<const EmbeddingProvider> base;
  if (spec == "lexical") return std::make_shared<LexicalEmbedding>();
  if (!fs::exists(spec)) throw ConfigError("unknown retrieval provider '" + spec + "' (expected lexical or a config file)");
  base = std::make_shared<RemoteEmbedding>(RemoteConfig::from_json(nlohmann::json::parse(read_file(spec)), true));
  if (cache_dir.empty()) return base;
  return std::make_shared<CachedEmbedding>(base, cache_dir / "embeddings");
}

inline bool is_mock_provider(const std::string& spec) { return spec == "echo" || spec == "nearest"; }

inline std::unique_ptr<CompletionProvider> make_provider(const std::string& spec, const std::vector<TurnPair>& turns,
                                                         std::shared_ptr<const ExampleIndex> index,
                                                         std::shared_ptr<const EmbeddingProvider> embedder) {
  if (spec == "echo") return std::make_unique<EchoOracle>(turns);
  if (spec == "nearest") return std::make_unique<NearestNeighbor>(std::move(index), std::move(embedder), turns);
  if (!fs::exists(spec)) throw ConfigError("unknown provider '" + spec + "' (expected echo, nearest or a config file)");
  auto j = nlohmann::json::parse(read_file(spec));
  if (j.value("kind", std::string("remote")) != "remote") throw ConfigError("provider config kind must be remote");
  return std::make_unique<RemoteCompletionProvider>(fs::path(spec).stem().string(), RemoteConfig::from_json(j));
}

inline std::string default_run_id(const RunConfig& c, const std::string& corpus_digest, const std::string& model_id) {
  nlohmann::json key = {{"corpus_digest", corpus_digest}, {"split", c.split},
                        {"provider", c.provider},         {"model_id", model_id},
                        {"prompt", to_json(c.prompt)},    {"retrieval", c.retrieval},
                        {"train_split", c.train_split},   {"temperature", c.temperature},
                        {"max_new_tokens", c.max_new_tokens}};
  return "run-" + sha256_hex(key.dump()).substr(0, 12);
}

struct RunOutcome {
  RunManifest manifest;
  fs::path dir;
  std::size_t provider_calls = 0;  // cache misses
  std::size_t cache_hits = 0;
  std::size_t skipped = 0;  // turns already done in an earlier invocation
};

inline void save_manifest(const fs::path& dir, const RunManifest& m) {
  write_file_atomic(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

inline RunManifest load_manifest(const fs::path& dir) {
  auto p = dir / "manifest.json";
  if (!fs::exists(p)) throw ConfigError("no run at " + dir.string());
  return manifest_from_json(nlohmann::json::parse(read_file(p)));
}

// For each turn of the split: retrieve examples, render the prompt, complete
// through the cache, store the raw response. Provider failures mark the turn
// failed and the run continues.
inline RunOutcome cmd_run(const RunConfig& cfg, CompletionProvider* provider_override = nullptr,
                          std::ostream* log = &std::cerr) {
  if (cfg.prompt.k_examples < 0) throw ConfigError("k must be >= 0");
  auto test = load_split(cfg.corpus, cfg.split, log);
  auto templates = TemplateSet::resolve(cfg.templates_root, cfg.prompt.template_set);

  bool need_index = cfg.prompt.k_examples > 0 || cfg.provider == "nearest";
  std::shared_ptr<const EmbeddingProvider> embedder;
  std::shared_ptr<const ExampleIndex> index = std::make_shared<ExampleIndex>();
  if (need_index) {
    embedder = make_embedder(cfg.retrieval, cfg.cache_dir);
    if (!cfg.index_file.empty()) {
      index = std::make_shared<ExampleIndex>(load_index(cfg.index_file));
    } else {
      auto train = load_split(cfg.corpus, cfg.train_split, log);
      index = std::make_shared<ExampleIndex>(build_index(*embedder, train.pairs, is_mock_provider(cfg.retrieval) ? 1 : 4));
    }
  }

  std::unique_ptr<CompletionProvider> owned;
  CompletionProvider* provider = provider_override;
  if (!provider) {
    owned = make_provider(cfg.provider, test.pairs, index, embedder);
    provider = owned.get();
  }
  std::string model_id = cfg.model_id.empty() ? provider->name() : cfg.model_id;

  RunOutcome out;
  std::string run_id = cfg.run_id.empty() ? default_run_id(cfg, test.digest, model_id) : cfg.run_id;
  out.dir = cfg.runs_dir / run_id;
  fs::create_directories(out.dir / "prompts");
  fs::create_directories(out.dir / "responses");

  RunManifest& m = out.manifest;
  std::map<TurnKey, ManifestTurn> previous;
  if (fs::exists(out.dir / "manifest.json")) {
    auto old = load_manifest(out.dir);
    if (old.corpus_digest != test.digest)
      throw ConfigError("run " + run_id + " was made from a different corpus (digest mismatch)");
    for (auto& t : old.turns) previous[{t.game_id, t.turn_index}] = t;
    m.started_at = old.started_at;
  }
  m.run_id = run_id;
  m.corpus_path = fs::absolute(cfg.corpus).lexically_normal().string();
  m.corpus_digest = test.digest;
  m.split = cfg.split;
  m.provider = cfg.provider;
  m.model_id = model_id;
  m.prompt = cfg.prompt;
  m.retrieval_provider = need_index ? embedder->name() : cfg.retrieval;
  m.train_split = cfg.train_split;
  m.temperature = cfg.temperature;
  m.max_new_tokens = cfg.max_new_tokens;
  if (m.started_at.empty()) m.started_at = utc_now_iso8601();
  for (const auto& p : test.pairs) {
    ManifestTurn t{p.game_id, p.turn_index, TurnStatus::pending, {}, {}};
    if (auto it = previous.find(key_of(p)); it != previous.end() && it->second.status == TurnStatus::done &&
                                            fs::exists(out.dir / "responses" / (turn_file_stem(p.game_id, p.turn_index) + ".json")))
      t = it->second;
    m.turns.push_back(std::move(t));
  }

  ResponseCache cache(cfg.cache_dir.empty() ? out.dir / "cache" : cfg.cache_dir);
  CacheStats stats;
  std::mutex manifest_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> since_save{0};
  std::size_t parallel = cfg.parallel;
  if (parallel == 0)
    parallel = provider->deterministic() ? std::max(1u, std::thread::hardware_concurrency()) : 4;

  auto work = [&] {
    for (std::size_t i = next++; i < test.pairs.size(); i = next++) {
      auto& turn = m.turns[i];
      if (turn.status == TurnStatus::done) {
        ++out.skipped;
        continue;
      }
      const TurnPair& p = test.pairs[i];
      std::string stem = turn_file_stem(p.game_id, p.turn_index);
      TurnStatus status = TurnStatus::done;
      std::string hash, error;
      try {
        std::vector<const TurnPair*> examples;
        if (cfg.prompt.k_examples > 0)
          for (const auto& r : top_k(*index, *embedder, p.instruction, static_cast<std::size_t>(cfg.prompt.k_examples)))
            examples.push_back(r.pair);
        CompletionRequest req{model_id, render_prompt(cfg.prompt, templates, examples, p.instruction), cfg.temperature,
                              cfg.max_new_tokens, key_of(p)};
        write_file_atomic(out.dir / "prompts" / (stem + ".txt"), req.prompt.text);
        auto rec = cached_complete(*provider, req, cache, &stats);
        hash = rec.request_hash;
        write_file_atomic(out.dir / "responses" / (stem + ".json"), to_json(rec).dump(2) + "\n");
      } catch (const std::exception& e) {
        status = TurnStatus::failed;
        error = e.what();
      }
      std::lock_guard lk(manifest_mu);
      turn.status = status;
      turn.request_hash = hash;
      turn.error = error;
      if (++since_save >= 25) {
        since_save = 0;
        save_manifest(out.dir, m);
      }
    }
  };
  if (parallel <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(parallel, test.pairs.size()); ++t) pool.emplace_back(work);
  }
  m.finished_at = utc_now_iso8601();
  save_manifest(out.dir, m);
  out.provider_calls = stats.misses;
  out.cache_hits = stats.hits;
  return out;
}

// --- convert and index -------------------------------------------------------

struct ConvertResult {
  std::vector<SplitStats> stats;
  std::vector<std::string> notes;  // importer notes for raw input
};

// Reads a raw corpus (a tree with splits.json) or normalized JSONL (a file or
// a directory of <split>.jsonl) and writes <out>/<split>.jsonl plus
// stats.json. Any malformed record aborts before anything is written.
inline ConvertResult cmd_convert(const fs::path& in, const fs::path& out) {
  if (!fs::exists(in)) throw ConfigError("input does not exist: " + in.string());
  ConvertResult res;
  std::map<std::string, std::vector<DialogueGame>> by_split;
  bool raw = false;
  if (fs::is_directory(in))
    for (const auto& e : fs::recursive_directory_iterator(in))
      if (e.is_regular_file() && e.path().filename() == "splits.json") raw = true;
  if (raw) {
    auto imported = import_raw_corpus(in);
    res.notes = std::move(imported.notes);
    for (auto& g : imported.games) by_split[g.split].push_back(std::move(g));
  } else {
    std::vector<fs::path> files;
    if (fs::is_directory(in)) {
      for (const auto& s : split_names())
        if (fs::exists(in / (s + ".jsonl"))) files.push_back(in / (s + ".jsonl"));
      if (files.empty()) throw ConfigError(in.string() + " holds neither splits.json nor <split>.jsonl files");
    } else {
      files.push_back(in);
    }
    for (const auto& f : files) {
      auto loaded = parse_corpus(read_file(f));
      if (!loaded.diagnostics.empty()) {
        const auto& d = loaded.diagnostics.front();
        throw Error(f.string() + " line " + std::to_string(d.record) + (d.field.empty() ? "" : " (" + d.field + ")") +
                    ": " + d.message);
      }
      for (auto& g : loaded.games) by_split[g.split].push_back(std::move(g));
    }
  }
  std::set<std::string> ids;
  for (const auto& [split, games] : by_split)
    for (const auto& g : games)
      if (!ids.insert(g.game_id).second) throw Error("game id '" + g.game_id + "' appears in more than one split");

  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [split, games] : by_split) {
    res.stats.push_back(split_stats(games, split));
    stats[split] = {{"games", res.stats.back().game_count}, {"pairs", res.stats.back().pair_count}};
  }
  fs::create_directories(out);
  for (const auto& [split, games] : by_split) write_file_atomic(out / (split + ".jsonl"), write_corpus(games));
  write_file_atomic(out / "stats.json", stats.dump(2) + "\n");
  return res;
}

inline ExampleIndex cmd_index(const fs::path& corpus, const std::string& split, const std::string& retrieval,
                              const fs::path& cache_dir, const fs::path& out, std::size_t parallel = 1) {
  auto data = load_split(corpus, split);
  auto embedder = make_embedder(retrieval, cache_dir);
  auto index = build_index(*embedder, data.pairs, std::max<std::size_t>(1, parallel));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_index(index, out);
  return index;
}

// --- evaluation and analysis -------------------------------------------------

struct RunData {
  RunManifest manifest;
  std::vector<TurnPair> pairs;
};

inline RunData load_run(const fs::path& run_dir, std::ostream* log = &std::cerr) {
  RunData d{load_manifest(run_dir), {}};
  auto split = load_split(d.manifest.corpus_path, d.manifest.split, log);
  if (split.digest != d.manifest.corpus_digest)
    throw ConfigError("corpus at " + d.manifest.corpus_path + " changed since run " + d.manifest.run_id);
  d.pairs = std::move(split.pairs);
  return d;
}

inline EvalReport evaluate_run_dir(const fs::path& run_dir, const RunData& data, MatchMode mode = MatchMode::multiset) {
  return evaluate_run(
      data.pairs,
      [&](const TurnPair& p) -> std::optional<std::string> {
        auto f = run_dir / "responses" / (turn_file_stem(p.game_id, p.turn_index) + ".json");
        if (!fs::exists(f)) return std::nullopt;
        try {
          return completion_record_from_json(nlohmann::json::parse(read_file(f))).response_text;
        } catch (const std::exception& e) {
          std::cerr << "warning: unreadable response " << f.string() << ": " << e.what() << "\n";
          return std::nullopt;
        }
      },
      mode);
}

// Table label of a run: the model id, or the provider name for mocks.
inline std::string run_label(const RunManifest& m) {
  return is_mock_provider(m.provider) ? m.provider : m.model_id;
}

// Writes reports/eval.json and reports/eval.txt.
inline EvalReport cmd_eval(const fs::path& run_dir, MatchMode mode = MatchMode::multiset) {
  auto data = load_run(run_dir);
  auto report = evaluate_run_dir(run_dir, data, mode);
  auto j = to_json(report);
  j["run_id"] = data.manifest.run_id;
  j["match_mode"] = mode == MatchMode::multiset ? "multiset" : "ordered_prefix";
  write_file_atomic(run_dir / "reports" / "eval.json", j.dump(2) + "\n");
  write_file_atomic(run_dir / "reports" / "eval.txt",
                    render_table({{run_label(data.manifest), report.overall, report.variant_net_gold, std::nullopt}}));
  return report;
}

struct AnalysisResult {
  std::vector<CategoryStats> categories;
  MistakeReport mistakes;
  std::vector<LabelStats> annotations;
};

inline nlohmann::json to_json(const AnalysisResult& a) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : a.categories) cats.push_back(to_json(c));
  nlohmann::json flagged = nlohmann::json::array();
  for (const auto& t : a.mistakes.turns)
    if (t.flagged)
      flagged.push_back({{"game_id", t.game_id}, {"turn_index", t.turn_index}, {"cancelled_actions", t.cancelled_actions}});
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : a.annotations)
    labels.push_back({{"label", l.label}, {"turns", l.turns}, {"exact", l.exact}, {"unmatched", l.unmatched}});
  return {{"categories", cats},
          {"builder_mistakes",
           {{"turns", a.mistakes.turns.size()},
            {"flagged", a.mistakes.flagged_count},
            {"flagged_fraction", a.mistakes.flagged_fraction},
            {"flagged_turns", flagged}}},
          {"annotations", labels}};
}

inline AnalysisResult cmd_analyze(const fs::path& run_dir, const fs::path& lexicon_dir,
                                  const fs::path& annotations = {}) {
  auto data = load_run(run_dir);
  auto report = evaluate_run_dir(run_dir, data);
  AnalysisResult a;
  a.categories = category_report(report, data.pairs, load_lexicons(lexicon_dir));
  a.mistakes = detect_builder_mistakes(data.pairs);
  if (!annotations.empty()) a.annotations = annotation_report(report, parse_annotations(read_file(annotations)));
  write_file_atomic(run_dir / "reports" / "analysis.json", to_json(a).dump(2) + "\n");
  std::string txt = render_category_table(a.categories);
  txt += "\nBuilder mistakes: " + std::to_string(a.mistakes.flagged_count) + " of " +
         std::to_string(a.mistakes.turns.size()) + " turns (" + format_fixed(100.0 * a.mistakes.flagged_fraction, 2) +
         "%)\n";
  write_file_atomic(run_dir / "reports" / "analysis.txt", txt);
  return a;
}

// --- comparison tables ---------------------------------------------------------

// Published F1 per model family, shown beside matching run labels.
inline std::optional<double> reference_f1(std::string_view label) {
  std::string l = to_lower_ascii(label);
  if (l.find("gpt-4") != std::string::npos || l.find("gpt4") != std::string::npos) return 0.39;
  if (l.find("70b") != std::string::npos) return 0.33;
  if (l.find("8b") != std::string::npos) return l.find("fine") != std::string::npos ? 0.19 : 0.18;
  return std::nullopt;
}

inline std::vector<ReportRow> cmd_report(const std::vector<fs::path>& run_dirs) {
  std::vector<ReportRow> rows;
  std::vector<std::string> run_ids;
  for (const auto& dir : run_dirs) {
    auto data = load_run(dir);
    auto r = evaluate_run_dir(dir, data);
    std::string label = run_label(data.manifest);
    rows.push_back({label, r.overall, r.variant_net_gold, reference_f1(label)});
    run_ids.push_back(data.manifest.run_id);
  }
  std::map<std::string, int> uses;
  for (const auto& r : rows) ++uses[r.label];
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (uses[rows[i].label] > 1) rows[i].label += " (" + run_ids[i] + ")";
  return rows;
}

struct AblationRow {
  PromptConfig config;
  std::string run_id;
  Metrics metrics;
};

// Runs and scores each ablation prompt variant on `base.split` (dev by default).
inline std::vector<AblationRow> cmd_ablate(RunConfig base, CompletionProvider* provider_override = nullptr,
                                           std::ostream* log = &std::cerr) {
  std::vector<AblationRow> rows;
  auto configs = ablation_configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig c = base;
    c.prompt = configs[i];
    c.prompt.template_set = base.prompt.template_set;
    c.run_id.clear();
    auto outcome = cmd_run(c, provider_override, log);
    auto data = load_run(outcome.dir, log);
    rows.push_back({c.prompt, outcome.manifest.run_id, evaluate_run_dir(outcome.dir, data).overall});
  }
  return rows;
}

// Published dev-split F1 of Llama-3-8b for each ablation row, in order.
inline constexpr std::array<double, 10> kAblationReferenceF1 = {0.15, 0.17, 0.18, 0.18, 0.18,
                                                               0.18, 0.19, 0.17, 0.17, 0.17};

inline std::string render_ablation_table(const std::vector<AblationRow>& rows) {
  std::vector<ReportRow> rr;
  auto configs = ablation_configs();
  for (const auto& r : rows) {
    std::optional<double> ref;
    for (std::size_t i = 0; i < configs.size(); ++i)
      if (configs[i].sections_flag() == r.config.sections_flag() && configs[i].k_examples == r.config.k_examples)
        ref = kAblationReferenceF1[i];
    rr.push_back({r.config.label(), r.metrics, std::nullopt, ref});
  }
  return render_table(rr);
}

}  // namespace bap
