// Command-line front end: convert, index, run, eval, analyze, ablate, report.
//
// Exit codes: 0 success, 1 some turns failed, 2 configuration or input error.

#include <bap/bap.hpp>

#include "CLI11.hpp"

#include <iostream>

#ifndef BAP_TEMPLATE_ROOT
#define BAP_TEMPLATE_ROOT "templates"
#endif
#ifndef BAP_LEXICON_DIR
#define BAP_LEXICON_DIR "lexicons"
#endif

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string format = "table";
  std::string runs_dir = "runs";
};

bap::PromptConfig parse_sections(const std::string& flag, int k, const std::string& template_set) {
  bap::PromptConfig c;
  for (char ch : flag)
    if (std::string_view("seto").find(ch) == std::string_view::npos)
      throw bap::ConfigError("--prompt-sections takes letters from 'seto', got '" + flag + "'");
  c.include_system = flag.find('s') != std::string::npos;
  c.include_env = flag.find('e') != std::string::npos;
  c.include_task = flag.find('t') != std::string::npos;
  c.include_other = flag.find('o') != std::string::npos;
  c.k_examples = k;
  c.template_set = template_set;
  return c;
}

fs::path run_dir_for(const std::string& id, const std::string& runs_dir) {
  fs::path p(id);
  if (fs::exists(p / "manifest.json")) return p;
  p = fs::path(runs_dir) / id;
  if (fs::exists(p / "manifest.json")) return p;
  throw bap::ConfigError("unknown run '" + id + "'");
}

void add_run_options(CLI::App* cmd, bap::RunConfig& rc, std::string& sections, int& k, std::string& corpus,
                     std::string& index, std::string& cache, std::string& templates, unsigned& seed) {
  cmd->add_option("--corpus", corpus, "Normalized corpus file or directory")->required();
  cmd->add_option("--split", rc.split, "Split to run on");
  cmd->add_option("--train-split", rc.train_split, "Split the example index is built from");
  cmd->add_option("--provider", rc.provider, "echo, nearest, or a provider config JSON file");
  cmd->add_option("--model", rc.model_id, "Model id sent to the provider");
  cmd->add_option("--k", k, "In-context examples per prompt")->check(CLI::Range(0, 64));
  cmd->add_option("--prompt-sections", sections, "Sections to include: s(ystem) e(nv) t(ask) o(ther)");
  cmd->add_option("--template-set", rc.prompt.template_set, "Template set name, or 'builtin'");
  cmd->add_option("--template-root", templates, "Directory holding template sets");
  cmd->add_option("--retrieval", rc.retrieval, "lexical, or an embedding config JSON file");
  cmd->add_option("--index", index, "Prebuilt index file");
  cmd->add_option("--cache-dir", cache, "Shared response and embedding cache");
  cmd->add_option("--parallel", rc.parallel, "Concurrent turns (0: automatic)");
  cmd->add_option("--run-id", rc.run_id, "Run directory name (default: digest of the configuration)");
  cmd->add_option("--max-new-tokens", rc.max_new_tokens, "Generation limit");
  cmd->add_option("--seed", seed, "Reserved; generation is greedy");
}

void print_run(const bap::RunOutcome& o, const std::string& format) {
  const auto& m = o.manifest;
  if (format == "json") {
    nlohmann::json j = {{"run_id", m.run_id},
                        {"dir", o.dir.string()},
                        {"turns", m.turns.size()},
                        {"done", m.count(bap::TurnStatus::done)},
                        {"failed", m.count(bap::TurnStatus::failed)},
                        {"provider_calls", o.provider_calls},
                        {"cache_hits", o.cache_hits},
                        {"resumed", o.skipped}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "run " << m.run_id << " (" << o.dir.string() << ")\n"
              << "  turns " << m.turns.size() << ", done " << m.count(bap::TurnStatus::done) << ", failed "
              << m.count(bap::TurnStatus::failed) << "\n"
              << "  provider calls " << o.provider_calls << ", cache hits " << o.cache_hits << ", resumed "
              << o.skipped << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builder action prediction pipeline"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--runs-dir", common.runs_dir, "Directory holding run directories");

  std::string convert_in, convert_out;
  auto* convert = app.add_subcommand("convert", "Normalize a raw or normalized corpus");
  convert->add_option("input", convert_in, "Raw corpus tree or normalized JSONL")->required();
  convert->add_option("--out", convert_out, "Output directory")->required();

  std::string idx_corpus, idx_split = "train", idx_retrieval = "lexical", idx_cache, idx_out;
  std::size_t idx_parallel = 1;
  auto* index = app.add_subcommand("index", "Embed a split into an example index");
  index->add_option("--corpus", idx_corpus)->required();
  index->add_option("--split", idx_split);
  index->add_option("--retrieval", idx_retrieval, "lexical, or an embedding config JSON file");
  index->add_option("--cache-dir", idx_cache);
  index->add_option("--parallel", idx_parallel);
  index->add_option("--out", idx_out)->required();

  bap::RunConfig rc;
  std::string sections = "seto", corpus, index_file, cache, templates = BAP_TEMPLATE_ROOT;
  int k = 3;
  unsigned seed = 0;
  auto* run = app.add_subcommand("run", "Complete every turn of a split");
  add_run_options(run, rc, sections, k, corpus, index_file, cache, templates, seed);

  bap::RunConfig ab;
  ab.split = "dev";
  std::string ab_sections = "seto", ab_corpus, ab_index, ab_cache, ab_templates = BAP_TEMPLATE_ROOT;
  int ab_k = 3;
  unsigned ab_seed = 0;
  auto* ablate = app.add_subcommand("ablate", "Run and score every prompt ablation");
  add_run_options(ablate, ab, ab_sections, ab_k, ab_corpus, ab_index, ab_cache, ab_templates, ab_seed);

  std::string eval_run;
  bool ordered = false;
  auto* eval = app.add_subcommand("eval", "Score a run");
  eval->add_option("run", eval_run, "Run id or directory")->required();
  eval->add_flag("--ordered", ordered, "Score the longest matching prefix instead of the multiset overlap");

  std::string an_run, lexicon_dir = BAP_LEXICON_DIR, annotations;
  auto* analyze = app.add_subcommand("analyze", "Category and builder-mistake analysis of a run");
  analyze->add_option("run", an_run, "Run id or directory")->required();
  analyze->add_option("--lexicon-dir", lexicon_dir);
  analyze->add_option("--annotations", annotations, "CSV of game_id,turn_index,label");

  std::vector<std::string> report_runs;
  auto* report = app.add_subcommand("report", "Comparison table over runs");
  report->add_option("runs", report_runs, "Run ids or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc_parse = app.exit(e);
    return rc_parse == 0 ? 0 : 2;
  }
  const bool json = common.format == "json";

  try {
    if (*convert) {
      auto res = bap::cmd_convert(convert_in, convert_out);
      for (const auto& n : res.notes) std::cerr << "note: " << n << "\n";
      nlohmann::json j = nlohmann::json::object();
      for (const auto& s : res.stats) j[s.split] = {{"games", s.game_count}, {"pairs", s.pair_count}};
      if (json) {
        std::cout << j.dump(2) << "\n";
      } else {
        for (const auto& s : res.stats)
          std::cout << s.split << ": " << s.game_count << " games, " << s.pair_count << " pairs\n";
      }
      return 0;
    }
    if (*index) {
      auto ix = bap::cmd_index(idx_corpus, idx_split, idx_retrieval, idx_cache, idx_out, idx_parallel);
      std::cout << "indexed " << ix.entries.size() << " turns with " << ix.provider_name << " into " << idx_out << "\n";
      return 0;
    }
    if (*run || *ablate) {
      bool is_run = run->parsed();
      bap::RunConfig& c = is_run ? rc : ab;
      c.prompt = parse_sections(is_run ? sections : ab_sections, is_run ? k : ab_k, c.prompt.template_set);
      c.corpus = is_run ? corpus : ab_corpus;
      c.index_file = is_run ? index_file : ab_index;
      c.cache_dir = is_run ? cache : ab_cache;
      c.templates_root = is_run ? templates : ab_templates;
      c.runs_dir = common.runs_dir;
      if (is_run) {
        auto outcome = bap::cmd_run(c);
        print_run(outcome, common.format);
        return outcome.manifest.count(bap::TurnStatus::failed) ? 1 : 0;
      }
      auto rows = bap::cmd_ablate(c);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : rows)
        j.push_back({{"label", r.config.label()}, {"sections", r.config.sections_flag()}, {"k", r.config.k_examples},
                     {"run_id", r.run_id}, {"metrics", bap::to_json(r.metrics)}});
      fs::path dir = fs::path(common.runs_dir) / "ablation";
      fs::create_directories(dir);
      bap::write_file_atomic(dir / "ablation.json", j.dump(2) + "\n");
      bap::write_file_atomic(dir / "ablation.txt", bap::render_ablation_table(rows));
      std::cout << (json ? j.dump(2) + "\n" : bap::render_ablation_table(rows));
      return 0;
    }
    if (*eval) {
      auto dir = run_dir_for(eval_run, common.runs_dir);
      auto r = bap::cmd_eval(dir,
                             ordered ? bap::MatchMode::ordered_prefix : bap::MatchMode::multiset);
      if (json)
        std::cout << nlohmann::json({{"overall", bap::to_json(r.overall)},
                                     {"variant_net_gold", bap::to_json(r.variant_net_gold)},
                                     {"missing", r.missing.size()}})
                         .dump(2)
                  << "\n";
      else
        std::cout << bap::read_file(dir / "reports" / "eval.txt");
      if (!r.missing.empty()) std::cerr << "warning: " << r.missing.size() << " turns have no completion\n";
      return 0;
    }
    if (*analyze) {
      auto dir = run_dir_for(an_run, common.runs_dir);
      auto a = bap::cmd_analyze(dir, lexicon_dir, annotations);
      if (json) {
        auto j = bap::to_json(a);
        for (auto& c : j["categories"]) {
          c.erase("turn_ids");
          c.erase("correct_turn_ids");
        }
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << bap::read_file(dir / "reports" / "analysis.txt");
      }
      return 0;
    }
    if (*report) {
      std::vector<fs::path> dirs;
      for (const auto& id : report_runs) dirs.push_back(run_dir_for(id, common.runs_dir));
      auto rows = bap::cmd_report(dirs);
      if (json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
          nlohmann::json row = {{"label", r.label}, {"metrics", bap::to_json(r.overall)}};
          if (r.reference_f1) row["reference_f1"] = *r.reference_f1;
          j.push_back(row);
        }
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << bap::render_table(rows);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
