#pragma once

// Multi-part prompt assembly.
//
// A template set is a directory with a `manifest.txt` listing one section per
// line as "<section-id> <file>", in render order. Section files are UTF-8 text
// and may contain the placeholders $INCONTEXT_SAMPLES and $TEST_INSTRUCTION.
// Known section ids: system, environment, task, context, other, closing.
// system/environment/task/other follow the PromptConfig toggles; any other
// section is always rendered.

#include <bap/corpus.hpp>
#include <bap/dsl.hpp>
#include <bap/util.hpp>
#include <bap/world.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace bap {

struct PromptConfig {
  bool include_system = true;
  bool include_env = true;
  bool include_task = true;
  bool include_other = true;
  int k_examples = 3;
  std::string template_set = "default";
  // Render example outputs with builder mistakes removed (net actions).
  bool net_clean_examples = false;

  friend bool operator==(const PromptConfig&, const PromptConfig&) = default;

  // Row label in the style of the ablation table.
  std::string label() const {
    static const char* counts[] = {"Zero", "One", "Two", "Three", "Four", "Five"};
    std::vector<std::string> parts;
    if (include_system) parts.push_back("System Info");
    if (include_env) parts.push_back("Env Info");
    if (include_task) parts.push_back("Task Info");
    std::string ctx = "Context Info (";
    ctx += (k_examples >= 0 && k_examples <= 5) ? counts[k_examples] : std::to_string(k_examples).c_str();
    ctx += k_examples == 1 ? " Sample)" : " Samples)";
    parts.push_back(ctx);
    if (include_other) parts.push_back("Other Info");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " + " : "") + parts[i];
    return out;
  }

  // Compact section spec used on the command line: letters s,e,t,o.
  std::string sections_flag() const {
    std::string s;
    if (include_system) s += 's';
    if (include_env) s += 'e';
    if (include_task) s += 't';
    if (include_other) s += 'o';
    return s;
  }
};

inline nlohmann::json to_json(const PromptConfig& c) {
  return {{"include_system", c.include_system}, {"include_env", c.include_env},
          {"include_task", c.include_task},     {"include_other", c.include_other},
          {"k_examples", c.k_examples},         {"template_set", c.template_set},
          {"net_clean_examples", c.net_clean_examples}};
}

inline PromptConfig prompt_config_from_json(const nlohmann::json& j) {
  PromptConfig c;
  c.include_system = j.value("include_system", true);
  c.include_env = j.value("include_env", true);
  c.include_task = j.value("include_task", true);
  c.include_other = j.value("include_other", true);
  c.k_examples = j.value("k_examples", 3);
  c.template_set = j.value("template_set", std::string("default"));
  c.net_clean_examples = j.value("net_clean_examples", false);
  return c;
}

struct SectionSpan {
  std::string id;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ExampleRef {
  std::string game_id;
  std::size_t turn_index = 0;
  friend bool operator==(const ExampleRef&, const ExampleRef&) = default;
};

struct PromptText {
  std::string text;
  std::vector<SectionSpan> sections;  // contiguous, cover text exactly
  std::vector<ExampleRef> example_provenance;

  const SectionSpan* section(std::string_view id) const {
    for (const auto& s : sections)
      if (s.id == id) return &s;
    return nullptr;
  }
  std::string_view section_text(std::string_view id) const {
    auto* s = section(id);
    return s ? std::string_view(text).substr(s->begin, s->end - s->begin) : std::string_view{};
  }
};

struct TemplateSection {
  std::string id;
  std::string text;
};

struct TemplateSet {
  std::string name;
  std::vector<TemplateSection> sections;

  static TemplateSet load(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    auto manifest = dir / "manifest.txt";
    if (!fs::exists(manifest)) throw ConfigError("missing template manifest " + manifest.string());
    TemplateSet t;
    t.name = dir.filename().string();
    std::istringstream in(read_file(manifest));
    std::string line;
    while (std::getline(in, line)) {
      auto l = trim(line);
      if (l.empty() || l.front() == '#') continue;
      std::istringstream ls{std::string(l)};
      std::string id, file;
      ls >> id >> file;
      if (file.empty()) throw ConfigError("bad manifest line: " + std::string(l));
      auto p = dir / file;
      if (!fs::exists(p)) throw ConfigError("missing template file " + p.string());
      t.sections.push_back({id, read_file(p)});
    }
    return t;
  }

  // Resolves `name` under `root`; "builtin" needs no files.
  static TemplateSet resolve(const std::filesystem::path& root, const std::string& name) {
    if (name == "builtin") return builtin();
    return load(root / name);
  }

  // The default prompt, identical to templates/default/.
  static TemplateSet builtin() {
    return {"builtin",
            {
                {"system",
                 "System Info\n\n"
                 "You are an expert at interpreting natural language instructions and translating them into "
                 "specific actions for placing colored blocks within a 3D grid.\n\n"},
                {"environment",
                 "Environment Info\n\n"
                 "The environment is structured as an 11x9x11 grid, with each cell representing a single block. "
                 "The grid is organized such that columns align along the X-axis and rows along the Z-axis, "
                 "employing Python indexing for cell identification. The X and Z axes range from -5 to 5, "
                 "encompassing length and width, while the Y-axis ascends from 1 to 9, indicating height. This "
                 "grid, following an XZY orientation, places X and Z as horizontal dimensions and Y as the "
                 "vertical dimension. The ground level is defined at Y=1, with higher Y-values signifying "
                 "increased elevation, thereby representing the vertical aspect of the environment. There are 20 "
                 "blocks for each of the following colors: blue, orange, red, green, yellow, and purple.\n\n"
                 "Please import the following functions for object interactions:\n"
                 "pick(color,x,y,z): This function picks the object at the specified location.\n"
                 "place(color,x,y,z): This function places the object at the specified location.\n\n"
                 "You should only use these specified functions and not create any hypothetical functions.\n\n"
                 "Please use the pick function only to select the pieces that you have previously placed on the "
                 "board. You can safely assume that the available blocks are automatically selected, and "
                 "therefore, you can directly use the \"place()\" function without needing to call the "
                 "\"pick()\" function first.\n\n"},
                {"task",
                 "Task Info\n\n"
                 "Your task is to interpret natural language instructions and generate the corresponding code "
                 "representation. For each instruction labeled \"Instruction\" please respond with code under "
                 "the label \"Output\" followed by a newline.\n\n"},
                {"context", "Context Info\n\n$INCONTEXT_SAMPLES"},
                {"other",
                 "Other Info\n\n"
                 "Do not generate any other text/explanations. Use python code to express the solution. Please "
                 "keep the solutions simple and clear. Do not use loops, comments in the solution. Do not "
                 "generate the instructions on your own. Stick to the given format. Think step by step.\n\n"},
                {"closing", "Let's get started.\n\n$TEST_INSTRUCTION"},
            }};
  }
};

// One in-context example: Instruction / Output blocks followed by a blank line.
inline std::string render_example(const TurnPair& p, bool net_clean) {
  const auto& actions = net_clean ? net_actions(p.gold_actions) : p.gold_actions;
  std::string s = "Instruction\n\n" + p.instruction + "\n\nOutput\n\n";
  for (const auto& a : actions) s += serialize_action(a) + "\n";
  s += "\n";
  return s;
}

namespace detail {

inline bool section_enabled(const PromptConfig& c, std::string_view id) {
  if (id == "system") return c.include_system;
  if (id == "environment") return c.include_env;
  if (id == "task") return c.include_task;
  if (id == "other") return c.include_other;
  return true;
}

// Single pass: placeholder text inside substituted values is left alone.
inline std::string substitute(std::string_view tmpl, std::string_view samples, std::string_view instruction) {
  static constexpr std::string_view kSamples = "$INCONTEXT_SAMPLES";
  static constexpr std::string_view kInstruction = "$TEST_INSTRUCTION";
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i, kSamples.size()) == kSamples) {
      out += samples;
      i += kSamples.size();
    } else if (tmpl.substr(i, kInstruction.size()) == kInstruction) {
      out += instruction;
      i += kInstruction.size();
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

}  // namespace detail

// Examples are rendered in the given (retrieval rank) order; at most
// config.k_examples of them are used.
inline PromptText render_prompt(const PromptConfig& config, const TemplateSet& templates,
                                const std::vector<const TurnPair*>& examples, std::string_view test_instruction) {
  PromptText p;
  std::string samples;
  std::size_t used = std::min<std::size_t>(examples.size(), static_cast<std::size_t>(std::max(0, config.k_examples)));
  for (std::size_t i = 0; i < used; ++i) {
    samples += render_example(*examples[i], config.net_clean_examples);
    p.example_provenance.push_back({examples[i]->game_id, examples[i]->turn_index});
  }
  for (const auto& sec : templates.sections) {
    if (!detail::section_enabled(config, sec.id)) continue;
    std::size_t begin = p.text.size();
    p.text += detail::substitute(sec.text, samples, test_instruction);
    p.sections.push_back({sec.id, begin, p.text.size()});
  }
  return p;
}

inline PromptText render_prompt(const PromptConfig& config, const TemplateSet& templates,
                                const std::vector<TurnPair>& examples, std::string_view test_instruction) {
  std::vector<const TurnPair*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  return render_prompt(config, templates, ptrs, test_instruction);
}

// The ten prompt variants of the ablation study, in table order.
inline std::vector<PromptConfig> ablation_configs() {
  std::vector<PromptConfig> rows;
  for (int k = 0; k <= 5; ++k) {
    PromptConfig c;
    c.k_examples = k;
    rows.push_back(c);
  }
  PromptConfig no_system;
  no_system.include_system = false;
  rows.push_back(no_system);
  PromptConfig no_env;
  no_env.include_env = false;
  rows.push_back(no_env);
  PromptConfig no_task;
  no_task.include_task = false;
  rows.push_back(no_task);
  PromptConfig no_task_other = no_task;
  no_task_other.include_other = false;
  rows.push_back(no_task_other);
  return rows;
}

}  // namespace bap
