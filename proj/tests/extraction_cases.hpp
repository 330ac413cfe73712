#pragma once

// Adversarial model responses and the calls each one embeds.

#include <bap/action.hpp>

#include <string>
#include <vector>

namespace bap::test {

struct ExtractionCase {
  std::string name;
  std::string response;
  std::vector<Action> expected;
  bool truncated = false;
  std::size_t malformed = 0;
};

inline std::vector<ExtractionCase> extraction_cases() {
  using enum Color;
  return {
      {"bare_lines", "place(color='red',x=0,y=1,z=1)\nplace(color='red',x=0,y=2,z=1)",
       {place(red, 0, 1, 1), place(red, 0, 2, 1)}},
      {"output_label_preamble", "Output:\nplace(color='red',x=0,y=1,z=1)\nplace(color='red',x=0,y=2,z=1)",
       {place(red, 0, 1, 1), place(red, 0, 2, 1)}},
      {"truncation", "place(color='red',x=0,y=1,z=1)\nInstruction\nplace(color='blue',x=1,y=1,z=1)",
       {place(red, 0, 1, 1)}, true},
      {"truncation_markdown_header",
       "pick(color='green',x=2,y=1,z=0)\n\n### Instruction\nput a red one there\n\n### Output\nplace(color='red',x=2,y=1,z=0)",
       {pick(green, 2, 1, 0)}, true},
      {"fenced_python", "Here is the code:\n```python\nplace(color='blue',x=-1,y=1,z=3)\n```\nDone.",
       {place(blue, -1, 1, 3)}},
      {"fence_same_line", "```place(color='blue',x=0,y=1,z=0)```", {place(blue, 0, 1, 0)}},
      {"spaced_arguments", "place( color = 'green' , x = 0 , y = 1 , z = 4 )", {place(green, 0, 1, 4)}},
      {"permuted_keywords", "place(x=0, z=4, y=1, color=\"green\")", {place(green, 0, 1, 4)}},
      {"positional", "pick('purple', 3, 2, -1)", {pick(purple, 3, 2, -1)}},
      {"backtick_quote", "pick(color=`red', x=0, y=2, z=0)", {pick(red, 0, 2, 0)}},
      {"typographic_quotes", "place(color=‘orange’, x=1, y=1, z=1)\nplace(color=“yellow”, x=2, y=1, z=1)",
       {place(orange, 1, 1, 1), place(yellow, 2, 1, 1)}},
      {"semicolons_one_line", "place(color='red',x=0,y=1,z=0); place(color='red',x=1,y=1,z=0);",
       {place(red, 0, 1, 0), place(red, 1, 1, 0)}},
      {"bulleted_list", "- place(color='red',x=0,y=1,z=0)\n* place(color='red',x=0,y=2,z=0)\n1. pick(color='red',x=0,y=2,z=0)",
       {place(red, 0, 1, 0), place(red, 0, 2, 0), pick(red, 0, 2, 0)}},
      {"prose_between_calls",
       "First the base.\nplace(color='blue',x=0,y=1,z=0)\nThen stack on it:\nplace(color='blue',x=0,y=2,z=0)\nThat's it!",
       {place(blue, 0, 1, 0), place(blue, 0, 2, 0)}},
      {"commented_out_call", "# place(color='red',x=5,y=1,z=5)\nplace(color='red',x=4,y=1,z=5)", {place(red, 4, 1, 5)}},
      {"trailing_comment", "place(color='red',x=4,y=1,z=5)  # corner block", {place(red, 4, 1, 5)}},
      {"unknown_color", "place(color='pink',x=0,y=1,z=0)\nplace(color='red',x=1,y=1,z=0)", {place(red, 1, 1, 0)}, false, 1},
      {"missing_argument", "place(color='red',x=0,y=1)\npick(color='red',x=0,y=1,z=0)", {pick(red, 0, 1, 0)}, false, 1},
      {"unknown_function", "move(color='red',x=0,y=1,z=0)\nplace(color='red',x=0,y=1,z=0)", {place(red, 0, 1, 0)}, false, 1},
      {"bad_coordinate", "place(color='red',x=zero,y=1,z=0)", {}, false, 1},
      {"crlf_line_endings", "place(color='red',x=0,y=1,z=0)\r\nplace(color='red',x=0,y=2,z=0)\r\n",
       {place(red, 0, 1, 0), place(red, 0, 2, 0)}},
      {"uppercase_color", "place(color='RED',x=0,y=1,z=0)", {place(red, 0, 1, 0)}},
      {"mission_started_truncation",
       "place(color='red',x=0,y=1,z=0)\nMission has started.\nplace(color='red',x=9,y=1,z=9)", {place(red, 0, 1, 0)}, true},
      {"only_prose", "I'm not sure what you want me to build. Could you clarify?", {}},
      {"empty", "", {}},
      {"instruction_echo_before_output",
       "Instruction\nbuild a tower\nOutput\nplace(color='green',x=0,y=1,z=0)\nplace(color='green',x=0,y=2,z=0)",
       {place(green, 0, 1, 0), place(green, 0, 2, 0)}},
      {"negative_and_plus_coordinates", "pick(color='yellow',x=-5,y=+9,z=-5)", {pick(yellow, -5, 9, -5)}},
      {"colour_spelling", "place(colour='purple',x=1,y=1,z=1)", {place(purple, 1, 1, 1)}},
  };
}

}  // namespace bap::test
