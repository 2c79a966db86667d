#pragma once

#include <string>
#include <string_view>

#include "aapp/ast.hpp"

// Front end for the three text inputs: policy scripts, platform configs and
// goal specifications. All parse failures throw Error with a line number.

namespace aapp {

ScriptAst parse_script(std::string_view text);

PlatformSpec parse_config(std::string_view text);

// Canonical script rendering; parse_script(print_script(ast)) == ast.
std::string print_script(const ScriptAst& ast);

// "worker:function:count" entries, comma-joined; count defaults to 1 when the
// last component is omitted ("worker:function").
GoalSpec parse_goal(std::string_view text, GoalMode mode = GoalMode::AtLeast);

// Goal file in the config style: top-level `goal:` sequence of entries with
// `worker`, `function` and optional `count` keys.
GoalSpec parse_goal_file(std::string_view text, GoalMode mode = GoalMode::AtLeast);

}  // namespace aapp
