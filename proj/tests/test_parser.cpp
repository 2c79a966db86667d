#include <doctest.h>

#include <fstream>
#include <sstream>

#include "aapp/parser.hpp"
#include "support.hpp"

using namespace aapp;
using testutil::thrown_code;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(AAPP_TESTS_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_SUITE("parser") {

TEST_CASE("single-rule script with every option spelled out") {
  ScriptAst ast = parse_script(slurp("example_app.yaml"));
  REQUIRE(ast.rules.size() == 1);
  const TagRule& rule = ast.rules[0];
  CHECK(rule.tag == TagId{"f_tag"});
  CHECK(rule.followup == FollowupOpt::Fail);
  REQUIRE(rule.blocks.size() == 1);
  const RawBlock& block = rule.blocks[0];
  CHECK(block.workers ==
        WorkerSelection::of({WorkerId{"w1"}, WorkerId{"w2"}}));
  CHECK(block.strategy == Strategy::BestFirst);
  REQUIRE(block.invalidate.has_value());
  CHECK(*block.invalidate ==
        std::vector<InvalidateOpt>{InvalidateOpt::capacity_used(80)});
  CHECK_FALSE(block.affinity.has_value());
}

TEST_CASE("inline affinity list and multiple blocks") {
  ScriptAst ast = parse_script(slurp("affinity_example.yaml"));
  REQUIRE(ast.rules.size() == 1);
  const TagRule& rule = ast.rules[0];
  REQUIRE(rule.blocks.size() == 2);

  const RawBlock& first = rule.blocks[0];
  REQUIRE(first.affinity.has_value());
  REQUIRE(first.affinity->size() == 2);
  CHECK((*first.affinity)[0] == AffinityOpt{TagId{"g_tag"}, false});
  CHECK((*first.affinity)[1] == AffinityOpt{TagId{"h_tag"}, true});

  const RawBlock& second = rule.blocks[1];
  CHECK(second.workers == WorkerSelection::of({WorkerId{"public_w1"}}));
  CHECK_FALSE(second.strategy.has_value());
  CHECK_FALSE(second.invalidate.has_value());
}

TEST_CASE("affinity as a sequence with quoted anti entries") {
  ScriptAst ast = parse_script(
      "- t:\n"
      "  - workers: *\n"
      "    affinity:\n"
      "      - \"!a\"\n"
      "      - b\n"
      "      - !c\n");
  const RawBlock& block = ast.rules[0].blocks[0];
  REQUIRE(block.affinity.has_value());
  CHECK((*block.affinity)[0] == AffinityOpt{TagId{"a"}, true});
  CHECK((*block.affinity)[1] == AffinityOpt{TagId{"b"}, false});
  CHECK((*block.affinity)[2] == AffinityOpt{TagId{"c"}, true});
}

TEST_CASE("star workers and omitted options stay absent") {
  ScriptAst ast = parse_script("- t:\n  - workers: *\n");
  const TagRule& rule = ast.rules[0];
  CHECK_FALSE(rule.followup.has_value());
  const RawBlock& block = rule.blocks[0];
  CHECK(block.workers.star);
  CHECK_FALSE(block.strategy.has_value());
  CHECK_FALSE(block.invalidate.has_value());
  CHECK_FALSE(block.affinity.has_value());
}

TEST_CASE("invalidate options parse both kinds") {
  ScriptAst ast = parse_script(
      "- t:\n"
      "  - workers: *\n"
      "    invalidate:\n"
      "      - capacity_used 33%\n"
      "      - max_concurrent_invocations 5\n");
  const auto& options = *ast.rules[0].blocks[0].invalidate;
  REQUIRE(options.size() == 2);
  CHECK(options[0] == InvalidateOpt::capacity_used(33));
  CHECK(options[1] == InvalidateOpt::max_concurrent(5));
}

TEST_CASE("script round trips through print_script") {
  for (const char* name : {"example_app.yaml", "affinity_example.yaml",
                           "components_candidate.yaml", "components_fixed.yaml",
                           "seeding.yaml"}) {
    CAPTURE(name);
    ScriptAst ast = parse_script(slurp(name));
    std::string printed = print_script(ast);
    CHECK(parse_script(printed) == ast);
    CHECK(print_script(parse_script(printed)) == printed);
  }
}

TEST_CASE("script rejections") {
  auto code = [](const char* text) {
    return thrown_code([text] { parse_script(text); });
  };
  CHECK(code("key: value\n") == Errc::Syntax);
  CHECK(code("- t:\n") == Errc::EmptyBlockList);
  CHECK(code("- t: scalar\n") == Errc::Syntax);
  CHECK(code("- t:\n  - workers: *\n- t:\n  - workers: *\n") == Errc::DuplicateTag);
  CHECK(code("- t:\n  - workers: *\n  followup: maybe\n") == Errc::UnknownOption);
  CHECK(code("- t:\n  - workers: *\n  extra: 1\n") == Errc::Syntax);
  CHECK(code("- t:\n  - workers: w1\n") == Errc::Syntax);
  CHECK(code("- t:\n  - strategy: any\n") == Errc::Syntax);
  CHECK(code("- t:\n  - workers: *\n    strategy: worst\n") == Errc::UnknownOption);
  CHECK(code("- t:\n  - workers: *\n    color: red\n") == Errc::UnknownOption);
  CHECK(code("- t:\n  - workers: *\n    invalidate:\n      - capacity_used 101%\n") ==
        Errc::PercentOutOfRange);
  CHECK(code("- t:\n  - workers: *\n    invalidate:\n      - sometimes\n") ==
        Errc::UnknownOption);
  CHECK(code("- t:\n  - workers: *\n    invalidate:\n"
             "      - capacity_used 10%\n      - capacity_used 20%\n") == Errc::Syntax);
  CHECK(code("- t:\n  - workers: *\n    affinity: a,,b\n") == Errc::Syntax);
  CHECK(code("- t:\n  - workers: *\n    affinity: 9bad\n") == Errc::Syntax);
  CHECK(code("- 9tag:\n  - workers: *\n") == Errc::Syntax);
}

TEST_CASE("parse errors carry the source line") {
  try {
    parse_script("- t:\n  - workers: *\n    strategy: worst\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config with workers, functions and initial allocations") {
  PlatformSpec spec = parse_config(
      "workers:\n"
      "  - name: w1\n"
      "    max_memory: 10\n"
      "  - name: w2\n"
      "    max_memory: 20\n"
      "functions:\n"
      "  - name: f\n"
      "    memory: 8\n"
      "    tag: f_tag\n"
      "initial:\n"
      "  - worker: w2\n"
      "    function: f\n"
      "    count: 2\n");
  REQUIRE(spec.workers.size() == 2);
  CHECK(spec.workers[0].name == WorkerId{"w1"});
  CHECK(spec.workers[1].max_memory == 20);
  REQUIRE(spec.functions.size() == 1);
  CHECK(spec.functions[0].memory == 8);
  CHECK(spec.functions[0].tag == TagId{"f_tag"});
  REQUIRE(spec.initial.size() == 1);
  CHECK(spec.initial[0].count == 2);

  Registry registry = spec.registry();
  CHECK(registry.occupancy(FunctionId{"f"}) == 8);

  Configuration conf = spec.configuration();
  CHECK(conf.at(WorkerId{"w1"}).used == 0);
  CHECK(conf.at(WorkerId{"w2"}).used == 16);
  CHECK(conf.at(WorkerId{"w2"}).count(FunctionId{"f"}) == 2);
}

TEST_CASE("config rejections") {
  auto code = [](const std::string& text) {
    return thrown_code([&text] { parse_config(text); });
  };
  const std::string base =
      "workers:\n  - name: w\n    max_memory: 4\n"
      "functions:\n  - name: f\n    memory: 2\n    tag: t\n";

  CHECK(code("- a\n") == Errc::Syntax);
  CHECK(code("workers:\n  - name: w\n    max_memory: 0\n") == Errc::ZeroMemory);
  CHECK(code("workers:\n  - name: w\n    max_memory: 4\n  - name: w\n    max_memory: 4\n") ==
        Errc::DuplicateName);
  CHECK(code(base + "typo: 1\n") == Errc::Syntax);
  CHECK(code("workers:\n  - name: w\n") == Errc::Syntax);
  CHECK(code(base + "initial:\n  - worker: v\n    function: f\n    count: 1\n") ==
        Errc::UnknownName);
  CHECK(code(base + "initial:\n  - worker: w\n    function: g\n    count: 1\n") ==
        Errc::UnknownName);
  CHECK(code(base + "initial:\n  - worker: w\n    function: f\n    count: 0\n") ==
        Errc::Syntax);
  CHECK(code(base + "initial:\n  - worker: w\n    function: f\n    count: 3\n") ==
        Errc::InitialOverCapacity);
  CHECK(code("workers:\n  - name: w\n    max_memory: 4\n"
             "functions:\n  - name: f\n    memory: 0\n    tag: t\n") == Errc::ZeroMemory);
}

TEST_CASE("goal strings") {
  GoalSpec goal = parse_goal("w1:f,w2:g:3");
  REQUIRE(goal.constraints.size() == 2);
  CHECK(goal.constraints[0] == GoalConstraint{WorkerId{"w1"}, FunctionId{"f"}, 1});
  CHECK(goal.constraints[1] == GoalConstraint{WorkerId{"w2"}, FunctionId{"g"}, 3});
  CHECK(goal.mode == GoalMode::AtLeast);
  CHECK(parse_goal("w:f", GoalMode::Exact).mode == GoalMode::Exact);

  auto code = [](const char* text) {
    return thrown_code([text] { parse_goal(text); });
  };
  CHECK(code("") == Errc::InvalidGoal);
  CHECK(code("w1") == Errc::InvalidGoal);
  CHECK(code("w1:f:0") == Errc::InvalidGoal);
  CHECK(code("w1:f:x") == Errc::InvalidGoal);
  CHECK(code("w1:f,w1:f:2") == Errc::InvalidGoal);
  CHECK(code("w1:f:1:9") == Errc::InvalidGoal);
  CHECK(code("w 1:f") == Errc::InvalidGoal);
}

TEST_CASE("goal files") {
  GoalSpec goal = parse_goal_file(
      "goal:\n"
      "  - worker: w1\n"
      "    function: f\n"
      "  - worker: w2\n"
      "    function: f\n"
      "    count: 4\n");
  REQUIRE(goal.constraints.size() == 2);
  CHECK(goal.constraints[0].count == 1);
  CHECK(goal.constraints[1].count == 4);

  auto code = [](const char* text) {
    return thrown_code([text] { parse_goal_file(text); });
  };
  CHECK(code("nope: 1\n") == Errc::Syntax);
  CHECK(code("goal:\n  - worker: w\n") == Errc::Syntax);
  CHECK(code("goal:\n  - worker: w\n    function: f\n    count: 0\n") == Errc::InvalidGoal);
  CHECK(code("goal:\n  - worker: w\n    function: f\n  - worker: w\n    function: f\n") ==
        Errc::InvalidGoal);
}

}  // TEST_SUITE
