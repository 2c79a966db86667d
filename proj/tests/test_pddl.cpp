#include <doctest.h>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aapp/analysis.hpp"
#include "aapp/encoder.hpp"
#include "aapp/parser.hpp"
#include "aapp/pddl.hpp"
#include "support.hpp"

using namespace aapp;
using testutil::policy_of;
using testutil::sexpr_tokens;

namespace {

// A tiny interpreter for the grounded fragment the emitter produces: numeric
// fluents, and/or/not, binary comparisons and arithmetic, increase/decrease
// effects. It executes the emitted domain/problem pair directly so the
// encoding can be compared against the search semantics.

struct Sx {
  std::string atom;
  std::vector<Sx> kids;
  bool leaf = false;
};

Sx parse_sx(const std::vector<std::string>& tokens, std::size_t& pos) {
  if (tokens[pos] == "(") {
    Sx list;
    ++pos;
    while (tokens[pos] != ")") list.kids.push_back(parse_sx(tokens, pos));
    ++pos;
    return list;
  }
  Sx leaf;
  leaf.leaf = true;
  leaf.atom = tokens[pos++];
  return leaf;
}

std::vector<Sx> parse_all(const std::string& text) {
  const std::vector<std::string> tokens = sexpr_tokens(text);
  std::vector<Sx> out;
  std::size_t pos = 0;
  while (pos < tokens.size()) out.push_back(parse_sx(tokens, pos));
  return out;
}

using NumState = std::map<std::string, std::int64_t>;

std::string term_key(const Sx& s) {
  std::string key = s.kids[0].atom;
  for (std::size_t i = 1; i < s.kids.size(); ++i) key += " " + s.kids[i].atom;
  return key;
}

std::int64_t eval_num(const Sx& s, const NumState& state) {
  if (s.leaf) return std::stoll(s.atom);
  const std::string& op = s.kids[0].atom;
  if (op == "+") return eval_num(s.kids[1], state) + eval_num(s.kids[2], state);
  if (op == "-") return eval_num(s.kids[1], state) - eval_num(s.kids[2], state);
  if (op == "*") return eval_num(s.kids[1], state) * eval_num(s.kids[2], state);
  return state.at(term_key(s));
}

bool eval_bool(const Sx& s, const NumState& state) {
  const std::string& op = s.kids[0].atom;
  if (op == "and") {
    for (std::size_t i = 1; i < s.kids.size(); ++i) {
      if (!eval_bool(s.kids[i], state)) return false;
    }
    return true;
  }
  if (op == "or") {
    for (std::size_t i = 1; i < s.kids.size(); ++i) {
      if (eval_bool(s.kids[i], state)) return true;
    }
    return false;
  }
  if (op == "not") return !eval_bool(s.kids[1], state);
  const std::int64_t lhs = eval_num(s.kids[1], state);
  const std::int64_t rhs = eval_num(s.kids[2], state);
  if (op == "=") return lhs == rhs;
  if (op == "<") return lhs < rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == ">") return lhs > rhs;
  REQUIRE(op == ">=");
  return lhs >= rhs;
}

struct GroundAction {
  std::string name;
  Sx precondition;
  Sx effect;
};

struct MiniPddl {
  std::vector<GroundAction> actions;
  NumState init;
  Sx goal;
};

MiniPddl load_pddl(const std::string& domain_text, const std::string& problem_text) {
  MiniPddl mini;
  const Sx domain = parse_all(domain_text).at(0);
  for (const Sx& form : domain.kids) {
    if (form.leaf || form.kids.empty() || form.kids[0].atom != ":action") continue;
    GroundAction action;
    action.name = form.kids[1].atom;
    for (std::size_t i = 2; i + 1 < form.kids.size(); ++i) {
      if (form.kids[i].atom == ":precondition") action.precondition = form.kids[i + 1];
      if (form.kids[i].atom == ":effect") action.effect = form.kids[i + 1];
    }
    mini.actions.push_back(std::move(action));
  }
  const Sx problem = parse_all(problem_text).at(0);
  for (const Sx& form : problem.kids) {
    if (form.leaf || form.kids.empty()) continue;
    if (form.kids[0].atom == ":init") {
      for (std::size_t i = 1; i < form.kids.size(); ++i) {
        const Sx& assign = form.kids[i];
        REQUIRE(assign.kids[0].atom == "=");
        mini.init[term_key(assign.kids[1])] = std::stoll(assign.kids[2].atom);
      }
    }
    if (form.kids[0].atom == ":goal") mini.goal = form.kids[1];
  }
  return mini;
}

NumState apply_effect(const Sx& effect, const NumState& state) {
  std::vector<const Sx*> parts;
  if (!effect.kids.empty() && effect.kids[0].atom == "and") {
    for (std::size_t i = 1; i < effect.kids.size(); ++i) parts.push_back(&effect.kids[i]);
  } else {
    parts.push_back(&effect);
  }
  NumState next = state;
  for (const Sx* part : parts) {
    const std::string& op = part->kids[0].atom;
    const std::int64_t amount = eval_num(part->kids[2], state);
    std::int64_t& cell = next.at(term_key(part->kids[1]));
    REQUIRE((op == "increase" || op == "decrease"));
    cell += op == "increase" ? amount : -amount;
  }
  return next;
}

// Breadth-first minimal plan length, nullopt goal unreachable, nullopt + flag
// when the bound cuts the exploration short.
struct PlanResult {
  std::optional<std::size_t> length;
  bool exhausted = false;
};

PlanResult plan_length(const MiniPddl& mini, std::size_t max_states) {
  std::deque<std::pair<NumState, std::size_t>> frontier{{mini.init, 0}};
  std::set<NumState> seen{mini.init};
  while (!frontier.empty()) {
    auto [state, depth] = frontier.front();
    frontier.pop_front();
    if (eval_bool(mini.goal, state)) return {depth, false};
    for (const GroundAction& action : mini.actions) {
      if (!eval_bool(action.precondition, state)) continue;
      NumState next = apply_effect(action.effect, state);
      if (seen.size() >= max_states) return {std::nullopt, true};
      if (seen.insert(next).second) frontier.push_back({next, depth + 1});
    }
  }
  return {std::nullopt, false};
}

GoalSpec goal_one(const char* worker, const char* function, std::uint64_t count,
                  GoalMode mode = GoalMode::AtLeast) {
  GoalSpec goal;
  goal.constraints.push_back(
      GoalConstraint{WorkerId{worker}, FunctionId{function}, count});
  goal.mode = mode;
  return goal;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("pddl") {

TEST_CASE("emission is deterministic") {
  Registry registry;
  registry.add(FunctionId{"f"}, 2, TagId{"ft"});
  registry.add(FunctionId{"g"}, 1, TagId{"gt"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};
  conf[WorkerId{"b"}] = WorkerState{{}, 0, 8};
  EncodedPolicy policy = policy_of("- ft:\n  - workers: *\n  followup: fail\n"
                                   "- gt:\n  - workers: *\n  followup: fail\n");

  CHECK(emit_domain(policy, registry, conf) == emit_domain(policy, registry, conf));
  GoalSpec goal = goal_one("a", "f", 1);
  CHECK(emit_problem(conf, registry, goal) == emit_problem(conf, registry, goal));
}

TEST_CASE("domain grounds the policy") {
  Registry registry;
  registry.add(FunctionId{"f"}, 2, TagId{"ft"});
  registry.add(FunctionId{"g"}, 1, TagId{"gt"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};
  conf[WorkerId{"b"}] = WorkerState{{}, 0, 8};
  EncodedPolicy policy = policy_of(
      "- ft:\n"
      "  - workers:\n"
      "      - a\n"
      "    invalidate:\n"
      "      - capacity_used 80%\n"
      "      - max_concurrent_invocations 2\n"
      "    affinity: gt,!ft\n"
      "- gt:\n  - workers: *\n  followup: fail\n");
  const std::string domain = emit_domain(policy, registry, conf);

  CHECK(contains(domain, "(define (domain aapp)"));
  CHECK(contains(domain, ":requirements :typing :fluents :disjunctive-preconditions"
                         " :negative-preconditions"));
  CHECK(contains(domain, " a b - worker"));
  CHECK(contains(domain, " f g - function"));
  CHECK(contains(domain, " ft gt - tag"));
  CHECK(contains(domain, "(number_of_f_in_W ?f - function ?w - worker)"));

  CHECK(contains(domain, "(:action start_f_b0_a"));
  CHECK(contains(domain, "(:action done_f_a"));
  CHECK(contains(domain, "(:action done_f_b"));
  // Block one only lists worker a; no grounded start on b for it.
  CHECK_FALSE(contains(domain, "(:action start_f_b0_b"));
  // The synthesized fallback block still grounds on both workers.
  CHECK(contains(domain, "(:action start_f_b1_a"));
  CHECK(contains(domain, "(:action start_f_b1_b"));

  CHECK(contains(domain, "(<= (+ (used a) (occ f)) (max_cap a))"));
  CHECK(contains(domain, "(< (* (used a) 100) (* 80 (max_cap a)))"));
  CHECK(contains(domain, "(< (+ (number_of_f_in_W f a) (number_of_f_in_W g a)) 2)"));
  CHECK(contains(domain, "(> (tag_count gt a) 0)"));
  CHECK(contains(domain, "(= (tag_count ft a) 0)"));

  CHECK(contains(domain, "(increase (number_of_f_in_W f a) 1)"));
  CHECK(contains(domain, "(increase (used a) (occ f))"));
  CHECK(contains(domain, "(increase (tag_count ft a) 1)"));
  CHECK(contains(domain, "(decrease (number_of_f_in_W f a) 1)"));
}

TEST_CASE("problem starts from the empty platform") {
  Registry registry;
  registry.add(FunctionId{"f"}, 1, TagId{"ft"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};
  conf = apply_start(conf, FunctionId{"f"}, WorkerId{"a"}, registry);

  const std::string problem = emit_problem(conf, registry, goal_one("a", "f", 1));
  CHECK(contains(problem, "(define (problem aapp-query)"));
  CHECK(contains(problem, "(:domain aapp)"));
  // Initial allocations are not carried over.
  CHECK(contains(problem, "(= (number_of_f_in_W f a) 0)"));
  CHECK(contains(problem, "(= (used a) 0)"));
  CHECK(contains(problem, "(= (max_cap a) 4)"));
  CHECK(contains(problem, "(= (occ f) 1)"));
  CHECK(contains(problem, "(= (tag_count ft a) 0)"));
}

TEST_CASE("goal forms") {
  Registry registry;
  registry.add(FunctionId{"f"}, 1, TagId{"ft"});
  registry.add(FunctionId{"g"}, 1, TagId{"gt"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};

  const std::string bare = emit_problem(conf, registry, goal_one("a", "f", 2));
  CHECK(contains(bare, "(= (number_of_f_in_W f a) 2)"));
  CHECK_FALSE(contains(bare, "(and"));

  GoalSpec both = goal_one("a", "f", 1);
  both.constraints.push_back(GoalConstraint{WorkerId{"a"}, FunctionId{"g"}, 1});
  const std::string conjoined = emit_problem(conf, registry, both);
  CHECK(contains(conjoined,
                 "(and (= (number_of_f_in_W f a) 1) (= (number_of_f_in_W g a) 1))"));

  const std::string at_least = emit_problem(conf, registry, goal_one("a", "f", 2), true);
  CHECK(contains(at_least, "(>= (number_of_f_in_W f a) 2)"));

  const std::string raw = emit_problem_raw(conf, registry, "(= (used a) 3)");
  CHECK(contains(raw, "(:goal\n    (= (used a) 3)\n  )"));

  CHECK(testutil::thrown_code([&] {
          emit_problem(conf, registry, goal_one("ghost", "f", 1));
        }) == Errc::UnknownName);
  CHECK(testutil::thrown_code([&] {
          emit_problem(conf, registry, goal_one("a", "ghost", 1));
        }) == Errc::UnknownName);
}

TEST_CASE("a policy that does not fit the platform is rejected") {
  Registry registry;
  registry.add(FunctionId{"f"}, 1, TagId{"ft"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};
  EncodedPolicy policy = policy_of(
      "- ft:\n  - workers:\n      - ghost\n  followup: fail\n");
  CHECK(testutil::thrown_code([&] { emit_domain(policy, registry, conf); }) ==
        Errc::ValidationFailed);
}

TEST_CASE("the grounded domain reproduces the search semantics") {
  Registry registry;
  registry.add(FunctionId{"f"}, 2, TagId{"ft"});
  registry.add(FunctionId{"g"}, 1, TagId{"gt"});
  Configuration conf;
  conf[WorkerId{"a"}] = WorkerState{{}, 0, 4};
  conf[WorkerId{"b"}] = WorkerState{{}, 0, 4};

  SUBCASE("best_first forces the detour") {
    EncodedPolicy policy = policy_of(
        "- ft:\n"
        "  - workers:\n"
        "      - a\n"
        "      - b\n"
        "    strategy: best_first\n"
        "  followup: fail\n"
        "- gt:\n  - workers: *\n  followup: fail\n");
    GoalSpec goal;
    goal.constraints.push_back(GoalConstraint{WorkerId{"a"}, FunctionId{"f"}, 0});
    goal.constraints.push_back(GoalConstraint{WorkerId{"b"}, FunctionId{"f"}, 1});
    goal.mode = GoalMode::Exact;

    MiniPddl mini = load_pddl(emit_domain(policy, registry, conf),
                              emit_problem(conf, registry, goal));
    PlanResult plan = plan_length(mini, 5000);
    REQUIRE(plan.length.has_value());

    Decision decision = goal_search(policy, registry, conf, goal);
    REQUIRE(decision.verdict == Verdict::Holds);
    CHECK(*plan.length == decision.witness.size());
    CHECK(*plan.length == 4);
  }

  SUBCASE("affine start waits for the tag") {
    EncodedPolicy policy = policy_of(
        "- ft:\n"
        "  - workers: *\n"
        "    affinity:\n"
        "      - gt\n"
        "  followup: fail\n"
        "- gt:\n  - workers: *\n  followup: fail\n");
    GoalSpec goal = goal_one("a", "f", 1, GoalMode::Exact);

    MiniPddl mini = load_pddl(emit_domain(policy, registry, conf),
                              emit_problem(conf, registry, goal));
    PlanResult plan = plan_length(mini, 5000);
    REQUIRE(plan.length.has_value());

    Decision decision = goal_search(policy, registry, conf, goal);
    REQUIRE(decision.verdict == Verdict::Holds);
    CHECK(*plan.length == decision.witness.size());
    CHECK(*plan.length == 2);
  }

  SUBCASE("an affine tag nothing carries blocks the start everywhere") {
    EncodedPolicy policy = policy_of(
        "- ft:\n"
        "  - workers: *\n"
        "    affinity:\n"
        "      - nobody\n"
        "  followup: fail\n"
        "- gt:\n  - workers: *\n  followup: fail\n");
    const std::string domain = emit_domain(policy, registry, conf);
    CHECK(contains(domain, "(= 0 1)"));

    GoalSpec goal = goal_one("a", "f", 1);
    MiniPddl mini = load_pddl(domain, emit_problem(conf, registry, goal, true));
    PlanResult plan = plan_length(mini, 5000);
    CHECK_FALSE(plan.length.has_value());
    CHECK_FALSE(plan.exhausted);

    Decision decision = goal_search(policy, registry, conf, goal);
    CHECK(decision.verdict == Verdict::DoesNotHold);
  }
}

TEST_CASE("random policies plan exactly like the search") {
  std::mt19937_64 rng(828282);
  int compared = 0;
  while (compared < 12) {
    testutil::Fragment fragment = static_cast<testutil::Fragment>(compared % 4);
    testutil::RandomInstance inst = testutil::random_instance(rng, fragment);
    auto [w, f] = testutil::pick_absent_query(rng, inst);
    // The emitted problem starts from the empty platform, so the reference
    // search must too.
    Configuration empty = cleared(inst.conf);
    GoalSpec goal;
    goal.constraints.push_back(GoalConstraint{w, f, 1});

    MiniPddl mini = load_pddl(emit_domain(inst.policy, inst.registry, empty),
                              emit_problem(empty, inst.registry, goal, true));
    PlanResult plan = plan_length(mini, 4000);
    if (plan.exhausted) continue;

    SearchOptions options;
    options.max_states = 20000;
    Decision decision = goal_search(inst.policy, inst.registry, empty, goal, options);
    if (decision.verdict == Verdict::BoundExhausted) continue;

    if (decision.verdict == Verdict::Holds) {
      REQUIRE(plan.length.has_value());
      CHECK(*plan.length == decision.witness.size());
    } else {
      CHECK_FALSE(plan.length.has_value());
    }
    ++compared;
  }
}

}  // TEST_SUITE
