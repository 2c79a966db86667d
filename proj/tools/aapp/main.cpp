#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aapp/analysis.hpp"
#include "aapp/encoder.hpp"
#include "aapp/parser.hpp"
#include "aapp/pddl.hpp"
#include "aapp/semantics.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitHolds = 0;
constexpr int kExitDoesNotHold = 1;
constexpr int kExitBoundExhausted = 2;
constexpr int kExitInputError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw aapp::Error(aapp::Errc::IoError, "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) {
    throw aapp::Error(aapp::Errc::IoError, "cannot write '" + path + "'");
  }
}

std::string invalidate_text(const aapp::InvalidateOpt& option) {
  if (option.kind == aapp::InvalidateOpt::Kind::CapacityUsed) {
    return "capacity_used " + std::to_string(option.value) + "%";
  }
  return "max_concurrent_invocations " + std::to_string(option.value);
}

ordered_json workers_to_json(const aapp::WorkerSelection& workers) {
  if (workers.star) return "*";
  ordered_json list = ordered_json::array();
  for (const auto& worker : workers.list) list.push_back(worker.str());
  return list;
}

ordered_json ast_to_json(const aapp::ScriptAst& ast) {
  ordered_json rules = ordered_json::array();
  for (const aapp::TagRule& rule : ast.rules) {
    ordered_json blocks = ordered_json::array();
    for (const aapp::RawBlock& block : rule.blocks) {
      ordered_json item;
      item["workers"] = workers_to_json(block.workers);
      if (block.strategy) {
        item["strategy"] = *block.strategy == aapp::Strategy::Any ? "any" : "best_first";
      }
      if (block.invalidate) {
        ordered_json options = ordered_json::array();
        for (const auto& option : *block.invalidate) options.push_back(invalidate_text(option));
        item["invalidate"] = std::move(options);
      }
      if (block.affinity) {
        ordered_json options = ordered_json::array();
        for (const auto& option : *block.affinity) {
          options.push_back((option.anti ? "!" : "") + option.tag.str());
        }
        item["affinity"] = std::move(options);
      }
      blocks.push_back(std::move(item));
    }
    ordered_json entry;
    entry["tag"] = rule.tag.str();
    entry["blocks"] = std::move(blocks);
    if (rule.followup) {
      entry["followup"] = *rule.followup == aapp::FollowupOpt::Default ? "default" : "fail";
    }
    rules.push_back(std::move(entry));
  }
  ordered_json out;
  out["rules"] = std::move(rules);
  return out;
}

ordered_json policy_to_json(const aapp::EncodedPolicy& policy) {
  ordered_json entries = ordered_json::array();
  for (const aapp::EncodedPolicy::Entry& entry : policy.entries()) {
    ordered_json blocks = ordered_json::array();
    for (const aapp::Block& block : entry.blocks) {
      ordered_json item;
      item["workers"] = workers_to_json(block.workers);
      item["strategy"] = block.strategy == aapp::Strategy::Any ? "any" : "best_first";
      ordered_json options = ordered_json::array();
      for (const auto& option : block.invalidate) options.push_back(invalidate_text(option));
      item["invalidate"] = std::move(options);
      ordered_json affine = ordered_json::array();
      for (const auto& tag : block.affine) affine.push_back(tag.str());
      item["affine"] = std::move(affine);
      ordered_json anti = ordered_json::array();
      for (const auto& tag : block.anti_affine) anti.push_back(tag.str());
      item["anti_affine"] = std::move(anti);
      blocks.push_back(std::move(item));
    }
    ordered_json record;
    record["tag"] = entry.tag.str();
    record["blocks"] = std::move(blocks);
    entries.push_back(std::move(record));
  }
  ordered_json out;
  out["policy"] = std::move(entries);
  return out;
}

ordered_json configuration_to_json(const aapp::Configuration& conf) {
  ordered_json workers = ordered_json::object();
  for (const auto& [worker, state] : conf) {
    ordered_json allocated = ordered_json::object();
    for (const auto& [function, count] : state.allocated) {
      allocated[function.str()] = count;
    }
    ordered_json record;
    record["used"] = state.used;
    record["max"] = state.max;
    record["allocated"] = std::move(allocated);
    workers[worker.str()] = std::move(record);
  }
  ordered_json out;
  out["workers"] = std::move(workers);
  return out;
}

std::string configuration_to_text(const aapp::Configuration& conf) {
  std::ostringstream os;
  for (const auto& [worker, state] : conf) {
    os << worker << ": used " << state.used << "/" << state.max << " {";
    bool first = true;
    for (const auto& [function, count] : state.allocated) {
      if (!first) os << ", ";
      os << function << ": " << count;
      first = false;
    }
    os << "}\n";
  }
  return os.str();
}

ordered_json decision_to_json(const std::string& query, const aapp::Decision& decision) {
  ordered_json out;
  out["query"] = query;
  out["verdict"] = std::string(to_string(decision.verdict));
  out["polarity"] = std::string(to_string(decision.polarity));
  out["backend"] = std::string(to_string(decision.backend));
  out["witness"] = ordered_json::parse(aapp::trace_to_json(decision.witness));
  ordered_json stats;
  stats["states_visited"] = decision.stats.states_visited;
  stats["frontier_peak"] = decision.stats.frontier_peak;
  if (decision.stats.witness_length) {
    stats["witness_length"] = *decision.stats.witness_length;
  } else {
    stats["witness_length"] = nullptr;
  }
  out["stats"] = std::move(stats);
  if (!decision.note.empty()) out["note"] = decision.note;
  return out;
}

void print_decision(const std::string& query, const aapp::Decision& decision,
                    const std::string& format) {
  if (format == "json") {
    std::cout << decision_to_json(query, decision).dump(2) << "\n";
    return;
  }
  std::cout << "verdict: " << to_string(decision.verdict) << "\n";
  std::cout << "polarity: " << to_string(decision.polarity) << "\n";
  std::cout << "backend: " << to_string(decision.backend) << "\n";
  if (!decision.witness.empty()) {
    std::cout << "witness:\n";
    for (const aapp::Label& label : decision.witness) {
      std::cout << "  " << aapp::to_text(label) << "\n";
    }
  }
  std::cout << "stats: " << decision.stats.states_visited << " states visited, frontier peak "
            << decision.stats.frontier_peak << "\n";
  if (!decision.note.empty()) std::cout << "note: " << decision.note << "\n";
}

int decision_exit_code(const aapp::Decision& decision) {
  switch (decision.verdict) {
    case aapp::Verdict::Holds: return kExitHolds;
    case aapp::Verdict::DoesNotHold: return kExitDoesNotHold;
    case aapp::Verdict::BoundExhausted: return kExitBoundExhausted;
  }
  return kExitInputError;
}

// Everything a platform-aware subcommand needs, with validation findings
// already triaged: warnings go to stderr, errors are fatal.
struct Instance {
  aapp::ScriptAst ast;
  aapp::EncodedPolicy policy;
  aapp::PlatformSpec platform;
  aapp::Registry registry;
  aapp::Configuration configuration;
};

Instance load_instance(const std::string& script_path, const std::string& config_path) {
  Instance instance;
  instance.ast = aapp::parse_script(read_file(script_path));
  std::vector<aapp::Diagnostic> findings;
  instance.policy = aapp::encode(instance.ast, &findings);
  instance.platform = aapp::parse_config(read_file(config_path));
  instance.registry = instance.platform.registry();
  instance.configuration = instance.platform.configuration();
  auto checked = aapp::validate(instance.policy, instance.registry, instance.configuration);
  findings.insert(findings.end(), checked.begin(), checked.end());
  for (const aapp::Diagnostic& finding : findings) {
    std::cerr << to_string(finding) << "\n";
  }
  if (aapp::has_errors(findings)) {
    throw aapp::Error(aapp::Errc::ValidationFailed,
                      "the policy does not fit the platform (see diagnostics above)");
  }
  return instance;
}

std::optional<std::uint64_t> env_max_states() {
  const char* text = std::getenv("AAPP_MAX_STATES");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (end == nullptr || *end != '\0') {
    std::cerr << "warning: ignoring unparsable AAPP_MAX_STATES='" << text << "'\n";
    return std::nullopt;
  }
  return value;
}

aapp::SearchOptions make_search_options(std::optional<std::uint64_t> max_states,
                                        unsigned threads, bool deterministic) {
  aapp::SearchOptions options;
  options.max_states = max_states ? max_states : env_max_states();
  options.threads = threads;
  options.deterministic = deterministic;
  return options;
}

// "f:w" and "f:g:w" forms used by emit-pddl.
std::vector<std::string> split_colons(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    std::size_t colon = text.find(':', begin);
    parts.push_back(text.substr(begin, colon - begin));
    if (colon == std::string::npos) break;
    begin = colon + 1;
  }
  return parts;
}

aapp::Identifier parse_cli_id(const std::string& text, const char* what) {
  if (!aapp::Identifier::is_valid(text)) {
    throw aapp::Error(aapp::Errc::InvalidIdentifier,
                      std::string("invalid ") + what + " '" + text + "'");
  }
  return aapp::Identifier{text};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parse, execute and verify aAPP scheduling policies"};
  app.require_subcommand(1);

  std::string script_path;
  std::string config_path;
  std::string format = "text";
  std::string function_name;
  std::string worker_name;
  std::string functions_pair;
  std::string goal_text;
  std::string trace_path;
  std::string out_prefix;
  std::string reach_spec;
  std::string cooccur_spec;
  std::string goal_file;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> max_states;
  unsigned threads = 1;
  bool deterministic = false;
  bool lenient = false;
  bool goal_at_least = false;

  auto add_format = [&format](CLI::App* cmd) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
  };
  auto add_platform = [&](CLI::App* cmd) {
    cmd->add_option("--script", script_path, "aAPP script file")->required();
    cmd->add_option("--config", config_path, "platform config file")->required();
  };
  auto add_search = [&](CLI::App* cmd) {
    cmd->add_option("--max-states", max_states,
                    "state bound (default: AAPP_MAX_STATES or unlimited)");
    cmd->add_option("--threads", threads, "worker threads for the search");
    cmd->add_flag("--deterministic", deterministic, "single-threaded expansion order");
  };

  CLI::App* cmd_parse = app.add_subcommand("parse", "parse a script and dump the tree");
  cmd_parse->add_option("script", script_path, "aAPP script file")->required();
  add_format(cmd_parse);

  CLI::App* cmd_encode = app.add_subcommand("encode", "parse and encode a script");
  cmd_encode->add_option("script", script_path, "aAPP script file")->required();
  add_format(cmd_encode);

  CLI::App* cmd_classify = app.add_subcommand("classify", "print the policy's polarity");
  cmd_classify->add_option("script", script_path, "aAPP script file")->required();

  CLI::App* cmd_schedule = app.add_subcommand("schedule", "pick a worker for one invocation");
  add_platform(cmd_schedule);
  cmd_schedule->add_option("--function", function_name, "function to place")->required();
  cmd_schedule->add_option("--seed", seed, "seed for the any-strategy choice")
      ->capture_default_str();
  add_format(cmd_schedule);

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "replay a trace");
  add_platform(cmd_simulate);
  cmd_simulate->add_option("--trace", trace_path, "trace file (JSON)")->required();
  cmd_simulate->add_flag("--lenient", lenient,
                         "skip the candidate check on start labels");
  add_format(cmd_simulate);

  CLI::App* cmd_reach = app.add_subcommand("reach", "can the function land on the worker?");
  add_platform(cmd_reach);
  cmd_reach->add_option("--function", function_name, "queried function")->required();
  cmd_reach->add_option("--worker", worker_name, "target worker")->required();
  add_search(cmd_reach);
  add_format(cmd_reach);

  CLI::App* cmd_cooccur =
      app.add_subcommand("cooccur", "can the two functions share the worker?");
  add_platform(cmd_cooccur);
  cmd_cooccur->add_option("--functions", functions_pair, "queried functions, F,G")->required();
  cmd_cooccur->add_option("--worker", worker_name, "target worker")->required();
  add_search(cmd_cooccur);
  add_format(cmd_cooccur);

  CLI::App* cmd_check = app.add_subcommand("check", "search for a goal allocation");
  add_platform(cmd_check);
  cmd_check->add_option("--goal", goal_text, "goal, 'worker:function[:count]' comma-joined")
      ->required();
  add_search(cmd_check);
  add_format(cmd_check);

  CLI::App* cmd_emit = app.add_subcommand("emit-pddl", "write PDDL domain/problem files");
  add_platform(cmd_emit);
  CLI::Option* opt_reach = cmd_emit->add_option("--reach", reach_spec, "goal 'F:W'");
  CLI::Option* opt_cooccur = cmd_emit->add_option("--cooccur", cooccur_spec, "goal 'F:G:W'");
  CLI::Option* opt_goal_file =
      cmd_emit->add_option("--goal-file", goal_file, "goal file (YAML style)");
  opt_reach->excludes(opt_cooccur)->excludes(opt_goal_file);
  opt_cooccur->excludes(opt_goal_file);
  cmd_emit->add_option("--out-prefix", out_prefix, "output path prefix")->required();
  cmd_emit->add_flag("--goal-at-least", goal_at_least, "emit >= goals instead of =");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (cmd_parse->parsed()) {
      aapp::ScriptAst ast = aapp::parse_script(read_file(script_path));
      if (format == "json") {
        std::cout << ast_to_json(ast).dump(2) << "\n";
      } else {
        std::cout << aapp::print_script(ast);
      }
      return kExitHolds;
    }

    if (cmd_encode->parsed()) {
      aapp::ScriptAst ast = aapp::parse_script(read_file(script_path));
      std::vector<aapp::Diagnostic> findings;
      aapp::EncodedPolicy policy = aapp::encode(ast, &findings);
      for (const aapp::Diagnostic& finding : findings) {
        std::cerr << to_string(finding) << "\n";
      }
      if (format == "json") {
        std::cout << policy_to_json(policy).dump(2) << "\n";
      } else {
        std::cout << aapp::print_policy(policy);
      }
      return kExitHolds;
    }

    if (cmd_classify->parsed()) {
      aapp::EncodedPolicy policy = aapp::encode(aapp::parse_script(read_file(script_path)));
      std::cout << to_string(aapp::classify(policy)) << "\n";
      return kExitHolds;
    }

    if (cmd_schedule->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      aapp::FunctionId function = parse_cli_id(function_name, "function name");
      aapp::SeededChoice choice(seed);
      aapp::ScheduleOutcome outcome =
          aapp::schedule(function, instance.configuration, instance.policy, instance.registry,
                         [&choice](std::size_t bound) { return choice(bound); });
      if (format == "json") {
        ordered_json out;
        out["function"] = function.str();
        if (outcome.failed()) {
          out["worker"] = nullptr;
        } else {
          out["worker"] = outcome.worker->str();
          out["block_index"] = outcome.block_index;
        }
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << (outcome.failed() ? "FAIL" : outcome.worker->str()) << "\n";
      }
      return kExitHolds;
    }

    if (cmd_simulate->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      aapp::Trace trace = aapp::trace_from_json(read_file(trace_path));
      aapp::Configuration final_conf = aapp::replay(instance.configuration, trace,
                                                    instance.policy, instance.registry,
                                                    /*strict=*/!lenient);
      if (format == "json") {
        std::cout << configuration_to_json(final_conf).dump(2) << "\n";
      } else {
        std::cout << configuration_to_text(final_conf);
      }
      return kExitHolds;
    }

    if (cmd_reach->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      aapp::QueryOptions options;
      options.search = make_search_options(max_states, threads, deterministic);
      aapp::Decision decision =
          aapp::reach(instance.policy, instance.registry, instance.configuration,
                      parse_cli_id(function_name, "function name"),
                      parse_cli_id(worker_name, "worker name"), options);
      print_decision("reach", decision, format);
      return decision_exit_code(decision);
    }

    if (cmd_cooccur->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      const std::size_t comma = functions_pair.find(',');
      if (comma == std::string::npos || functions_pair.find(',', comma + 1) != std::string::npos) {
        throw aapp::Error(aapp::Errc::InvalidGoal,
                          "--functions expects exactly two names, 'F,G'");
      }
      aapp::QueryOptions options;
      options.search = make_search_options(max_states, threads, deterministic);
      aapp::Decision decision =
          aapp::cooccur(instance.policy, instance.registry, instance.configuration,
                        parse_cli_id(functions_pair.substr(0, comma), "function name"),
                        parse_cli_id(functions_pair.substr(comma + 1), "function name"),
                        parse_cli_id(worker_name, "worker name"), options);
      print_decision("cooccur", decision, format);
      return decision_exit_code(decision);
    }

    if (cmd_check->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      aapp::GoalSpec goal = aapp::parse_goal(goal_text);
      aapp::Decision decision =
          aapp::goal_search(instance.policy, instance.registry, instance.configuration, goal,
                            make_search_options(max_states, threads, deterministic));
      print_decision("check", decision, format);
      return decision_exit_code(decision);
    }

    if (cmd_emit->parsed()) {
      Instance instance = load_instance(script_path, config_path);
      aapp::GoalSpec goal;
      if (opt_reach->count() > 0) {
        auto parts = split_colons(reach_spec);
        if (parts.size() != 2) {
          throw aapp::Error(aapp::Errc::InvalidGoal, "--reach expects 'F:W'");
        }
        goal.constraints.push_back(
            aapp::GoalConstraint{parse_cli_id(parts[1], "worker name"),
                                 parse_cli_id(parts[0], "function name"), 1});
      } else if (opt_cooccur->count() > 0) {
        auto parts = split_colons(cooccur_spec);
        if (parts.size() != 3) {
          throw aapp::Error(aapp::Errc::InvalidGoal, "--cooccur expects 'F:G:W'");
        }
        aapp::WorkerId worker = parse_cli_id(parts[2], "worker name");
        aapp::FunctionId f = parse_cli_id(parts[0], "function name");
        aapp::FunctionId g = parse_cli_id(parts[1], "function name");
        goal.constraints.push_back(aapp::GoalConstraint{worker, f, 1});
        if (!(f == g)) {
          goal.constraints.push_back(aapp::GoalConstraint{worker, g, 1});
        }
      } else if (opt_goal_file->count() > 0) {
        goal = aapp::parse_goal_file(read_file(goal_file));
      } else {
        throw aapp::Error(aapp::Errc::InvalidGoal,
                          "one of --reach, --cooccur or --goal-file is required");
      }

      bool any_initial = false;
      for (const auto& [worker, state] : instance.configuration) {
        any_initial = any_initial || !state.allocated.empty();
      }
      if (any_initial) {
        std::cerr << "warning: the problem file starts from an empty platform; the config's "
                     "initial allocations are not carried over\n";
      }

      const std::string domain =
          aapp::emit_domain(instance.policy, instance.registry, instance.configuration);
      const std::string problem = aapp::emit_problem(instance.configuration, instance.registry,
                                                     goal, goal_at_least);
      write_file(out_prefix + "-domain.pddl", domain);
      write_file(out_prefix + "-problem.pddl", problem);
      std::cout << out_prefix << "-domain.pddl\n" << out_prefix << "-problem.pddl\n";
      return kExitHolds;
    }
  } catch (const aapp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  return kExitInputError;
}
