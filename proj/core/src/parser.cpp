#include "aapp/parser.hpp"

#include <charconv>
#include <map>
#include <utility>

#include "aapp/yaml_lite.hpp"

namespace aapp {

namespace {

using yaml::Node;

[[noreturn]] void fail(Errc code, int line, const std::string& message) {
  throw Error(code, message, line);
}

std::string_view trimmed(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  return text;
}

Identifier parse_id_text(std::string_view text, int line, const char* what) {
  if (!Identifier::is_valid(text)) {
    fail(Errc::Syntax, line, std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return Identifier{std::string(text)};
}

const std::string& scalar_of(const Node& node, const char* what) {
  if (!node.is_scalar() || node.scalar.empty()) {
    fail(Errc::Syntax, node.line, std::string("expected ") + what);
  }
  return node.scalar;
}

Identifier parse_id(const Node& node, const char* what) {
  return parse_id_text(scalar_of(node, what), node.line, what);
}

std::uint64_t parse_nat_text(std::string_view text, int line, const char* what) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    fail(Errc::Syntax, line,
         std::string("expected a number for ") + what + ", got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_nat(const Node& node, const char* what) {
  return parse_nat_text(scalar_of(node, what), node.line, what);
}

InvalidateOpt parse_invalidate_option(const Node& node) {
  std::string_view text = trimmed(scalar_of(node, "an invalidate option"));
  std::size_t space = text.find_first_of(" \t");
  std::string_view word = text.substr(0, space);
  std::string_view rest =
      space == std::string_view::npos ? std::string_view{} : trimmed(text.substr(space));
  if (word == "capacity_used") {
    if (rest.empty() || rest.back() != '%') {
      fail(Errc::Syntax, node.line, "expected 'capacity_used <percent>%'");
    }
    rest.remove_suffix(1);
    std::uint64_t percent = parse_nat_text(trimmed(rest), node.line, "capacity_used");
    if (percent > 100) {
      fail(Errc::PercentOutOfRange, node.line,
           "capacity_used " + std::to_string(percent) + "% is out of range");
    }
    return InvalidateOpt::capacity_used(percent);
  }
  if (word == "max_concurrent_invocations") {
    if (rest.empty()) {
      fail(Errc::Syntax, node.line, "expected 'max_concurrent_invocations <count>'");
    }
    return InvalidateOpt::max_concurrent(parse_nat_text(rest, node.line,
                                                        "max_concurrent_invocations"));
  }
  fail(Errc::UnknownOption, node.line,
       "unknown invalidate option '" + std::string(word) + "'");
}

AffinityOpt parse_affinity_text(std::string_view text, int line) {
  text = trimmed(text);
  bool anti = !text.empty() && text.front() == '!';
  if (anti) text.remove_prefix(1);
  return AffinityOpt{parse_id_text(trimmed(text), line, "affinity tag"), anti};
}

std::vector<AffinityOpt> parse_affinity(const Node& node) {
  std::vector<AffinityOpt> options;
  if (node.is_sequence()) {
    for (const Node& item : node.items) {
      options.push_back(parse_affinity_text(scalar_of(item, "an affinity option"), item.line));
    }
    return options;
  }
  // Inline comma form: `affinity: g_tag,!h_tag`.
  std::string_view text = scalar_of(node, "affinity options");
  std::size_t begin = 0;
  while (true) {
    std::size_t comma = text.find(',', begin);
    std::string_view piece = text.substr(begin, comma - begin);
    if (trimmed(piece).empty()) fail(Errc::Syntax, node.line, "empty affinity option");
    options.push_back(parse_affinity_text(piece, node.line));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return options;
}

WorkerSelection parse_workers(const Node& node) {
  if (node.is_scalar()) {
    if (node.scalar == "*") return WorkerSelection::all();
    fail(Errc::Syntax, node.line, "expected '*' or a list of workers");
  }
  if (!node.is_sequence()) {
    fail(Errc::Syntax, node.line, "expected '*' or a list of workers");
  }
  std::vector<WorkerId> workers;
  for (const Node& item : node.items) {
    workers.push_back(parse_id(item, "worker name"));
  }
  return WorkerSelection::of(std::move(workers));
}

RawBlock parse_block(const Node& node) {
  if (!node.is_mapping()) {
    fail(Errc::Syntax, node.line, "expected a block with a 'workers:' entry");
  }
  RawBlock block;
  block.line = node.line;
  bool saw_workers = false;
  for (const Node::KeyValue& entry : node.entries) {
    if (entry.key == "workers") {
      block.workers = parse_workers(entry.value);
      saw_workers = true;
    } else if (entry.key == "strategy") {
      const std::string& text = scalar_of(entry.value, "a strategy");
      if (text == "any") {
        block.strategy = Strategy::Any;
      } else if (text == "best_first") {
        block.strategy = Strategy::BestFirst;
      } else {
        fail(Errc::UnknownOption, entry.value.line, "unknown strategy '" + text + "'");
      }
    } else if (entry.key == "invalidate") {
      if (!entry.value.is_sequence()) {
        fail(Errc::Syntax, entry.value.line, "expected a list of invalidate options");
      }
      std::vector<InvalidateOpt> options;
      for (const Node& item : entry.value.items) {
        InvalidateOpt option = parse_invalidate_option(item);
        for (const InvalidateOpt& seen : options) {
          if (seen.kind == option.kind) {
            fail(Errc::Syntax, item.line, "duplicate invalidate option of the same kind");
          }
        }
        options.push_back(option);
      }
      block.invalidate = std::move(options);
    } else if (entry.key == "affinity") {
      block.affinity = parse_affinity(entry.value);
    } else {
      fail(Errc::UnknownOption, entry.key_line, "unknown block option '" + entry.key + "'");
    }
  }
  if (!saw_workers) {
    fail(Errc::Syntax, node.line, "block needs a 'workers:' entry");
  }
  return block;
}

TagRule parse_tag_rule(const Node& node) {
  if (!node.is_mapping() || node.entries.empty()) {
    fail(Errc::Syntax, node.line, "expected a tag rule ('<tag>:' with a list of blocks)");
  }
  TagRule rule;
  rule.line = node.line;
  bool saw_tag = false;
  for (const Node::KeyValue& entry : node.entries) {
    if (entry.key == "followup") {
      const std::string& text = scalar_of(entry.value, "a followup option");
      if (text == "default") {
        rule.followup = FollowupOpt::Default;
      } else if (text == "fail") {
        rule.followup = FollowupOpt::Fail;
      } else {
        fail(Errc::UnknownOption, entry.value.line, "unknown followup '" + text + "'");
      }
      continue;
    }
    if (saw_tag) {
      fail(Errc::Syntax, entry.key_line,
           "unexpected key '" + entry.key + "' in tag rule (only 'followup' may follow)");
    }
    rule.tag = parse_id_text(entry.key, entry.key_line, "tag name");
    rule.line = entry.key_line;
    saw_tag = true;
    if (entry.value.is_scalar() && entry.value.scalar.empty()) {
      fail(Errc::EmptyBlockList, entry.key_line,
           "tag '" + entry.key + "' has no blocks");
    }
    if (!entry.value.is_sequence()) {
      fail(Errc::Syntax, entry.value.line, "expected a list of blocks");
    }
    for (const Node& item : entry.value.items) {
      rule.blocks.push_back(parse_block(item));
    }
  }
  if (!saw_tag) {
    fail(Errc::Syntax, node.line, "expected a tag name");
  }
  return rule;
}

}  // namespace

ScriptAst parse_script(std::string_view text) {
  Node root = yaml::parse(text);
  if (!root.is_sequence()) {
    fail(Errc::Syntax, root.line, "expected a list of tag rules");
  }
  ScriptAst ast;
  for (const Node& item : root.items) {
    TagRule rule = parse_tag_rule(item);
    for (const TagRule& seen : ast.rules) {
      if (seen.tag == rule.tag) {
        fail(Errc::DuplicateTag, rule.line, "tag '" + rule.tag.str() + "' defined twice");
      }
    }
    ast.rules.push_back(std::move(rule));
  }
  return ast;
}

namespace {

const Node& require_key(const Node& map, const char* key, const char* what) {
  const Node* value = map.get(key);
  if (value == nullptr) {
    fail(Errc::Syntax, map.line, std::string(what) + " needs a '" + key + "' entry");
  }
  return *value;
}

void reject_unknown_keys(const Node& map, std::initializer_list<std::string_view> known,
                         const char* what) {
  for (const Node::KeyValue& entry : map.entries) {
    bool ok = false;
    for (std::string_view key : known) ok = ok || entry.key == key;
    if (!ok) {
      fail(Errc::Syntax, entry.key_line,
           std::string("unknown key '") + entry.key + "' in " + what);
    }
  }
}

const Node& require_sequence(const Node& map, const char* key, const char* what) {
  const Node& value = require_key(map, key, what);
  if (!value.is_sequence()) {
    fail(Errc::Syntax, value.line, std::string("expected a list under '") + key + "'");
  }
  return value;
}

}  // namespace

PlatformSpec parse_config(std::string_view text) {
  Node root = yaml::parse(text);
  if (!root.is_mapping()) {
    fail(Errc::Syntax, root.line, "expected a mapping with 'workers' and 'functions'");
  }
  reject_unknown_keys(root, {"workers", "functions", "initial"}, "the platform config");

  PlatformSpec spec;
  for (const Node& item : require_sequence(root, "workers", "the platform config").items) {
    if (!item.is_mapping()) fail(Errc::Syntax, item.line, "expected a worker entry");
    reject_unknown_keys(item, {"name", "max_memory"}, "a worker entry");
    PlatformSpec::WorkerDecl decl;
    decl.name = parse_id(require_key(item, "name", "a worker entry"), "worker name");
    decl.max_memory = parse_nat(require_key(item, "max_memory", "a worker entry"), "max_memory");
    if (decl.max_memory == 0) {
      fail(Errc::ZeroMemory, item.line, "worker '" + decl.name.str() + "' has zero capacity");
    }
    for (const auto& seen : spec.workers) {
      if (seen.name == decl.name) {
        fail(Errc::DuplicateName, item.line, "worker '" + decl.name.str() + "' declared twice");
      }
    }
    spec.workers.push_back(std::move(decl));
  }

  for (const Node& item : require_sequence(root, "functions", "the platform config").items) {
    if (!item.is_mapping()) fail(Errc::Syntax, item.line, "expected a function entry");
    reject_unknown_keys(item, {"name", "memory", "tag"}, "a function entry");
    PlatformSpec::FunctionDecl decl;
    decl.name = parse_id(require_key(item, "name", "a function entry"), "function name");
    decl.memory = parse_nat(require_key(item, "memory", "a function entry"), "memory");
    decl.tag = parse_id(require_key(item, "tag", "a function entry"), "tag name");
    if (decl.memory == 0) {
      fail(Errc::ZeroMemory, item.line, "function '" + decl.name.str() + "' has zero memory");
    }
    for (const auto& seen : spec.functions) {
      if (seen.name == decl.name) {
        fail(Errc::DuplicateName, item.line,
             "function '" + decl.name.str() + "' declared twice");
      }
    }
    spec.functions.push_back(std::move(decl));
  }

  if (const Node* initial = root.get("initial")) {
    if (!initial->is_sequence()) {
      fail(Errc::Syntax, initial->line, "expected a list under 'initial'");
    }
    std::map<WorkerId, std::uint64_t> used;
    for (const Node& item : initial->items) {
      if (!item.is_mapping()) fail(Errc::Syntax, item.line, "expected an initial allocation");
      reject_unknown_keys(item, {"worker", "function", "count"}, "an initial allocation");
      PlatformSpec::InitialDecl decl;
      decl.worker = parse_id(require_key(item, "worker", "an initial allocation"), "worker name");
      decl.function =
          parse_id(require_key(item, "function", "an initial allocation"), "function name");
      decl.count = parse_nat(require_key(item, "count", "an initial allocation"), "count");
      if (decl.count == 0) fail(Errc::Syntax, item.line, "count must be positive");

      const PlatformSpec::WorkerDecl* worker = nullptr;
      for (const auto& seen : spec.workers) {
        if (seen.name == decl.worker) worker = &seen;
      }
      if (worker == nullptr) {
        fail(Errc::UnknownName, item.line, "unknown worker '" + decl.worker.str() + "'");
      }
      const PlatformSpec::FunctionDecl* function = nullptr;
      for (const auto& seen : spec.functions) {
        if (seen.name == decl.function) function = &seen;
      }
      if (function == nullptr) {
        fail(Errc::UnknownName, item.line, "unknown function '" + decl.function.str() + "'");
      }
      used[decl.worker] += function->memory * decl.count;
      if (used[decl.worker] > worker->max_memory) {
        fail(Errc::InitialOverCapacity, item.line,
             "initial allocations on '" + decl.worker.str() + "' need " +
                 std::to_string(used[decl.worker]) + " of " +
                 std::to_string(worker->max_memory) + " units");
      }
      spec.initial.push_back(std::move(decl));
    }
  }
  return spec;
}

Registry PlatformSpec::registry() const {
  Registry reg;
  for (const FunctionDecl& decl : functions) {
    reg.add(decl.name, decl.memory, decl.tag);
  }
  return reg;
}

Configuration PlatformSpec::configuration() const {
  Configuration conf;
  for (const WorkerDecl& decl : workers) {
    conf.emplace(decl.name, WorkerState{{}, 0, decl.max_memory});
  }
  Registry reg = registry();
  for (const InitialDecl& decl : initial) {
    auto it = conf.find(decl.worker);
    if (it == conf.end()) {
      throw Error(Errc::UnknownName, "unknown worker '" + decl.worker.str() + "'");
    }
    WorkerState& state = it->second;
    state.used += reg.occupancy(decl.function) * decl.count;
    if (state.used > state.max) {
      throw Error(Errc::InitialOverCapacity,
                  "initial allocations on '" + decl.worker.str() + "' exceed its capacity");
    }
    state.allocated[decl.function] += static_cast<std::uint32_t>(decl.count);
  }
  return conf;
}

namespace {

void push_goal_constraint(GoalSpec& goal, GoalConstraint constraint, int line) {
  if (constraint.count == 0) {
    fail(Errc::InvalidGoal, line, "goal count must be at least 1");
  }
  for (const GoalConstraint& seen : goal.constraints) {
    if (seen.worker == constraint.worker && seen.function == constraint.function) {
      fail(Errc::InvalidGoal, line,
           "duplicate goal entry for '" + constraint.function.str() + "' on '" +
               constraint.worker.str() + "'");
    }
  }
  goal.constraints.push_back(std::move(constraint));
}

Identifier parse_goal_id(std::string_view text, const char* what) {
  text = trimmed(text);
  if (!Identifier::is_valid(text)) {
    throw Error(Errc::InvalidGoal,
                std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return Identifier{std::string(text)};
}

}  // namespace

GoalSpec parse_goal(std::string_view text, GoalMode mode) {
  GoalSpec goal;
  goal.mode = mode;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t comma = text.find(',', begin);
    std::string_view piece =
        trimmed(text.substr(begin, comma == std::string_view::npos ? comma : comma - begin));
    if (piece.empty()) {
      throw Error(Errc::InvalidGoal, "expected 'worker:function[:count]'");
    }
    std::size_t first = piece.find(':');
    if (first == std::string_view::npos) {
      throw Error(Errc::InvalidGoal,
                  "expected 'worker:function[:count]', got '" + std::string(piece) + "'");
    }
    std::size_t second = piece.find(':', first + 1);
    GoalConstraint constraint;
    constraint.worker = parse_goal_id(piece.substr(0, first), "worker name");
    if (second == std::string_view::npos) {
      constraint.function = parse_goal_id(piece.substr(first + 1), "function name");
      constraint.count = 1;
    } else {
      constraint.function =
          parse_goal_id(piece.substr(first + 1, second - first - 1), "function name");
      std::string_view count = trimmed(piece.substr(second + 1));
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), value);
      if (ec != std::errc{} || ptr != count.data() + count.size() || count.empty()) {
        throw Error(Errc::InvalidGoal, "invalid goal count '" + std::string(count) + "'");
      }
      constraint.count = value;
    }
    push_goal_constraint(goal, std::move(constraint), 0);
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  if (goal.constraints.empty()) {
    throw Error(Errc::InvalidGoal, "empty goal");
  }
  return goal;
}

GoalSpec parse_goal_file(std::string_view text, GoalMode mode) {
  Node root = yaml::parse(text);
  if (!root.is_mapping()) {
    fail(Errc::InvalidGoal, root.line, "expected a mapping with a 'goal' entry");
  }
  reject_unknown_keys(root, {"goal"}, "the goal file");
  const Node* list = root.get("goal");
  if (list == nullptr || !list->is_sequence()) {
    fail(Errc::InvalidGoal, root.line, "expected a 'goal' list");
  }
  GoalSpec goal;
  goal.mode = mode;
  for (const Node& item : list->items) {
    if (!item.is_mapping()) fail(Errc::InvalidGoal, item.line, "expected a goal entry");
    reject_unknown_keys(item, {"worker", "function", "count"}, "a goal entry");
    GoalConstraint constraint;
    constraint.worker = parse_id(require_key(item, "worker", "a goal entry"), "worker name");
    constraint.function =
        parse_id(require_key(item, "function", "a goal entry"), "function name");
    if (const Node* count = item.get("count")) {
      constraint.count = parse_nat(*count, "count");
    }
    push_goal_constraint(goal, std::move(constraint), item.line);
  }
  if (goal.constraints.empty()) {
    fail(Errc::InvalidGoal, list->line, "empty goal");
  }
  return goal;
}

}  // namespace aapp
