#include "aapp/semantics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aapp {

namespace {

std::set<TagId> worker_tags(const WorkerState& state, const Registry& registry) {
  std::set<TagId> tags;
  for (const auto& [function, count] : state.allocated) {
    if (count > 0) tags.insert(registry.tag_of(function));
  }
  return tags;
}

}  // namespace

bool valid(const FunctionId& function, const WorkerId& worker, const Configuration& conf,
           const Registry& registry, const Block& block) {
  const std::uint64_t occ = registry.occupancy(function);
  auto it = conf.find(worker);
  if (it == conf.end()) return false;
  const WorkerState& state = it->second;
  if (state.used + occ > state.max) return false;
  for (const InvalidateOpt& option : block.invalidate) {
    switch (option.kind) {
      case InvalidateOpt::Kind::CapacityUsed:
        // The threshold reads the occupancy before f is added.
        if (state.used * 100 >= option.value * state.max) return false;
        break;
      case InvalidateOpt::Kind::MaxConcurrent:
        if (state.instances() >= option.value) return false;
        break;
    }
  }
  if (!block.affine.empty() || !block.anti_affine.empty()) {
    const std::set<TagId> tags = worker_tags(state, registry);
    for (const TagId& tag : block.affine) {
      if (tags.count(tag) == 0) return false;
    }
    for (const TagId& tag : block.anti_affine) {
      if (tags.count(tag) != 0) return false;
    }
  }
  return true;
}

ScheduleCandidates schedule_candidates(const FunctionId& function, const Configuration& conf,
                                       const EncodedPolicy& policy, const Registry& registry) {
  const TagId& tag = registry.tag_of(function);
  const std::vector<Block>* blocks = policy.find(tag);
  if (blocks == nullptr) {
    throw Error(Errc::UntaggedFunction,
                "function '" + function.str() + "' has tag '" + tag.str() +
                    "' with no policy entry");
  }
  for (std::size_t i = 0; i < blocks->size(); ++i) {
    const Block& block = (*blocks)[i];
    ScheduleCandidates found;
    found.block_index = i;
    found.strategy = block.strategy;
    if (block.workers.star) {
      // Configuration keys are already in ascending name order.
      for (const auto& [worker, state] : conf) {
        if (valid(function, worker, conf, registry, block)) found.workers.push_back(worker);
      }
    } else {
      for (const WorkerId& worker : block.workers.list) {
        if (valid(function, worker, conf, registry, block)) found.workers.push_back(worker);
      }
    }
    if (!found.workers.empty()) return found;
  }
  return ScheduleCandidates{};
}

ScheduleOutcome schedule(const FunctionId& function, const Configuration& conf,
                         const EncodedPolicy& policy, const Registry& registry,
                         const ChoiceFn& choose) {
  ScheduleCandidates candidates = schedule_candidates(function, conf, policy, registry);
  if (candidates.empty()) return ScheduleOutcome{};
  std::size_t pick = 0;
  if (candidates.strategy == Strategy::Any && choose) {
    pick = choose(candidates.workers.size()) % candidates.workers.size();
  }
  return ScheduleOutcome{candidates.block_index, candidates.workers[pick]};
}

namespace {

Configuration step_impl(const Configuration& conf, const Label& label,
                        const EncodedPolicy& policy, const Registry& registry, bool strict) {
  if (label.kind != Label::Kind::Fail && !label.worker) {
    throw Error(Errc::IllegalTransition, "start/done labels need a worker");
  }
  switch (label.kind) {
    case Label::Kind::Start: {
      const WorkerId& worker = *label.worker;
      if (strict) {
        ScheduleCandidates candidates =
            schedule_candidates(label.function, conf, policy, registry);
        if (std::find(candidates.workers.begin(), candidates.workers.end(), worker) ==
            candidates.workers.end()) {
          throw Error(Errc::IllegalTransition,
                      "start (" + label.function.str() + ", " + worker.str() + "): worker '" +
                          worker.str() + "' is not a valid candidate");
        }
      } else {
        auto it = conf.find(worker);
        if (it == conf.end()) {
          throw Error(Errc::IllegalTransition,
                      "start (" + label.function.str() + ", " + worker.str() +
                          "): unknown worker '" + worker.str() + "'");
        }
        if (it->second.used + registry.occupancy(label.function) > it->second.max) {
          throw Error(Errc::IllegalTransition,
                      "start (" + label.function.str() + ", " + worker.str() + "): worker '" +
                          worker.str() + "' lacks the capacity");
        }
      }
      return apply_start(conf, label.function, worker, registry);
    }
    case Label::Kind::Done: {
      const WorkerId& worker = *label.worker;
      auto it = conf.find(worker);
      if (it == conf.end() || it->second.count(label.function) == 0) {
        throw Error(Errc::IllegalTransition,
                    "done (" + label.function.str() + ", " + worker.str() +
                        "): no instance of '" + label.function.str() + "' allocated on '" +
                        worker.str() + "'");
      }
      return apply_done(conf, label.function, worker, registry);
    }
    case Label::Kind::Fail: {
      ScheduleCandidates candidates =
          schedule_candidates(label.function, conf, policy, registry);
      if (!candidates.empty()) {
        throw Error(Errc::IllegalTransition,
                    "fail (" + label.function.str() + "): function is schedulable on '" +
                        candidates.workers.front().str() + "'");
      }
      return conf;
    }
  }
  throw Error(Errc::IllegalTransition, "unknown label kind");
}

}  // namespace

Configuration step(const Configuration& conf, const Label& label, const EncodedPolicy& policy,
                   const Registry& registry) {
  return step_impl(conf, label, policy, registry, true);
}

Configuration replay(const Configuration& conf, const Trace& trace, const EncodedPolicy& policy,
                     const Registry& registry, bool strict) {
  Configuration current = conf;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    try {
      current = step_impl(current, trace[i], policy, registry, strict);
    } catch (const Error& e) {
      throw Error(Errc::IllegalTransition,
                  "label " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return current;
}

std::string trace_to_json(const Trace& trace, int indent) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Label& label : trace) {
    nlohmann::ordered_json record;
    switch (label.kind) {
      case Label::Kind::Start: record["action"] = "start"; break;
      case Label::Kind::Done: record["action"] = "done"; break;
      case Label::Kind::Fail: record["action"] = "fail"; break;
    }
    record["function"] = label.function.str();
    if (label.worker) {
      record["worker"] = label.worker->str();
    } else {
      record["worker"] = nullptr;
    }
    out.push_back(std::move(record));
  }
  return out.dump(indent);
}

Trace trace_from_json(std::string_view text) {
  nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) {
    throw Error(Errc::InvalidTrace, "expected a JSON array of trace records");
  }
  Trace trace;
  for (const auto& record : parsed) {
    if (!record.is_object() || !record.contains("action") || !record.contains("function") ||
        !record["action"].is_string() || !record["function"].is_string()) {
      throw Error(Errc::InvalidTrace,
                  "expected records of the form {action, function, worker}");
    }
    const std::string action = record["action"].get<std::string>();
    const std::string function_text = record["function"].get<std::string>();
    if (!Identifier::is_valid(function_text)) {
      throw Error(Errc::InvalidTrace, "invalid function name '" + function_text + "'");
    }
    FunctionId function{function_text};
    if (action == "fail") {
      if (record.contains("worker") && !record["worker"].is_null()) {
        throw Error(Errc::InvalidTrace, "fail records take no worker");
      }
      trace.push_back(Label::fail(std::move(function)));
      continue;
    }
    if (action != "start" && action != "done") {
      throw Error(Errc::InvalidTrace, "unknown action '" + action + "'");
    }
    if (!record.contains("worker") || !record["worker"].is_string()) {
      throw Error(Errc::InvalidTrace, "'" + action + "' records need a worker");
    }
    const std::string worker_text = record["worker"].get<std::string>();
    if (!Identifier::is_valid(worker_text)) {
      throw Error(Errc::InvalidTrace, "invalid worker name '" + worker_text + "'");
    }
    WorkerId worker{worker_text};
    trace.push_back(action == "start" ? Label::start(std::move(function), std::move(worker))
                                      : Label::done(std::move(function), std::move(worker)));
  }
  return trace;
}

std::string to_text(const Label& label) {
  switch (label.kind) {
    case Label::Kind::Start:
      return "(start, " + label.function.str() + ", " + label.worker->str() + ")";
    case Label::Kind::Done:
      return "(done, " + label.function.str() + ", " + label.worker->str() + ")";
    case Label::Kind::Fail:
      return "(fail, " + label.function.str() + ")";
  }
  return {};
}

}  // namespace aapp
