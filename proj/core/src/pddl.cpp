#include "aapp/pddl.hpp"

#include <set>
#include <sstream>

#include "aapp/encoder.hpp"
#include "aapp/semantics.hpp"

namespace aapp {

namespace {

std::vector<WorkerId> block_workers(const Block& block, const Configuration& conf) {
  if (!block.workers.star) return block.workers.list;
  std::vector<WorkerId> all;
  for (const auto& [worker, state] : conf) all.push_back(worker);
  return all;
}

std::set<TagId> registry_tags(const Registry& registry) {
  std::set<TagId> tags;
  for (const auto& [function, info] : registry) tags.insert(info.tag);
  return tags;
}

std::string count_fluent(const FunctionId& function, const WorkerId& worker) {
  return "(number_of_f_in_W " + function.str() + " " + worker.str() + ")";
}

// Total instances on `worker` as a left-nested sum of per-function counts.
std::string instance_sum(const Registry& registry, const WorkerId& worker) {
  std::string sum;
  for (const auto& [function, info] : registry) {
    const std::string term = count_fluent(function, worker);
    sum = sum.empty() ? term : "(+ " + sum + " " + term + ")";
  }
  return sum.empty() ? "0" : sum;
}

// Conjuncts stating that `worker` passes `block` for `function`. An affine
// tag no function carries can never be present, so it folds to (= 0 1).
std::vector<std::string> valid_conjuncts(const FunctionId& function, const WorkerId& worker,
                                         const Block& block, const Registry& registry,
                                         const std::set<TagId>& tags) {
  std::vector<std::string> out;
  out.push_back("(<= (+ (used " + worker.str() + ") (occ " + function.str() + ")) (max_cap " +
                worker.str() + "))");
  for (const InvalidateOpt& option : block.invalidate) {
    if (option.kind == InvalidateOpt::Kind::CapacityUsed) {
      out.push_back("(< (* (used " + worker.str() + ") 100) (* " +
                    std::to_string(option.value) + " (max_cap " + worker.str() + ")))");
    } else {
      out.push_back("(< " + instance_sum(registry, worker) + " " +
                    std::to_string(option.value) + ")");
    }
  }
  for (const TagId& tag : block.affine) {
    if (tags.count(tag) == 0) {
      out.push_back("(= 0 1)");
    } else {
      out.push_back("(> (tag_count " + tag.str() + " " + worker.str() + ") 0)");
    }
  }
  for (const TagId& tag : block.anti_affine) {
    if (tags.count(tag) == 0) continue;  // never present, condition always holds
    out.push_back("(= (tag_count " + tag.str() + " " + worker.str() + ") 0)");
  }
  return out;
}

// Disjunction stating that `worker` fails `block` for `function`; empty when
// the failure is unconditional (an affine tag nothing carries).
std::string invalid_disjunction(const FunctionId& function, const WorkerId& worker,
                                const Block& block, const Registry& registry,
                                const std::set<TagId>& tags) {
  std::vector<std::string> cases;
  cases.push_back("(> (+ (used " + worker.str() + ") (occ " + function.str() + ")) (max_cap " +
                  worker.str() + "))");
  for (const InvalidateOpt& option : block.invalidate) {
    if (option.kind == InvalidateOpt::Kind::CapacityUsed) {
      cases.push_back("(>= (* (used " + worker.str() + ") 100) (* " +
                      std::to_string(option.value) + " (max_cap " + worker.str() + ")))");
    } else {
      cases.push_back("(>= " + instance_sum(registry, worker) + " " +
                      std::to_string(option.value) + ")");
    }
  }
  for (const TagId& tag : block.affine) {
    if (tags.count(tag) == 0) return {};  // invalid no matter the state
    cases.push_back("(= (tag_count " + tag.str() + " " + worker.str() + ") 0)");
  }
  for (const TagId& tag : block.anti_affine) {
    if (tags.count(tag) == 0) continue;
    cases.push_back("(> (tag_count " + tag.str() + " " + worker.str() + ") 0)");
  }
  if (cases.size() == 1) return cases.front();
  std::string out = "(or";
  for (const std::string& c : cases) out += " " + c;
  return out + ")";
}

void emit_start_action(std::ostream& os, const FunctionId& function, const TagId& tag,
                       const std::vector<Block>& blocks, std::size_t index,
                       const WorkerId& worker, const Configuration& conf,
                       const Registry& registry, const std::set<TagId>& tags) {
  os << "  (:action start_" << function << "_b" << index << "_" << worker << "\n";
  os << "    :parameters ()\n";
  os << "    :precondition (and\n";
  for (const std::string& conjunct :
       valid_conjuncts(function, worker, blocks[index], registry, tags)) {
    os << "      " << conjunct << "\n";
  }
  for (std::size_t j = 0; j < index; ++j) {
    for (const WorkerId& other : block_workers(blocks[j], conf)) {
      const std::string disj = invalid_disjunction(function, other, blocks[j], registry, tags);
      if (!disj.empty()) os << "      " << disj << "\n";
    }
  }
  if (blocks[index].strategy == Strategy::BestFirst) {
    for (const WorkerId& other : block_workers(blocks[index], conf)) {
      if (other == worker) break;
      const std::string disj =
          invalid_disjunction(function, other, blocks[index], registry, tags);
      if (!disj.empty()) os << "      " << disj << "\n";
    }
  }
  os << "    )\n";
  os << "    :effect (and\n";
  os << "      (increase " << count_fluent(function, worker) << " 1)\n";
  os << "      (increase (used " << worker << ") (occ " << function << "))\n";
  os << "      (increase (tag_count " << tag << " " << worker << ") 1)\n";
  os << "    )\n";
  os << "  )\n";
}

void emit_done_action(std::ostream& os, const FunctionId& function, const TagId& tag,
                      const WorkerId& worker) {
  os << "  (:action done_" << function << "_" << worker << "\n";
  os << "    :parameters ()\n";
  os << "    :precondition (>= " << count_fluent(function, worker) << " 1)\n";
  os << "    :effect (and\n";
  os << "      (decrease " << count_fluent(function, worker) << " 1)\n";
  os << "      (decrease (used " << worker << ") (occ " << function << "))\n";
  os << "      (decrease (tag_count " << tag << " " << worker << ") 1)\n";
  os << "    )\n";
  os << "  )\n";
}

}  // namespace

std::string emit_domain(const EncodedPolicy& policy, const Registry& registry,
                        const Configuration& conf) {
  const std::vector<Diagnostic> findings = validate(policy, registry, conf);
  if (has_errors(findings)) {
    std::string detail;
    for (const Diagnostic& finding : findings) {
      if (finding.severity == Diagnostic::Severity::Error) {
        detail = finding.message;
        break;
      }
    }
    throw Error(Errc::ValidationFailed, "policy does not fit the platform: " + detail);
  }

  const std::set<TagId> tags = registry_tags(registry);
  std::ostringstream os;
  os << "(define (domain aapp)\n";
  os << "  (:requirements :typing :fluents :disjunctive-preconditions"
        " :negative-preconditions)\n";
  os << "  (:types worker function tag)\n";

  os << "  (:constants\n";
  if (!conf.empty()) {
    os << "   ";
    for (const auto& [worker, state] : conf) os << " " << worker;
    os << " - worker\n";
  }
  if (!registry.empty()) {
    os << "   ";
    for (const auto& [function, info] : registry) os << " " << function;
    os << " - function\n";
  }
  if (!tags.empty()) {
    os << "   ";
    for (const TagId& tag : tags) os << " " << tag;
    os << " - tag\n";
  }
  os << "  )\n";

  os << "  (:functions\n";
  os << "    (number_of_f_in_W ?f - function ?w - worker)\n";
  os << "    (used ?w - worker)\n";
  os << "    (max_cap ?w - worker)\n";
  os << "    (occ ?f - function)\n";
  os << "    (tag_count ?t - tag ?w - worker)\n";
  os << "  )\n";

  for (const auto& [function, info] : registry) {
    const std::vector<Block>* blocks = policy.find(info.tag);
    if (blocks == nullptr) continue;  // validate() guarantees this cannot happen
    for (std::size_t i = 0; i < blocks->size(); ++i) {
      for (const WorkerId& worker : block_workers((*blocks)[i], conf)) {
        emit_start_action(os, function, info.tag, *blocks, i, worker, conf, registry, tags);
      }
    }
    for (const auto& [worker, state] : conf) {
      emit_done_action(os, function, info.tag, worker);
    }
  }

  os << ")\n";
  return os.str();
}

namespace {

void emit_init(std::ostream& os, const Configuration& conf, const Registry& registry) {
  const std::set<TagId> tags = registry_tags(registry);
  os << "  (:init\n";
  for (const auto& [function, info] : registry) {
    for (const auto& [worker, state] : conf) {
      os << "    (= " << count_fluent(function, worker) << " 0)\n";
    }
  }
  for (const auto& [worker, state] : conf) {
    os << "    (= (used " << worker << ") 0)\n";
  }
  for (const auto& [worker, state] : conf) {
    os << "    (= (max_cap " << worker << ") " << state.max << ")\n";
  }
  for (const auto& [function, info] : registry) {
    os << "    (= (occ " << function << ") " << info.occupancy << ")\n";
  }
  for (const TagId& tag : tags) {
    for (const auto& [worker, state] : conf) {
      os << "    (= (tag_count " << tag << " " << worker << ") 0)\n";
    }
  }
  os << "  )\n";
}

void check_goal_names(const Configuration& conf, const Registry& registry,
                      const GoalSpec& goal) {
  for (const GoalConstraint& constraint : goal.constraints) {
    if (conf.find(constraint.worker) == conf.end()) {
      throw Error(Errc::UnknownName, "unknown worker '" + constraint.worker.str() + "'");
    }
    if (!registry.contains(constraint.function)) {
      throw Error(Errc::UnknownName, "unknown function '" + constraint.function.str() + "'");
    }
  }
}

}  // namespace

std::string emit_problem(const Configuration& conf, const Registry& registry,
                         const GoalSpec& goal, bool at_least) {
  check_goal_names(conf, registry, goal);
  std::ostringstream os;
  os << "(define (problem aapp-query)\n";
  os << "  (:domain aapp)\n";
  emit_init(os, conf, registry);
  const char* op = at_least ? ">=" : "=";
  os << "  (:goal\n";
  if (goal.constraints.size() == 1) {
    const GoalConstraint& c = goal.constraints.front();
    os << "    (" << op << " " << count_fluent(c.function, c.worker) << " " << c.count << ")\n";
  } else {
    os << "    (and";
    for (const GoalConstraint& c : goal.constraints) {
      os << " (" << op << " " << count_fluent(c.function, c.worker) << " " << c.count << ")";
    }
    os << ")\n";
  }
  os << "  )\n";
  os << ")\n";
  return os.str();
}

std::string emit_problem_raw(const Configuration& conf, const Registry& registry,
                             std::string_view goal_body) {
  std::ostringstream os;
  os << "(define (problem aapp-query)\n";
  os << "  (:domain aapp)\n";
  emit_init(os, conf, registry);
  os << "  (:goal\n";
  os << "    " << goal_body << "\n";
  os << "  )\n";
  os << ")\n";
  return os.str();
}

}  // namespace aapp
