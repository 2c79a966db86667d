#pragma once

#include <string>
#include <string_view>

#include "aapp/model.hpp"

// PDDL back end: grounds the scheduling semantics into a numeric-fluent
// domain (one start action per function/block/worker combination, one done
// action per function/worker pair, no fail action) and a problem whose
// initial state is the empty platform. Output is deterministic: identical
// inputs yield byte-identical text.

namespace aapp {

struct PddlBundle {
  std::string domain_text;
  std::string problem_text;
};

// Requires a policy that validates without errors against (registry, conf);
// throws ValidationFailed otherwise.
std::string emit_domain(const EncodedPolicy& policy, const Registry& registry,
                        const Configuration& conf);

// Initial state: max_cap from conf, occ from the registry, every
// number_of_f_in_W / used / tag_count at zero. Goals render as
// (= (number_of_f_in_W f w) n) per constraint, conjoined when there are
// several; at_least switches = to >=.
std::string emit_problem(const Configuration& conf, const Registry& registry,
                         const GoalSpec& goal, bool at_least = false);

// Same initial state, goal body passed through verbatim.
std::string emit_problem_raw(const Configuration& conf, const Registry& registry,
                             std::string_view goal_body);

}  // namespace aapp
