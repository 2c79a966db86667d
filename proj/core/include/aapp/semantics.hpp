#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aapp/model.hpp"

// The scheduling semantics: block validity, candidate enumeration, the
// scheduler itself, single labelled transitions and trace replay.

namespace aapp {

// A worker passes a block iff all of the following hold:
//  (1) the worker exists and used + occ(f) <= max
//  (2) capacity_used n%: used * 100 < n * max (occupancy before adding f)
//  (3) max_concurrent_invocations n: total instances on the worker < n
//  (4) every affine tag is present among the tags of allocated functions
//  (5) no anti-affine tag is present among those tags
bool valid(const FunctionId& function, const WorkerId& worker, const Configuration& conf,
           const Registry& registry, const Block& block);

// The first block (in policy order) with at least one valid worker, plus its
// valid workers in block order; `*` expands to all workers in ascending name
// order. workers.empty() means no block qualified.
struct ScheduleCandidates {
  std::size_t block_index = 0;
  Strategy strategy = Strategy::Any;
  std::vector<WorkerId> workers;

  bool empty() const noexcept { return workers.empty(); }
};

ScheduleCandidates schedule_candidates(const FunctionId& function, const Configuration& conf,
                                       const EncodedPolicy& policy, const Registry& registry);

struct ScheduleOutcome {
  std::size_t block_index = 0;
  std::optional<WorkerId> worker;  // absent = scheduling failed

  bool failed() const noexcept { return !worker.has_value(); }
};

// Reproducible chooser for the `any` strategy.
class SeededChoice {
 public:
  explicit SeededChoice(std::uint64_t seed) : rng_(seed) {}

  std::size_t operator()(std::size_t bound) { return bound < 2 ? 0 : rng_() % bound; }

 private:
  std::mt19937_64 rng_;
};

using ChoiceFn = std::function<std::size_t(std::size_t)>;

// best_first picks the first candidate; any defers to `choose` (first
// candidate when none is supplied).
ScheduleOutcome schedule(const FunctionId& function, const Configuration& conf,
                         const EncodedPolicy& policy, const Registry& registry,
                         const ChoiceFn& choose = {});

// One strict transition. Legality:
//   start(f,w): w is among schedule_candidates(f).workers
//   done(f,w):  an instance of f is allocated on w
//   fail(f):    schedule_candidates(f) is empty; the state is unchanged
Configuration step(const Configuration& conf, const Label& label, const EncodedPolicy& policy,
                   const Registry& registry);

// Folds step over the trace. strict=false drops the candidate-membership
// check on start (worker existence and capacity still apply) so externally
// produced plans can be replayed; errors cite the failing label's index.
Configuration replay(const Configuration& conf, const Trace& trace, const EncodedPolicy& policy,
                     const Registry& registry, bool strict = true);

// Trace wire format: JSON array of {action, function, worker} records, worker
// null for fail labels.
std::string trace_to_json(const Trace& trace, int indent = -1);
Trace trace_from_json(std::string_view text);

// "(start, f, w1)" rendering.
std::string to_text(const Label& label);

}  // namespace aapp
