#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "aapp/model.hpp"
#include "aapp/semantics.hpp"

// Decision procedures for reachability and co-occurrence: policy polarity
// classification, the single-worker reduction, the linear-time deciders for
// the affinity-free and anti-affinity-only fragments, and a complete
// breadth-first search with witness traces for everything else.

namespace aapp {

enum class Polarity { PlainApp, NegOnly, PosOnly, Full };

std::string_view to_string(Polarity polarity);

Polarity classify(const EncodedPolicy& policy);

// Keeps only blocks involving `worker` (explicitly or via `*`) and rewrites
// their worker list to exactly [worker]. Block lists may come back empty.
EncodedPolicy simplify(const EncodedPolicy& policy, const WorkerId& worker);

// Linear deciders. Precondition: classify(policy) is PlainApp or NegOnly
// (WrongFragment otherwise) and the queried functions are absent from the
// target worker. Both evaluate blocks on the emptied configuration; removing
// load never invalidates a worker in these fragments, so that suffices.
bool reach_linear(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
                  const FunctionId& function, const WorkerId& worker);

// True iff one of the two allocation orders works: one function has a valid
// block on the emptied worker and the other still has one after the first is
// placed there.
bool cooccur_linear(const EncodedPolicy& policy, const Registry& registry,
                    const Configuration& conf, const FunctionId& f, const FunctionId& g,
                    const WorkerId& worker);

enum class Verdict { Holds, DoesNotHold, BoundExhausted };

std::string_view to_string(Verdict verdict);

struct SearchStats {
  std::uint64_t states_visited = 0;  // distinct states discovered, including the root
  std::uint64_t frontier_peak = 0;
  std::optional<std::uint64_t> witness_length;
};

struct SearchOptions {
  std::optional<std::uint64_t> max_states;  // absent = unlimited
  unsigned threads = 1;
  bool deterministic = false;  // force the single-threaded expansion order
};

struct Decision {
  enum class Backend { Trivial, Linear, Search };

  Verdict verdict = Verdict::DoesNotHold;
  Trace witness;  // non-empty only for Holds (empty if the start state already satisfies)
  SearchStats stats;
  Polarity polarity = Polarity::PlainApp;
  Backend backend = Backend::Search;
  std::string note;
};

std::string_view to_string(Decision::Backend backend);

// Breadth-first exploration of the configuration graph from `conf`.
// Successors: every start(f,w) the scheduler admits (all candidates under
// any, only the first under best_first) and every done(f,w) with a positive
// count; fail transitions do not change state and are never expanded. Holds
// returns a shortest witness; DoesNotHold requires full exhaustion;
// BoundExhausted reports hitting max_states first. The verdict and witness do
// not depend on the thread count.
Decision goal_search(const EncodedPolicy& policy, const Registry& registry,
                     const Configuration& conf, const GoalSpec& goal,
                     const SearchOptions& options = {});

struct QueryOptions {
  SearchOptions search;
  bool want_witness = true;
};

// Dispatchers: linear decider for PlainApp/NegOnly (a witness, when
// requested, comes from a follow-up search; if that hits the state bound the
// verdict stands and the note says the witness is missing), goal_search for
// PosOnly/Full.
Decision reach(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
               const FunctionId& function, const WorkerId& worker,
               const QueryOptions& options = {});

Decision cooccur(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
                 const FunctionId& f, const FunctionId& g, const WorkerId& worker,
                 const QueryOptions& options = {});

}  // namespace aapp
