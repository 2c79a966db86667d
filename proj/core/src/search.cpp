#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>
#include <utility>

#include "aapp/analysis.hpp"

namespace aapp {

namespace {

using StateVec = std::vector<std::uint32_t>;  // per-(worker, function) counts, worker-major

struct StateHash {
  std::size_t operator()(const StateVec& state) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint32_t value : state) {
      h ^= value;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct EdgeLabel {
  Label::Kind kind = Label::Kind::Fail;
  std::uint32_t function = 0;
  std::uint32_t worker = 0;
};

struct Node {
  StateVec state;
  std::uint64_t parent = 0;
  EdgeLabel via;
};

// Fixed id <-> index maps so states can live in flat count vectors.
struct Universe {
  std::vector<WorkerId> workers;
  std::vector<FunctionId> functions;
  std::vector<std::uint64_t> occupancy;
  std::vector<std::uint64_t> capacity;

  std::size_t index_of_worker(const WorkerId& worker) const {
    for (std::size_t i = 0; i < workers.size(); ++i) {
      if (workers[i] == worker) return i;
    }
    throw Error(Errc::UnknownName, "unknown worker '" + worker.str() + "'");
  }

  std::size_t index_of_function(const FunctionId& function) const {
    for (std::size_t i = 0; i < functions.size(); ++i) {
      if (functions[i] == function) return i;
    }
    throw Error(Errc::UnknownName, "unknown function '" + function.str() + "'");
  }

  Configuration materialize(const StateVec& state) const {
    Configuration conf;
    for (std::size_t w = 0; w < workers.size(); ++w) {
      WorkerState worker_state;
      worker_state.max = capacity[w];
      for (std::size_t f = 0; f < functions.size(); ++f) {
        const std::uint32_t count = state[w * functions.size() + f];
        if (count > 0) {
          worker_state.allocated.emplace(functions[f], count);
          worker_state.used += occupancy[f] * count;
        }
      }
      conf.emplace(workers[w], std::move(worker_state));
    }
    return conf;
  }
};

Universe build_universe(const Registry& registry, const Configuration& conf) {
  Universe u;
  for (const auto& [worker, state] : conf) {
    u.workers.push_back(worker);
    u.capacity.push_back(state.max);
  }
  for (const auto& [function, info] : registry) {
    u.functions.push_back(function);
    u.occupancy.push_back(info.occupancy);
  }
  return u;
}

StateVec root_state(const Universe& u, const Configuration& conf) {
  StateVec state(u.workers.size() * u.functions.size(), 0);
  for (std::size_t w = 0; w < u.workers.size(); ++w) {
    for (const auto& [function, count] : conf.at(u.workers[w]).allocated) {
      state[w * u.functions.size() + u.index_of_function(function)] = count;
    }
  }
  return state;
}

struct FlatGoal {
  std::vector<std::pair<std::size_t, std::uint64_t>> wanted;  // (flat index, count)
  GoalMode mode = GoalMode::AtLeast;

  bool satisfied(const StateVec& state) const {
    for (const auto& [index, count] : wanted) {
      if (mode == GoalMode::AtLeast ? state[index] < count : state[index] != count) {
        return false;
      }
    }
    return true;
  }
};

FlatGoal flatten_goal(const Universe& u, const GoalSpec& goal) {
  FlatGoal flat;
  flat.mode = goal.mode;
  for (const GoalConstraint& constraint : goal.constraints) {
    const std::size_t w = u.index_of_worker(constraint.worker);
    const std::size_t f = u.index_of_function(constraint.function);
    flat.wanted.emplace_back(w * u.functions.size() + f, constraint.count);
  }
  return flat;
}

// Ordered successors of one state: starts per function (all candidates under
// any, the first under best_first), then dones per allocated instance kind.
std::vector<std::pair<EdgeLabel, StateVec>> expand(const Universe& u, const StateVec& state,
                                                   const EncodedPolicy& policy,
                                                   const Registry& registry) {
  std::vector<std::pair<EdgeLabel, StateVec>> out;
  const Configuration conf = u.materialize(state);
  const std::size_t nf = u.functions.size();
  for (std::size_t f = 0; f < nf; ++f) {
    ScheduleCandidates candidates =
        schedule_candidates(u.functions[f], conf, policy, registry);
    if (candidates.empty()) continue;
    const std::size_t take =
        candidates.strategy == Strategy::BestFirst ? 1 : candidates.workers.size();
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t w = u.index_of_worker(candidates.workers[i]);
      StateVec next = state;
      ++next[w * nf + f];
      out.emplace_back(EdgeLabel{Label::Kind::Start, static_cast<std::uint32_t>(f),
                                 static_cast<std::uint32_t>(w)},
                       std::move(next));
    }
  }
  for (std::size_t w = 0; w < u.workers.size(); ++w) {
    for (std::size_t f = 0; f < nf; ++f) {
      if (state[w * nf + f] == 0) continue;
      StateVec next = state;
      --next[w * nf + f];
      out.emplace_back(EdgeLabel{Label::Kind::Done, static_cast<std::uint32_t>(f),
                                 static_cast<std::uint32_t>(w)},
                       std::move(next));
    }
  }
  return out;
}

Trace rebuild_witness(const Universe& u, const std::vector<Node>& nodes, std::uint64_t tail) {
  Trace trace;
  for (std::uint64_t at = tail; nodes[at].parent != at; at = nodes[at].parent) {
    const EdgeLabel& via = nodes[at].via;
    trace.push_back(via.kind == Label::Kind::Start
                        ? Label::start(u.functions[via.function], u.workers[via.worker])
                        : Label::done(u.functions[via.function], u.workers[via.worker]));
  }
  std::reverse(trace.begin(), trace.end());
  return trace;
}

}  // namespace

Decision goal_search(const EncodedPolicy& policy, const Registry& registry,
                     const Configuration& conf, const GoalSpec& goal,
                     const SearchOptions& options) {
  const Universe u = build_universe(registry, conf);
  const FlatGoal flat = flatten_goal(u, goal);

  Decision decision;
  decision.polarity = classify(policy);
  decision.backend = Decision::Backend::Search;

  std::vector<Node> nodes;
  std::unordered_map<StateVec, std::uint64_t, StateHash> visited;
  auto exhausted = [&]() {
    decision.verdict = Verdict::BoundExhausted;
    decision.stats.states_visited = nodes.size();
    decision.note = "stopped after " + std::to_string(nodes.size()) + " states";
    return decision;
  };

  if (options.max_states && *options.max_states == 0) return exhausted();
  nodes.push_back(Node{root_state(u, conf), 0, {}});
  visited.emplace(nodes.front().state, 0);
  decision.stats.states_visited = 1;
  decision.stats.frontier_peak = 1;

  if (flat.satisfied(nodes.front().state)) {
    decision.verdict = Verdict::Holds;
    decision.stats.witness_length = 0;
    return decision;
  }

  const unsigned thread_budget =
      options.deterministic ? 1 : std::max(1u, options.threads);
  std::vector<std::uint64_t> frontier{0};

  while (!frontier.empty()) {
    std::vector<std::vector<std::pair<EdgeLabel, StateVec>>> results(frontier.size());
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(thread_budget, frontier.size()));
    if (threads <= 1) {
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        results[i] = expand(u, nodes[frontier[i]].state, policy, registry);
      }
    } else {
      std::atomic<std::size_t> cursor{0};
      auto work = [&]() {
        for (std::size_t i = cursor.fetch_add(1); i < frontier.size();
             i = cursor.fetch_add(1)) {
          results[i] = expand(u, nodes[frontier[i]].state, policy, registry);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }

    // Merging in frontier-slice order keeps discovery order, and with it the
    // witness, independent of the thread count.
    std::vector<std::uint64_t> next_frontier;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (auto& [via, succ] : results[i]) {
        if (visited.find(succ) != visited.end()) continue;
        if (options.max_states && nodes.size() >= *options.max_states) return exhausted();
        const std::uint64_t id = nodes.size();
        visited.emplace(succ, id);
        nodes.push_back(Node{std::move(succ), frontier[i], via});
        next_frontier.push_back(id);
        if (flat.satisfied(nodes.back().state)) {
          decision.verdict = Verdict::Holds;
          decision.witness = rebuild_witness(u, nodes, id);
          decision.stats.states_visited = nodes.size();
          decision.stats.witness_length = decision.witness.size();
          return decision;
        }
      }
    }
    frontier = std::move(next_frontier);
    decision.stats.states_visited = nodes.size();
    decision.stats.frontier_peak =
        std::max<std::uint64_t>(decision.stats.frontier_peak, frontier.size());
  }

  decision.verdict = Verdict::DoesNotHold;
  decision.stats.states_visited = nodes.size();
  return decision;
}

}  // namespace aapp
