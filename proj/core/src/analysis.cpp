#include "aapp/analysis.hpp"

#include <utility>

namespace aapp {

std::string_view to_string(Polarity polarity) {
  switch (polarity) {
    case Polarity::PlainApp: return "PlainApp";
    case Polarity::NegOnly: return "NegOnly";
    case Polarity::PosOnly: return "PosOnly";
    case Polarity::Full: return "Full";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Holds: return "holds";
    case Verdict::DoesNotHold: return "does-not-hold";
    case Verdict::BoundExhausted: return "bound-exhausted";
  }
  return "?";
}

std::string_view to_string(Decision::Backend backend) {
  switch (backend) {
    case Decision::Backend::Trivial: return "trivial";
    case Decision::Backend::Linear: return "linear";
    case Decision::Backend::Search: return "search";
  }
  return "?";
}

Polarity classify(const EncodedPolicy& policy) {
  bool any_affine = false;
  bool any_anti = false;
  for (const EncodedPolicy::Entry& entry : policy.entries()) {
    for (const Block& block : entry.blocks) {
      any_affine = any_affine || !block.affine.empty();
      any_anti = any_anti || !block.anti_affine.empty();
    }
  }
  if (any_affine && any_anti) return Polarity::Full;
  if (any_affine) return Polarity::PosOnly;
  if (any_anti) return Polarity::NegOnly;
  return Polarity::PlainApp;
}

EncodedPolicy simplify(const EncodedPolicy& policy, const WorkerId& worker) {
  EncodedPolicy out;
  for (const EncodedPolicy::Entry& entry : policy.entries()) {
    std::vector<Block> kept;
    for (const Block& block : entry.blocks) {
      bool involves = block.workers.star;
      for (const WorkerId& candidate : block.workers.list) {
        involves = involves || candidate == worker;
      }
      if (!involves) continue;
      Block reduced = block;
      reduced.workers = WorkerSelection::of({worker});
      kept.push_back(std::move(reduced));
    }
    out.add(entry.tag, std::move(kept));
  }
  return out;
}

namespace {

void require_linear_fragment(const EncodedPolicy& policy) {
  Polarity polarity = classify(policy);
  if (polarity == Polarity::PosOnly || polarity == Polarity::Full) {
    throw Error(Errc::WrongFragment,
                std::string("the linear decider covers only plain and anti-affinity-only "
                            "policies; this one is ") +
                    std::string(to_string(polarity)));
  }
}

void require_worker(const Configuration& conf, const WorkerId& worker) {
  if (conf.find(worker) == conf.end()) {
    throw Error(Errc::UnknownWorker, "unknown worker '" + worker.str() + "'");
  }
}

const std::vector<Block>& blocks_for(const EncodedPolicy& policy, const Registry& registry,
                                     const FunctionId& function) {
  const TagId& tag = registry.tag_of(function);
  const std::vector<Block>* blocks = policy.find(tag);
  if (blocks == nullptr) {
    throw Error(Errc::UntaggedFunction,
                "function '" + function.str() + "' has tag '" + tag.str() +
                    "' with no policy entry");
  }
  return *blocks;
}

bool any_block_valid(const std::vector<Block>& blocks, const FunctionId& function,
                     const WorkerId& worker, const Configuration& conf,
                     const Registry& registry) {
  for (const Block& block : blocks) {
    if (valid(function, worker, conf, registry, block)) return true;
  }
  return false;
}

}  // namespace

bool reach_linear(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
                  const FunctionId& function, const WorkerId& worker) {
  require_linear_fragment(policy);
  require_worker(conf, worker);
  EncodedPolicy reduced = simplify(policy, worker);
  const Configuration empty = cleared(conf);
  return any_block_valid(blocks_for(reduced, registry, function), function, worker, empty,
                         registry);
}

bool cooccur_linear(const EncodedPolicy& policy, const Registry& registry,
                    const Configuration& conf, const FunctionId& f, const FunctionId& g,
                    const WorkerId& worker) {
  if (f == g) return reach_linear(policy, registry, conf, f, worker);
  require_linear_fragment(policy);
  require_worker(conf, worker);
  EncodedPolicy reduced = simplify(policy, worker);
  const Configuration empty = cleared(conf);
  const std::vector<Block>& f_blocks = blocks_for(reduced, registry, f);
  const std::vector<Block>& g_blocks = blocks_for(reduced, registry, g);

  auto order = [&](const FunctionId& first, const std::vector<Block>& first_blocks,
                   const FunctionId& second, const std::vector<Block>& second_blocks) {
    if (!any_block_valid(first_blocks, first, worker, empty, registry)) return false;
    Configuration loaded = apply_start(empty, first, worker, registry);
    return any_block_valid(second_blocks, second, worker, loaded, registry);
  };
  return order(f, f_blocks, g, g_blocks) || order(g, g_blocks, f, f_blocks);
}

namespace {

std::uint32_t allocated_count(const Configuration& conf, const WorkerId& worker,
                              const FunctionId& function) {
  auto it = conf.find(worker);
  return it == conf.end() ? 0 : it->second.count(function);
}

// Verdict from the linear decider, witness (when asked) from a follow-up
// search over the same goal. The search cannot flip the verdict; if it runs
// into the state bound the decision ships without a trace.
Decision finish_linear(bool answer, Polarity polarity, const EncodedPolicy& policy,
                       const Registry& registry, const Configuration& conf, GoalSpec goal,
                       const QueryOptions& options) {
  Decision decision;
  decision.polarity = polarity;
  decision.backend = Decision::Backend::Linear;
  decision.verdict = answer ? Verdict::Holds : Verdict::DoesNotHold;
  if (!answer || !options.want_witness) return decision;

  Decision searched = goal_search(policy, registry, conf, goal, options.search);
  decision.stats = searched.stats;
  if (searched.verdict == Verdict::Holds) {
    decision.witness = std::move(searched.witness);
  } else {
    decision.note = "witness search stopped at the state bound; the verdict is from the "
                    "linear decider";
  }
  return decision;
}

}  // namespace

Decision reach(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
               const FunctionId& function, const WorkerId& worker,
               const QueryOptions& options) {
  require_worker(conf, worker);
  const Polarity polarity = classify(policy);

  if (allocated_count(conf, worker, function) > 0) {
    Decision decision;
    decision.verdict = Verdict::Holds;
    decision.polarity = polarity;
    decision.backend = Decision::Backend::Trivial;
    decision.note = "'" + function.str() + "' is already allocated on '" + worker.str() + "'";
    return decision;
  }

  GoalSpec goal;
  goal.constraints.push_back(GoalConstraint{worker, function, 1});

  if (polarity == Polarity::PlainApp || polarity == Polarity::NegOnly) {
    const bool answer = reach_linear(policy, registry, conf, function, worker);
    return finish_linear(answer, polarity, policy, registry, conf, std::move(goal), options);
  }

  Decision decision = goal_search(policy, registry, conf, goal, options.search);
  decision.polarity = polarity;
  return decision;
}

Decision cooccur(const EncodedPolicy& policy, const Registry& registry, const Configuration& conf,
                 const FunctionId& f, const FunctionId& g, const WorkerId& worker,
                 const QueryOptions& options) {
  if (f == g) return reach(policy, registry, conf, f, worker, options);
  require_worker(conf, worker);
  const Polarity polarity = classify(policy);

  if (allocated_count(conf, worker, f) > 0 && allocated_count(conf, worker, g) > 0) {
    Decision decision;
    decision.verdict = Verdict::Holds;
    decision.polarity = polarity;
    decision.backend = Decision::Backend::Trivial;
    decision.note = "both functions are already allocated on '" + worker.str() + "'";
    return decision;
  }

  GoalSpec goal;
  goal.constraints.push_back(GoalConstraint{worker, f, 1});
  goal.constraints.push_back(GoalConstraint{worker, g, 1});

  if (polarity == Polarity::PlainApp || polarity == Polarity::NegOnly) {
    const bool answer = cooccur_linear(policy, registry, conf, f, g, worker);
    return finish_linear(answer, polarity, policy, registry, conf, std::move(goal), options);
  }

  Decision decision = goal_search(policy, registry, conf, goal, options.search);
  decision.polarity = polarity;
  return decision;
}

}  // namespace aapp
