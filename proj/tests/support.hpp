#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "aapp/analysis.hpp"
#include "aapp/encoder.hpp"
#include "aapp/parser.hpp"
#include "aapp/semantics.hpp"

// Helpers shared by the unit suites and the acceptance runner. Everything is
// deterministic given the caller's RNG so failures reproduce.

namespace testutil {

inline aapp::EncodedPolicy policy_of(std::string_view script) {
  return aapp::encode(aapp::parse_script(script));
}

template <typename Fn>
std::optional<aapp::Errc> thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const aapp::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Whitespace- and parenthesis-level token stream of an s-expression text,
// for structural comparisons that ignore layout.
inline std::vector<std::string> sexpr_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == '(' || c == ')') {
      if (!current.empty()) {
        out.push_back(current);
        current.clear();
      }
      out.push_back(std::string(1, c));
    } else if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!current.empty()) {
        out.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

enum class Fragment { PlainApp, NegOnly, PosOnly, Full };

struct RandomInstance {
  aapp::ScriptAst ast;
  aapp::EncodedPolicy policy;
  aapp::Registry registry;
  aapp::Configuration conf;
  std::vector<aapp::WorkerId> workers;
  std::vector<aapp::FunctionId> functions;
  std::vector<aapp::TagId> tags;
};

// Small scheduling instances drawn inside fixed bounds: at most 3 workers
// (capacity 1..8), 4 functions (occupancy 1..4), 3 tags, 3 blocks per tag.
// The affinity shape follows `fragment`; about half of the instances carry a
// random legal preload.
inline RandomInstance random_instance(std::mt19937_64& rng, Fragment fragment) {
  auto pick = [&rng](std::uint64_t lo, std::uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
  };

  RandomInstance inst;
  const std::size_t n_workers = pick(1, 3);
  const std::size_t n_functions = pick(1, 4);
  const std::size_t n_tags = pick(1, 3);

  for (std::size_t i = 0; i < n_workers; ++i) {
    aapp::WorkerId w{"w" + std::to_string(i)};
    inst.workers.push_back(w);
    inst.conf[w] = aapp::WorkerState{{}, 0, pick(1, 8)};
  }
  for (std::size_t i = 0; i < n_tags; ++i) {
    inst.tags.push_back(aapp::TagId{"t" + std::to_string(i)});
  }
  for (std::size_t i = 0; i < n_functions; ++i) {
    aapp::FunctionId f{"f" + std::to_string(i)};
    inst.functions.push_back(f);
    inst.registry.add(f, pick(1, 4), inst.tags[pick(0, n_tags - 1)]);
  }

  auto random_workers = [&]() {
    if (pick(0, 3) == 0) return aapp::WorkerSelection::all();
    std::vector<aapp::WorkerId> subset = inst.workers;
    for (std::size_t i = subset.size(); i > 1; --i) {
      std::swap(subset[i - 1], subset[pick(0, i - 1)]);
    }
    subset.resize(pick(1, subset.size()));
    return aapp::WorkerSelection::of(std::move(subset));
  };
  auto random_affinity = [&]() -> std::optional<std::vector<aapp::AffinityOpt>> {
    if (fragment == Fragment::PlainApp || pick(0, 1) == 0) return std::nullopt;
    std::vector<aapp::AffinityOpt> options;
    const std::size_t count = pick(1, 2);
    for (std::size_t i = 0; i < count; ++i) {
      bool anti = fragment == Fragment::NegOnly ||
                  (fragment == Fragment::Full && pick(0, 1) == 0);
      if (fragment == Fragment::PosOnly) anti = false;
      options.push_back({inst.tags[pick(0, n_tags - 1)], anti});
    }
    return options;
  };
  auto random_block = [&]() {
    aapp::RawBlock block;
    block.workers = random_workers();
    switch (pick(0, 3)) {
      case 0: break;
      case 1: block.strategy = aapp::Strategy::Any; break;
      default: block.strategy = aapp::Strategy::BestFirst; break;
    }
    if (pick(0, 9) >= 3) {
      std::vector<aapp::InvalidateOpt> options;
      if (pick(0, 1) == 0) {
        options.push_back(aapp::InvalidateOpt::capacity_used(pick(1, 10) * 10));
      }
      if (options.empty() || pick(0, 1) == 0) {
        options.push_back(aapp::InvalidateOpt::max_concurrent(pick(1, 4)));
      }
      block.invalidate = std::move(options);
    }
    block.affinity = random_affinity();
    return block;
  };

  for (const aapp::TagId& tag : inst.tags) {
    aapp::TagRule rule;
    rule.tag = tag;
    const std::size_t n_blocks = pick(1, 3);
    for (std::size_t i = 0; i < n_blocks; ++i) rule.blocks.push_back(random_block());
    switch (pick(0, 5)) {
      case 0: break;
      case 1:
      case 2: rule.followup = aapp::FollowupOpt::Default; break;
      default: rule.followup = aapp::FollowupOpt::Fail; break;
    }
    inst.ast.rules.push_back(std::move(rule));
  }
  inst.policy = aapp::encode(inst.ast);

  if (pick(0, 1) == 0) {
    const std::size_t placements = pick(1, 3);
    for (std::size_t i = 0; i < placements; ++i) {
      const aapp::FunctionId& f = inst.functions[pick(0, n_functions - 1)];
      const aapp::WorkerId& w = inst.workers[pick(0, n_workers - 1)];
      try {
        inst.conf = aapp::apply_start(inst.conf, f, w, inst.registry);
      } catch (const aapp::Error&) {
      }
    }
  }
  return inst;
}

// A (worker, function) query pair whose function is absent from the worker,
// as the linear deciders require. Falls back to clearing the preload when
// every pair is occupied.
inline std::pair<aapp::WorkerId, aapp::FunctionId> pick_absent_query(
    std::mt19937_64& rng, RandomInstance& inst) {
  auto pick = [&rng](std::size_t bound) { return rng() % bound; };
  for (int attempt = 0; attempt < 16; ++attempt) {
    const aapp::WorkerId& w = inst.workers[pick(inst.workers.size())];
    const aapp::FunctionId& f = inst.functions[pick(inst.functions.size())];
    if (inst.conf.at(w).count(f) == 0) return {w, f};
  }
  inst.conf = aapp::cleared(inst.conf);
  return {inst.workers[pick(inst.workers.size())],
          inst.functions[pick(inst.functions.size())]};
}

}  // namespace testutil
