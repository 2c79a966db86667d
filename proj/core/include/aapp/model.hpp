#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "aapp/errors.hpp"

// Core value types of the scheduling model: identifiers, the function
// registry, worker configurations, policy blocks, transition labels and goal
// specifications. Everything here has value semantics; operations return new
// configurations and never mutate their inputs.

namespace aapp {

// Names of workers, functions and tags: [A-Za-z_][A-Za-z0-9_-]*
class Identifier {
 public:
  Identifier() = default;  // empty placeholder, only for container plumbing
  explicit Identifier(std::string text);

  static bool is_valid(std::string_view text) noexcept;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;

 private:
  std::string text_;
};

std::ostream& operator<<(std::ostream& os, const Identifier& id);

using WorkerId = Identifier;
using FunctionId = Identifier;
using TagId = Identifier;

struct FunctionInfo {
  std::uint64_t occupancy = 0;  // resource units one instance consumes, >= 1
  TagId tag;

  bool operator==(const FunctionInfo&) const = default;
};

// Maps every function to its occupancy and tag. Occupancy zero is rejected so
// the reachable state space stays finite.
class Registry {
 public:
  void add(const FunctionId& function, std::uint64_t occupancy, const TagId& tag);

  const FunctionInfo& info(const FunctionId& function) const;  // throws UnknownFunction
  const FunctionInfo* find(const FunctionId& function) const noexcept;
  bool contains(const FunctionId& function) const noexcept;

  std::uint64_t occupancy(const FunctionId& function) const { return info(function).occupancy; }
  const TagId& tag_of(const FunctionId& function) const { return info(function).tag; }

  auto begin() const noexcept { return functions_.begin(); }
  auto end() const noexcept { return functions_.end(); }
  std::size_t size() const noexcept { return functions_.size(); }
  bool empty() const noexcept { return functions_.empty(); }

  bool operator==(const Registry&) const = default;

 private:
  std::map<FunctionId, FunctionInfo> functions_;
};

// One worker's snapshot: the allocated multiset (as per-function counts), the
// resource units in use and the capacity.
struct WorkerState {
  std::map<FunctionId, std::uint32_t> allocated;  // counts are all >= 1
  std::uint64_t used = 0;
  std::uint64_t max = 0;

  std::uint64_t instances() const noexcept;  // total allocated instances
  std::uint32_t count(const FunctionId& function) const noexcept;

  bool operator==(const WorkerState&) const = default;
};

using Configuration = std::map<WorkerId, WorkerState>;

// Allocate one instance of `function` on `worker`.
Configuration apply_start(const Configuration& conf, const FunctionId& function,
                          const WorkerId& worker, const Registry& registry);

// Deallocate one instance of `function` from `worker`.
Configuration apply_done(const Configuration& conf, const FunctionId& function,
                         const WorkerId& worker, const Registry& registry);

// Same workers and capacities, no allocations.
Configuration cleared(const Configuration& conf);

// Order-independent snapshot of the mutable part of a configuration: sorted
// (worker, function, count) triples with count > 0. Capacities and used
// values are recomputable from the triples given the worker set and registry.
struct CanonicalState {
  std::vector<std::tuple<WorkerId, FunctionId, std::uint32_t>> triples;

  friend auto operator<=>(const CanonicalState&, const CanonicalState&) = default;
};

CanonicalState canonicalize(const Configuration& conf);

enum class Strategy { Any, BestFirst };

// Per-block worker exclusion conditions.
struct InvalidateOpt {
  enum class Kind { CapacityUsed, MaxConcurrent };

  Kind kind = Kind::CapacityUsed;
  std::uint64_t value = 0;  // percent (0..100) or instance bound

  static InvalidateOpt capacity_used(std::uint64_t percent);  // throws PercentOutOfRange
  static InvalidateOpt max_concurrent(std::uint64_t bound);

  bool operator==(const InvalidateOpt&) const = default;
};

// Either the universal selector `*` or an explicit ordered worker list.
struct WorkerSelection {
  bool star = false;
  std::vector<WorkerId> list;  // empty iff star

  static WorkerSelection all();
  static WorkerSelection of(std::vector<WorkerId> workers);

  bool operator==(const WorkerSelection&) const = default;
};

// One priority level of an encoded policy. Lists are duplicate-free.
struct Block {
  WorkerSelection workers;
  Strategy strategy = Strategy::Any;
  std::vector<InvalidateOpt> invalidate;
  std::vector<TagId> affine;
  std::vector<TagId> anti_affine;

  bool operator==(const Block&) const = default;
};

// Tag -> ordered block list, in declaration order. After encoding this always
// contains the `default` tag and every block list is non-empty; intermediate
// values (e.g. the output of simplify) may hold empty lists.
class EncodedPolicy {
 public:
  struct Entry {
    TagId tag;
    std::vector<Block> blocks;

    bool operator==(const Entry&) const = default;
  };

  void add(const TagId& tag, std::vector<Block> blocks);  // throws DuplicateTag
  const std::vector<Block>* find(const TagId& tag) const noexcept;
  bool contains(const TagId& tag) const noexcept { return find(tag) != nullptr; }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  bool operator==(const EncodedPolicy&) const = default;

 private:
  std::vector<Entry> entries_;
};

inline const TagId& default_tag() {
  static const TagId tag{"default"};
  return tag;
}

// LTS transition labels.
struct Label {
  enum class Kind { Start, Done, Fail };

  Kind kind = Kind::Fail;
  FunctionId function;
  std::optional<WorkerId> worker;  // absent for Fail

  static Label start(FunctionId function, WorkerId worker);
  static Label done(FunctionId function, WorkerId worker);
  static Label fail(FunctionId function);

  bool operator==(const Label&) const = default;
};

using Trace = std::vector<Label>;

enum class GoalMode { AtLeast, Exact };

struct GoalConstraint {
  WorkerId worker;
  FunctionId function;
  std::uint64_t count = 1;

  bool operator==(const GoalConstraint&) const = default;
};

// Target allocation counts, one entry per (worker, function) pair.
struct GoalSpec {
  std::vector<GoalConstraint> constraints;
  GoalMode mode = GoalMode::AtLeast;

  bool operator==(const GoalSpec&) const = default;
};

}  // namespace aapp

template <>
struct std::hash<aapp::Identifier> {
  std::size_t operator()(const aapp::Identifier& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

template <>
struct std::hash<aapp::CanonicalState> {
  std::size_t operator()(const aapp::CanonicalState& state) const noexcept;
};
