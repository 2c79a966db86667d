#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aapp/model.hpp"

// Surface-syntax trees produced by the parsers, before encoding. These keep
// exactly what the script said: omitted options stay absent instead of being
// defaulted, so pretty-printing reproduces the input shape.

namespace aapp {

enum class FollowupOpt { Default, Fail };

struct AffinityOpt {
  TagId tag;
  bool anti = false;  // written with a leading '!'

  bool operator==(const AffinityOpt&) const = default;
};

struct RawBlock {
  WorkerSelection workers;
  std::optional<Strategy> strategy;
  std::optional<std::vector<InvalidateOpt>> invalidate;
  std::optional<std::vector<AffinityOpt>> affinity;
  int line = 0;  // ignored by equality

  bool operator==(const RawBlock& other) const {
    return workers == other.workers && strategy == other.strategy &&
           invalidate == other.invalidate && affinity == other.affinity;
  }
};

struct TagRule {
  TagId tag;
  std::vector<RawBlock> blocks;
  std::optional<FollowupOpt> followup;
  int line = 0;  // ignored by equality

  bool operator==(const TagRule& other) const {
    return tag == other.tag && blocks == other.blocks && followup == other.followup;
  }
};

struct ScriptAst {
  std::vector<TagRule> rules;

  bool operator==(const ScriptAst&) const = default;
};

// Parsed platform description: worker capacities, function occupancies and
// tags, optional initial allocations.
struct PlatformSpec {
  struct WorkerDecl {
    WorkerId name;
    std::uint64_t max_memory = 0;

    bool operator==(const WorkerDecl&) const = default;
  };
  struct FunctionDecl {
    FunctionId name;
    std::uint64_t memory = 0;
    TagId tag;

    bool operator==(const FunctionDecl&) const = default;
  };
  struct InitialDecl {
    WorkerId worker;
    FunctionId function;
    std::uint64_t count = 0;

    bool operator==(const InitialDecl&) const = default;
  };

  std::vector<WorkerDecl> workers;
  std::vector<FunctionDecl> functions;
  std::vector<InitialDecl> initial;

  Registry registry() const;
  Configuration configuration() const;  // workers with initial allocations applied

  bool operator==(const PlatformSpec&) const = default;
};

}  // namespace aapp
