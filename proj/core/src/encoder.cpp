#include "aapp/encoder.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace aapp {

namespace {

std::vector<WorkerId> dedup(const std::vector<WorkerId>& workers) {
  std::vector<WorkerId> out;
  for (const WorkerId& worker : workers) {
    if (std::find(out.begin(), out.end(), worker) == out.end()) out.push_back(worker);
  }
  return out;
}

void push_unique(std::vector<TagId>& tags, const TagId& tag) {
  if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
}

Block encode_block(const RawBlock& raw) {
  Block block;
  block.workers = raw.workers.star ? WorkerSelection::all()
                                   : WorkerSelection::of(dedup(raw.workers.list));
  block.strategy = raw.strategy.value_or(Strategy::Any);
  block.invalidate =
      raw.invalidate.value_or(std::vector<InvalidateOpt>{InvalidateOpt::capacity_used(100)});
  if (raw.affinity) {
    for (const AffinityOpt& option : *raw.affinity) {
      push_unique(option.anti ? block.anti_affine : block.affine, option.tag);
    }
  }
  return block;
}

Block default_block() {
  Block block;
  block.workers = WorkerSelection::all();
  block.strategy = Strategy::Any;
  block.invalidate = {InvalidateOpt::capacity_used(100)};
  return block;
}

}  // namespace

EncodedPolicy encode(const ScriptAst& ast, std::vector<Diagnostic>* warnings) {
  const TagRule* default_rule = nullptr;
  for (const TagRule& rule : ast.rules) {
    if (rule.tag == default_tag()) default_rule = &rule;
  }

  std::vector<Block> default_blocks;
  if (default_rule != nullptr) {
    for (const RawBlock& raw : default_rule->blocks) {
      default_blocks.push_back(encode_block(raw));
    }
    if (default_rule->followup == FollowupOpt::Default && warnings != nullptr) {
      warnings->push_back(Diagnostic{
          Diagnostic::Severity::Warning, Diagnostic::Code::DefaultFollowupLoop,
          "tag 'default' cannot follow up to itself; treated as 'followup: fail'"});
    }
  } else {
    default_blocks = {default_block()};
  }

  EncodedPolicy policy;
  for (const TagRule& rule : ast.rules) {
    std::vector<Block> blocks;
    for (const RawBlock& raw : rule.blocks) {
      blocks.push_back(encode_block(raw));
    }
    if (rule.tag != default_tag() && rule.followup != FollowupOpt::Fail) {
      blocks.insert(blocks.end(), default_blocks.begin(), default_blocks.end());
    }
    policy.add(rule.tag, std::move(blocks));
  }
  if (default_rule == nullptr) {
    policy.add(default_tag(), default_blocks);
  }
  return policy;
}

std::vector<Diagnostic> validate(const EncodedPolicy& policy, const Registry& registry,
                                 const Configuration& conf) {
  std::vector<Diagnostic> out;
  auto emit = [&out](Diagnostic::Severity severity, Diagnostic::Code code, std::string message) {
    out.push_back(Diagnostic{severity, code, std::move(message)});
  };

  std::set<TagId> known_tags;
  for (const auto& [function, info] : registry) {
    known_tags.insert(info.tag);
  }

  for (const EncodedPolicy::Entry& entry : policy.entries()) {
    for (std::size_t i = 0; i < entry.blocks.size(); ++i) {
      const Block& block = entry.blocks[i];
      const std::string where =
          "block " + std::to_string(i + 1) + " of tag '" + entry.tag.str() + "'";
      for (const WorkerId& worker : block.workers.list) {
        if (conf.find(worker) == conf.end()) {
          emit(Diagnostic::Severity::Error, Diagnostic::Code::UnknownWorkerInBlock,
               where + " names unknown worker '" + worker.str() + "'");
        }
      }
      for (const TagId& tag : block.affine) {
        if (known_tags.count(tag) == 0) {
          emit(Diagnostic::Severity::Warning, Diagnostic::Code::UnknownAffinityTag,
               where + " requires affinity with tag '" + tag.str() +
                   "' which no function carries");
        }
      }
      for (const TagId& tag : block.anti_affine) {
        if (known_tags.count(tag) == 0) {
          emit(Diagnostic::Severity::Warning, Diagnostic::Code::UnknownAffinityTag,
               where + " requires anti-affinity with tag '" + tag.str() +
                   "' which no function carries");
        }
      }
      for (const TagId& tag : block.affine) {
        if (std::find(block.anti_affine.begin(), block.anti_affine.end(), tag) !=
            block.anti_affine.end()) {
          emit(Diagnostic::Severity::Warning, Diagnostic::Code::UnsatisfiableBlock,
               where + " lists tag '" + tag.str() + "' as both affine and anti-affine");
        }
      }
    }
  }

  for (const auto& [function, info] : registry) {
    if (!policy.contains(info.tag)) {
      emit(Diagnostic::Severity::Error, Diagnostic::Code::UntaggedFunction,
           "function '" + function.str() + "' has tag '" + info.tag.str() +
               "' with no policy entry");
    }
    bool fits = false;
    for (const auto& [worker, state] : conf) {
      fits = fits || info.occupancy <= state.max;
    }
    if (!fits && !conf.empty()) {
      emit(Diagnostic::Severity::Warning, Diagnostic::Code::FunctionFitsNowhere,
           "function '" + function.str() + "' needs " + std::to_string(info.occupancy) +
               " units but no worker is that large");
    }
  }
  return out;
}

std::string to_string(const Diagnostic& diagnostic) {
  std::string text =
      diagnostic.severity == Diagnostic::Severity::Error ? "error: " : "warning: ";
  return text + diagnostic.message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

}  // namespace aapp
