#include <sstream>

#include "aapp/encoder.hpp"
#include "aapp/parser.hpp"

namespace aapp {

namespace {

std::string invalidate_text(const InvalidateOpt& option) {
  switch (option.kind) {
    case InvalidateOpt::Kind::CapacityUsed:
      return "capacity_used " + std::to_string(option.value) + "%";
    case InvalidateOpt::Kind::MaxConcurrent:
      return "max_concurrent_invocations " + std::to_string(option.value);
  }
  return {};
}

void print_workers(std::ostream& os, const WorkerSelection& workers) {
  if (workers.star) {
    os << "  - workers: *\n";
    return;
  }
  os << "  - workers:\n";
  for (const WorkerId& worker : workers.list) {
    os << "      - " << worker << "\n";
  }
}

void print_raw_block(std::ostream& os, const RawBlock& block) {
  print_workers(os, block.workers);
  if (block.strategy) {
    os << "    strategy: " << (*block.strategy == Strategy::Any ? "any" : "best_first") << "\n";
  }
  if (block.invalidate) {
    os << "    invalidate:\n";
    for (const InvalidateOpt& option : *block.invalidate) {
      os << "      - " << invalidate_text(option) << "\n";
    }
  }
  if (block.affinity) {
    os << "    affinity:\n";
    for (const AffinityOpt& option : *block.affinity) {
      os << "      - " << (option.anti ? "!" : "") << option.tag << "\n";
    }
  }
}

void print_encoded_block(std::ostream& os, const Block& block) {
  print_workers(os, block.workers);
  os << "    strategy: " << (block.strategy == Strategy::Any ? "any" : "best_first") << "\n";
  os << "    invalidate:\n";
  for (const InvalidateOpt& option : block.invalidate) {
    os << "      - " << invalidate_text(option) << "\n";
  }
  if (!block.affine.empty() || !block.anti_affine.empty()) {
    os << "    affinity:\n";
    for (const TagId& tag : block.affine) os << "      - " << tag << "\n";
    for (const TagId& tag : block.anti_affine) os << "      - !" << tag << "\n";
  }
}

}  // namespace

std::string print_script(const ScriptAst& ast) {
  std::ostringstream os;
  for (const TagRule& rule : ast.rules) {
    os << "- " << rule.tag << ":\n";
    for (const RawBlock& block : rule.blocks) {
      print_raw_block(os, block);
    }
    if (rule.followup) {
      os << "  followup: " << (*rule.followup == FollowupOpt::Default ? "default" : "fail")
         << "\n";
    }
  }
  return os.str();
}

std::string print_policy(const EncodedPolicy& policy) {
  std::ostringstream os;
  for (const EncodedPolicy::Entry& entry : policy.entries()) {
    os << "- " << entry.tag << ":\n";
    for (const Block& block : entry.blocks) {
      print_encoded_block(os, block);
    }
    os << "  followup: fail\n";
  }
  return os.str();
}

}  // namespace aapp
