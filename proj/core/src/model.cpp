#include "aapp/model.hpp"

#include <utility>

namespace aapp {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidIdentifier: return "InvalidIdentifier";
    case Errc::ZeroOccupancy: return "ZeroOccupancy";
    case Errc::Syntax: return "Syntax";
    case Errc::DuplicateTag: return "DuplicateTag";
    case Errc::UnknownOption: return "UnknownOption";
    case Errc::EmptyBlockList: return "EmptyBlockList";
    case Errc::PercentOutOfRange: return "PercentOutOfRange";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::ZeroMemory: return "ZeroMemory";
    case Errc::InitialOverCapacity: return "InitialOverCapacity";
    case Errc::UnknownName: return "UnknownName";
    case Errc::InvalidGoal: return "InvalidGoal";
    case Errc::InvalidTrace: return "InvalidTrace";
    case Errc::UnknownWorker: return "UnknownWorker";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::UntaggedFunction: return "UntaggedFunction";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::FunctionNotAllocated: return "FunctionNotAllocated";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::WrongFragment: return "WrongFragment";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

bool identifier_head(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool identifier_tail(char c) {
  return identifier_head(c) || (c >= '0' && c <= '9') || c == '-';
}

}  // namespace

Identifier::Identifier(std::string text) : text_(std::move(text)) {
  if (!is_valid(text_)) {
    throw Error(Errc::InvalidIdentifier, "invalid identifier '" + text_ + "'");
  }
}

bool Identifier::is_valid(std::string_view text) noexcept {
  if (text.empty() || !identifier_head(text.front())) return false;
  for (char c : text.substr(1)) {
    if (!identifier_tail(c)) return false;
  }
  return true;
}

std::ostream& operator<<(std::ostream& os, const Identifier& id) { return os << id.str(); }

void Registry::add(const FunctionId& function, std::uint64_t occupancy, const TagId& tag) {
  if (occupancy == 0) {
    throw Error(Errc::ZeroOccupancy, "function '" + function.str() + "' has zero occupancy");
  }
  auto [it, inserted] = functions_.emplace(function, FunctionInfo{occupancy, tag});
  if (!inserted) {
    throw Error(Errc::DuplicateName, "function '" + function.str() + "' registered twice");
  }
}

const FunctionInfo& Registry::info(const FunctionId& function) const {
  auto it = functions_.find(function);
  if (it == functions_.end()) {
    throw Error(Errc::UnknownFunction, "unknown function '" + function.str() + "'");
  }
  return it->second;
}

const FunctionInfo* Registry::find(const FunctionId& function) const noexcept {
  auto it = functions_.find(function);
  return it == functions_.end() ? nullptr : &it->second;
}

bool Registry::contains(const FunctionId& function) const noexcept {
  return functions_.count(function) != 0;
}

std::uint64_t WorkerState::instances() const noexcept {
  std::uint64_t total = 0;
  for (const auto& [function, count] : allocated) total += count;
  return total;
}

std::uint32_t WorkerState::count(const FunctionId& function) const noexcept {
  auto it = allocated.find(function);
  return it == allocated.end() ? 0 : it->second;
}

Configuration apply_start(const Configuration& conf, const FunctionId& function,
                          const WorkerId& worker, const Registry& registry) {
  auto it = conf.find(worker);
  if (it == conf.end()) {
    throw Error(Errc::UnknownWorker, "unknown worker '" + worker.str() + "'");
  }
  const std::uint64_t occ = registry.occupancy(function);
  const WorkerState& state = it->second;
  if (state.used + occ > state.max) {
    throw Error(Errc::CapacityExceeded,
                "allocating '" + function.str() + "' on '" + worker.str() + "' needs " +
                    std::to_string(state.used + occ) + " of " + std::to_string(state.max) +
                    " units");
  }
  Configuration next = conf;
  WorkerState& target = next[worker];
  target.allocated[function] += 1;
  target.used += occ;
  return next;
}

Configuration apply_done(const Configuration& conf, const FunctionId& function,
                         const WorkerId& worker, const Registry& registry) {
  auto it = conf.find(worker);
  if (it == conf.end()) {
    throw Error(Errc::UnknownWorker, "unknown worker '" + worker.str() + "'");
  }
  if (it->second.count(function) == 0) {
    throw Error(Errc::FunctionNotAllocated,
                "function '" + function.str() + "' not allocated on '" + worker.str() + "'");
  }
  Configuration next = conf;
  WorkerState& target = next[worker];
  auto alloc = target.allocated.find(function);
  if (--alloc->second == 0) target.allocated.erase(alloc);
  target.used -= registry.occupancy(function);
  return next;
}

Configuration cleared(const Configuration& conf) {
  Configuration next;
  for (const auto& [worker, state] : conf) {
    next.emplace(worker, WorkerState{{}, 0, state.max});
  }
  return next;
}

CanonicalState canonicalize(const Configuration& conf) {
  CanonicalState canonical;
  for (const auto& [worker, state] : conf) {
    for (const auto& [function, count] : state.allocated) {
      if (count > 0) canonical.triples.emplace_back(worker, function, count);
    }
  }
  // Configuration maps are already key-sorted, so the triples come out in
  // (worker, function) order without an extra sort.
  return canonical;
}

InvalidateOpt InvalidateOpt::capacity_used(std::uint64_t percent) {
  if (percent > 100) {
    throw Error(Errc::PercentOutOfRange,
                "capacity_used " + std::to_string(percent) + "% is out of range");
  }
  return InvalidateOpt{Kind::CapacityUsed, percent};
}

InvalidateOpt InvalidateOpt::max_concurrent(std::uint64_t bound) {
  return InvalidateOpt{Kind::MaxConcurrent, bound};
}

WorkerSelection WorkerSelection::all() { return WorkerSelection{true, {}}; }

WorkerSelection WorkerSelection::of(std::vector<WorkerId> workers) {
  return WorkerSelection{false, std::move(workers)};
}

void EncodedPolicy::add(const TagId& tag, std::vector<Block> blocks) {
  if (contains(tag)) {
    throw Error(Errc::DuplicateTag, "tag '" + tag.str() + "' defined twice");
  }
  entries_.push_back(Entry{tag, std::move(blocks)});
}

const std::vector<Block>* EncodedPolicy::find(const TagId& tag) const noexcept {
  for (const Entry& entry : entries_) {
    if (entry.tag == tag) return &entry.blocks;
  }
  return nullptr;
}

Label Label::start(FunctionId function, WorkerId worker) {
  return Label{Kind::Start, std::move(function), std::move(worker)};
}

Label Label::done(FunctionId function, WorkerId worker) {
  return Label{Kind::Done, std::move(function), std::move(worker)};
}

Label Label::fail(FunctionId function) {
  return Label{Kind::Fail, std::move(function), std::nullopt};
}

}  // namespace aapp

std::size_t std::hash<aapp::CanonicalState>::operator()(
    const aapp::CanonicalState& state) const noexcept {
  // FNV-1a over the triple contents.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& [worker, function, count] : state.triples) {
    mix(worker.str().data(), worker.str().size());
    mix("\x01", 1);
    mix(function.str().data(), function.str().size());
    mix(&count, sizeof(count));
  }
  return static_cast<std::size_t>(h);
}
