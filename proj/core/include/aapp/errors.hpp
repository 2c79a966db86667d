#pragma once

#include <stdexcept>
#include <string>

namespace aapp {

// Every failure the library reports, from lexing to replay. Parser errors
// carry the 1-based input line; everything else leaves it at 0.
enum class Errc {
  // identifiers and registry construction
  InvalidIdentifier,
  ZeroOccupancy,
  // script / config / goal parsing
  Syntax,
  DuplicateTag,
  UnknownOption,
  EmptyBlockList,
  PercentOutOfRange,
  DuplicateName,
  ZeroMemory,
  InitialOverCapacity,
  UnknownName,
  InvalidGoal,
  InvalidTrace,
  // model and semantics
  UnknownWorker,
  UnknownFunction,
  UntaggedFunction,
  CapacityExceeded,
  FunctionNotAllocated,
  IllegalTransition,
  // analysis and emission
  WrongFragment,
  ValidationFailed,
  IoError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        code_(code),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  int line() const noexcept { return line_; }

 private:
  Errc code_;
  int line_;
};

}  // namespace aapp
