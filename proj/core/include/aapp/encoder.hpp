#pragma once

#include <string>
#include <vector>

#include "aapp/ast.hpp"
#include "aapp/model.hpp"

// Turns a surface script into an executable policy: fills in omitted options,
// synthesizes the default tag, unfolds followups and splits affinity options
// into affine / anti-affine lists. validate() cross-checks a policy against a
// platform and reports findings as data instead of failing.

namespace aapp {

struct Diagnostic {
  enum class Severity { Error, Warning };
  enum class Code {
    UnknownWorkerInBlock,
    UntaggedFunction,
    UnknownAffinityTag,
    UnsatisfiableBlock,
    FunctionFitsNowhere,
    DefaultFollowupLoop,
  };

  Severity severity = Severity::Warning;
  Code code = Code::UnknownAffinityTag;
  std::string message;
};

std::string to_string(const Diagnostic& diagnostic);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

// Encoding rules:
//  - a missing `default` tag becomes `default: workers * / capacity_used 100%`
//  - the default tag's followup is forced to fail (loops are impossible);
//    an explicit `followup: default` there is rewritten with a warning
//  - missing strategy -> any; missing invalidate -> capacity_used 100%
//  - followup default (explicit or omitted) appends the default tag's encoded
//    blocks; followup fail appends nothing
//  - affinity options split into affine (`t`) and anti-affine (`!t`) lists,
//    order preserved, duplicates dropped
EncodedPolicy encode(const ScriptAst& ast, std::vector<Diagnostic>* warnings = nullptr);

std::vector<Diagnostic> validate(const EncodedPolicy& policy, const Registry& registry,
                                 const Configuration& conf);

// Fully explicit script text for an encoded policy; re-parsing and
// re-encoding the output is a fixed point.
std::string print_policy(const EncodedPolicy& policy);

}  // namespace aapp
