#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aapp/errors.hpp"

// Minimal indentation-based reader for the YAML subset the policy scripts and
// platform configs use: block mappings, block sequences, bare and
// double-quoted scalars, `#` comments. Deliberately not a general YAML
// parser; the policy surface syntax allows a bare `*`, which standard YAML
// does not. Every node remembers its source line for diagnostics.

namespace aapp::yaml {

struct Node {
  enum class Kind { Scalar, Sequence, Mapping };

  struct KeyValue;

  Kind kind = Kind::Scalar;
  int line = 0;

  std::string scalar;    // Scalar only
  bool quoted = false;   // scalar was written "..."

  std::vector<Node> items;        // Sequence only
  std::vector<KeyValue> entries;  // Mapping only

  bool is_scalar() const noexcept { return kind == Kind::Scalar; }
  bool is_sequence() const noexcept { return kind == Kind::Sequence; }
  bool is_mapping() const noexcept { return kind == Kind::Mapping; }

  // First value for `key`, or nullptr.
  const Node* get(std::string_view key) const noexcept;
};

struct Node::KeyValue {
  std::string key;
  int key_line = 0;
  Node value;
};

// Throws Error(Errc::Syntax, line) on malformed input.
Node parse(std::string_view text);

}  // namespace aapp::yaml
