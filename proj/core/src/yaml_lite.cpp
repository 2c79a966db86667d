#include "aapp/yaml_lite.hpp"

#include <cstddef>
#include <utility>

namespace aapp::yaml {

namespace {

struct Line {
  int indent = 0;
  std::string content;
  int number = 0;
};

[[noreturn]] void fail(int line, const std::string& message) {
  throw Error(Errc::Syntax, message, line);
}

bool is_space(char c) { return c == ' ' || c == '\t'; }

// Drops the comment part of a physical line. A `#` starts a comment when it
// is not inside a double-quoted scalar and is either the first character or
// preceded by whitespace.
std::string strip_comment(std::string_view raw, int number) {
  std::string out;
  bool in_quotes = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_quotes) {
      if (c == '\\' && i + 1 < raw.size()) {
        out += c;
        out += raw[++i];
        continue;
      }
      if (c == '"') in_quotes = false;
      out += c;
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      out += c;
      continue;
    }
    if (c == '#' && (i == 0 || is_space(raw[i - 1]))) break;
    out += c;
  }
  if (in_quotes) fail(number, "unterminated string");
  while (!out.empty() && is_space(out.back())) out.pop_back();
  return out;
}

std::string unescape(std::string_view body, int number) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == body.size()) fail(number, "dangling escape in string");
    switch (body[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: fail(number, std::string("unsupported escape '\\") + body[i] + "'");
    }
  }
  return out;
}

Node make_scalar(std::string_view text, int number) {
  Node node;
  node.kind = Node::Kind::Scalar;
  node.line = number;
  if (!text.empty() && text.front() == '"') {
    auto close = std::string_view::npos;
    for (std::size_t i = 1; i < text.size(); ++i) {
      if (text[i] == '\\') {
        ++i;
        continue;
      }
      if (text[i] == '"') {
        close = i;
        break;
      }
    }
    if (close == std::string_view::npos) fail(number, "unterminated string");
    for (std::size_t i = close + 1; i < text.size(); ++i) {
      if (!is_space(text[i])) fail(number, "unexpected text after closing quote");
    }
    node.scalar = unescape(text.substr(1, close - 1), number);
    node.quoted = true;
  } else {
    node.scalar = std::string(text);
  }
  return node;
}

// Position of the colon that splits `key: value` (or trailing `key:`), or
// npos when the line is a plain scalar. Quotes shield a colon.
std::size_t key_colon(std::string_view content) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '\\') ++i;
      else if (c == '"') in_quotes = false;
      continue;
    }
    if (c == '"') in_quotes = true;
    if (c == ':' && (i + 1 == content.size() || is_space(content[i + 1]))) return i;
  }
  return std::string_view::npos;
}

bool is_sequence_item(std::string_view content) {
  return content == "-" || content.substr(0, 2) == "- ";
}

class Parser {
 public:
  explicit Parser(std::string_view text) { split(text); }

  Node run() {
    if (lines_.empty()) {
      Node empty;
      empty.line = 1;
      return empty;
    }
    Node root = parse_node(lines_.front().indent);
    if (pos_ < lines_.size()) fail(lines_[pos_].number, "unexpected indentation");
    return root;
  }

 private:
  void split(std::string_view text) {
    int number = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
      std::size_t end = text.find('\n', begin);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(begin, end - begin);
      ++number;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      std::string content = strip_comment(raw, number);
      std::size_t indent = 0;
      while (indent < content.size() && content[indent] == ' ') ++indent;
      if (indent < content.size() && content[indent] == '\t') {
        fail(number, "tab character in indentation");
      }
      if (indent < content.size()) {
        lines_.push_back(Line{static_cast<int>(indent), content.substr(indent), number});
      }
      if (end == text.size()) break;
      begin = end + 1;
    }
  }

  const Line* peek() const { return pos_ < lines_.size() ? &lines_[pos_] : nullptr; }

  Node parse_node(int indent) {
    const Line& first = lines_[pos_];
    if (first.indent != indent) fail(first.number, "unexpected indentation");
    if (is_sequence_item(first.content)) return parse_sequence(indent);
    if (key_colon(first.content) != std::string_view::npos) return parse_mapping(indent);
    Node scalar = make_scalar(first.content, first.number);
    ++pos_;
    return scalar;
  }

  Node parse_sequence(int indent) {
    Node node;
    node.kind = Node::Kind::Sequence;
    node.line = lines_[pos_].number;
    while (const Line* line = peek()) {
      if (line->indent != indent || !is_sequence_item(line->content)) break;
      if (line->content == "-") {
        ++pos_;
        node.items.push_back(parse_value(indent, line->number, false));
      } else {
        // Reinterpret the text after `- ` as a line of its own, indented at
        // the column where it starts; following deeper lines join it.
        std::size_t skip = 2;
        while (skip < line->content.size() && line->content[skip] == ' ') ++skip;
        Line& slot = lines_[pos_];
        slot.indent += static_cast<int>(skip);
        slot.content = slot.content.substr(skip);
        node.items.push_back(parse_node(slot.indent));
      }
    }
    return node;
  }

  Node parse_mapping(int indent) {
    Node node;
    node.kind = Node::Kind::Mapping;
    node.line = lines_[pos_].number;
    while (const Line* line = peek()) {
      if (line->indent != indent) break;
      if (is_sequence_item(line->content)) break;
      std::size_t colon = key_colon(line->content);
      if (colon == std::string_view::npos) {
        if (node.entries.empty()) fail(line->number, "expected 'key:'");
        break;
      }
      std::string key{line->content.substr(0, colon)};
      while (!key.empty() && is_space(key.back())) key.pop_back();
      if (key.empty()) fail(line->number, "empty mapping key");
      for (const auto& existing : node.entries) {
        if (existing.key == key) fail(line->number, "duplicate key '" + key + "'");
      }
      std::size_t rest = colon + 1;
      while (rest < line->content.size() && is_space(line->content[rest])) ++rest;
      Node::KeyValue entry;
      entry.key = std::move(key);
      entry.key_line = line->number;
      if (rest < line->content.size()) {
        entry.value = make_scalar(std::string_view(line->content).substr(rest), line->number);
        ++pos_;
      } else {
        int key_line = line->number;
        ++pos_;
        entry.value = parse_value(indent, key_line, true);
      }
      node.entries.push_back(std::move(entry));
    }
    return node;
  }

  // Value of a `key:` with nothing inline, or of a bare `-` item. A nested
  // node is anything indented deeper. For mapping values a sequence may also
  // sit at the key's own indentation (the usual YAML exception for `key:`
  // over `- item`); after a bare `-` a same-indent item is a sibling instead.
  Node parse_value(int parent_indent, int parent_line, bool same_indent_sequence) {
    const Line* line = peek();
    if (line == nullptr || line->indent < parent_indent) {
      Node empty;
      empty.line = parent_line;
      return empty;
    }
    if (line->indent == parent_indent) {
      if (same_indent_sequence && is_sequence_item(line->content)) {
        return parse_sequence(parent_indent);
      }
      Node empty;
      empty.line = parent_line;
      return empty;
    }
    return parse_node(line->indent);
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

const Node* Node::get(std::string_view key) const noexcept {
  if (kind != Kind::Mapping) return nullptr;
  for (const KeyValue& entry : entries) {
    if (entry.key == key) return &entry.value;
  }
  return nullptr;
}

Node parse(std::string_view text) { return Parser(text).run(); }

}  // namespace aapp::yaml
