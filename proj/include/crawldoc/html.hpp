// Copyright 2026 The crawldoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crawldoc/util.hpp"

namespace crawldoc::html {

/// A minimal DOM node. Malformed markup never throws; the parser recovers
/// by ignoring what it cannot interpret.
struct Node {
  enum class Type { Element, Text };

  Type type = Type::Text;
  std::string tag;  // lowercased, Element only
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;  // Text only, entities decoded
  std::vector<std::unique_ptr<Node>> children;

  std::optional<std::string> attr(std::string_view name) const {
    for (const auto& [k, v] : attrs) {
      if (k == name) return v;
    }
    return std::nullopt;
  }
};

namespace detail {

inline bool is_void_element(std::string_view tag) {
  static const std::set<std::string, std::less<>> kVoid = {
      "area", "base", "br", "col", "embed", "hr", "img", "input",
      "link", "meta", "source", "track", "wbr"};
  return kVoid.count(tag) > 0;
}

inline void append_utf8(std::string& out, uint32_t cp) {
  if (cp <= 0x7f) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7ff) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp <= 0xffff) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp <= 0x10ffff) {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

}  // namespace detail

/// Decodes the common named entities plus numeric references. Unknown
/// entities pass through verbatim.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") out.push_back('&');
    else if (name == "lt") out.push_back('<');
    else if (name == "gt") out.push_back('>');
    else if (name == "quot") out.push_back('"');
    else if (name == "apos") out.push_back('\'');
    else if (name == "nbsp") out.push_back(' ');
    else if (!name.empty() && name[0] == '#') {
      uint32_t cp = 0;
      bool ok = name.size() > 1;
      if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
        for (size_t k = 2; k < name.size() && ok; ++k) {
          char c = name[k];
          if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
          else cp = cp * 16 + (std::isdigit(static_cast<unsigned char>(c))
                                   ? static_cast<uint32_t>(c - '0')
                                   : static_cast<uint32_t>(std::tolower(c) - 'a' + 10));
        }
      } else {
        for (size_t k = 1; k < name.size() && ok; ++k) {
          if (!std::isdigit(static_cast<unsigned char>(name[k]))) ok = false;
          else cp = cp * 10 + static_cast<uint32_t>(name[k] - '0');
        }
      }
      if (ok && cp > 0 && cp <= 0x10ffff) detail::append_utf8(out, cp);
      else { out.push_back(s[i]); ++i; continue; }
    } else {
      out.push_back(s[i]);
      ++i;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

namespace detail {

struct Parser {
  std::string_view src;
  size_t pos = 0;

  bool eof() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }

  bool consume(std::string_view lit) {
    if (src.substr(pos, lit.size()) == lit) {
      pos += lit.size();
      return true;
    }
    return false;
  }

  void skip_until(std::string_view lit) {
    size_t p = src.find(lit, pos);
    pos = p == std::string_view::npos ? src.size() : p + lit.size();
  }

  // Case-insensitive search for "</tag" used for script/style raw text.
  size_t find_close_ci(std::string_view tag) {
    std::string needle = "</" + std::string(tag);
    for (size_t p = pos; p + needle.size() <= src.size(); ++p) {
      if (starts_with_ci(src.substr(p), needle)) return p;
    }
    return std::string_view::npos;
  }

  std::string read_tag_name() {
    std::string name;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':') {
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        ++pos;
      } else {
        break;
      }
    }
    return name;
  }

  void skip_ws() {
    while (!eof() && is_space(peek())) ++pos;
  }

  std::vector<std::pair<std::string, std::string>> read_attrs(bool& self_closing) {
    std::vector<std::pair<std::string, std::string>> attrs;
    self_closing = false;
    while (!eof()) {
      skip_ws();
      if (eof()) break;
      char c = peek();
      if (c == '>') { ++pos; break; }
      if (c == '/') {
        ++pos;
        if (!eof() && peek() == '>') { ++pos; self_closing = true; break; }
        continue;
      }
      std::string name;
      while (!eof()) {
        c = peek();
        if (is_space(c) || c == '=' || c == '>' || c == '/') break;
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        ++pos;
      }
      if (name.empty()) { ++pos; continue; }
      skip_ws();
      std::string value;
      if (!eof() && peek() == '=') {
        ++pos;
        skip_ws();
        if (!eof() && (peek() == '"' || peek() == '\'')) {
          char quote = peek();
          ++pos;
          size_t end = src.find(quote, pos);
          if (end == std::string_view::npos) end = src.size();
          value = decode_entities(src.substr(pos, end - pos));
          pos = end < src.size() ? end + 1 : end;
        } else {
          size_t start = pos;
          while (!eof() && !is_space(peek()) && peek() != '>') ++pos;
          value = decode_entities(src.substr(start, pos - start));
        }
      }
      attrs.emplace_back(std::move(name), std::move(value));
    }
    return attrs;
  }
};

}  // namespace detail

/// Parses HTML bytes into a tree rooted at a synthetic element. Bytes that
/// are not valid UTF-8 are carried through untouched (lossy handling is the
/// caller's concern).
inline std::unique_ptr<Node> parse(std::string_view source) {
  auto root = std::make_unique<Node>();
  root->type = Node::Type::Element;
  root->tag = "#root";

  detail::Parser p{source};
  std::vector<Node*> stack = {root.get()};

  auto flush_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    auto node = std::make_unique<Node>();
    node->type = Node::Type::Text;
    node->text = decode_entities(raw);
    stack.back()->children.push_back(std::move(node));
  };

  while (!p.eof()) {
    size_t lt = p.src.find('<', p.pos);
    if (lt == std::string_view::npos) {
      flush_text(p.src.substr(p.pos));
      break;
    }
    flush_text(p.src.substr(p.pos, lt - p.pos));
    p.pos = lt;

    if (p.consume("<!--")) {
      p.skip_until("-->");
      continue;
    }
    if (p.src.substr(p.pos, 2) == "<!" || p.src.substr(p.pos, 2) == "<?") {
      p.skip_until(">");
      continue;
    }
    if (p.src.substr(p.pos, 2) == "</") {
      p.pos += 2;
      std::string name = p.read_tag_name();
      p.skip_until(">");
      // Pop to the matching open tag; ignore unmatched closers.
      for (size_t i = stack.size(); i > 1; --i) {
        if (stack[i - 1]->tag == name) {
          stack.resize(i - 1);
          break;
        }
      }
      continue;
    }

    ++p.pos;  // '<'
    if (p.eof() || !std::isalpha(static_cast<unsigned char>(p.peek()))) {
      flush_text("<");
      continue;
    }
    std::string name = p.read_tag_name();
    bool self_closing = false;
    auto attrs = p.read_attrs(self_closing);

    // <p> and <li> auto-close a still-open sibling of the same tag.
    if (name == "p" || name == "li") {
      for (size_t i = stack.size(); i > 1; --i) {
        if (stack[i - 1]->tag == name) {
          stack.resize(i - 1);
          break;
        }
      }
    }

    auto node = std::make_unique<Node>();
    node->type = Node::Type::Element;
    node->tag = name;
    node->attrs = std::move(attrs);
    Node* raw_node = node.get();
    stack.back()->children.push_back(std::move(node));

    if (name == "script" || name == "style") {
      size_t close = p.find_close_ci(name);
      // Raw text content is dropped: it is never rendered text.
      p.pos = close == std::string_view::npos ? p.src.size() : close;
      if (close != std::string_view::npos) {
        p.pos += 2 + name.size();
        p.skip_until(">");
      }
      continue;
    }
    if (!self_closing && !detail::is_void_element(name)) stack.push_back(raw_node);
  }
  return root;
}

/// Concatenated descendant text with whitespace collapsed.
inline std::string text_content(const Node& node) {
  std::string raw;
  auto walk = [&](auto&& self, const Node& n) -> void {
    if (n.type == Node::Type::Text) {
      raw += n.text;
      raw += ' ';
      return;
    }
    for (const auto& child : n.children) self(self, *child);
  };
  walk(walk, node);
  return collapse_whitespace(raw);
}

/// Visits elements in document order.
template <typename Fn>
void for_each_element(const Node& node, Fn&& fn) {
  if (node.type == Node::Type::Element && node.tag != "#root") fn(node);
  for (const auto& child : node.children) for_each_element(*child, fn);
}

}  // namespace crawldoc::html
