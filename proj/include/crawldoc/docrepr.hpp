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

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crawldoc/errors.hpp"
#include "crawldoc/html.hpp"
#include "crawldoc/pdf.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::docrepr {

using nlohmann::json;

enum class DocFormat { html, pdf };

inline const char* format_name(DocFormat f) { return f == DocFormat::html ? "html" : "pdf"; }

inline DocFormat format_from_name(std::string_view s) {
  if (s == "html") return DocFormat::html;
  if (s == "pdf") return DocFormat::pdf;
  throw ParseError("unknown document format: " + std::string(s));
}

/// One text block with a quantized bounding box in the 0-1000 coordinate
/// space of its page (PDF) or viewport/document (HTML). y grows downward.
struct TextBlock {
  std::string text;
  std::array<int, 4> bbox = {0, 0, 0, 0};  // x0, y0, x1, y1
  int page = 0;

  bool operator==(const TextBlock&) const = default;
};

constexpr std::array<int, 4> kNoLayoutBBox = {0, 0, 0, 0};

struct DocumentRepresentation {
  std::string source_url;
  DocFormat format = DocFormat::html;
  std::vector<TextBlock> blocks;
  bool layout_included = true;

  bool operator==(const DocumentRepresentation&) const = default;
};

inline void validate_block(const TextBlock& b) {
  if (collapse_whitespace(b.text).empty())
    throw ArgumentError("text block with empty text");
  if (b.page < 0) throw ArgumentError("text block with negative page");
  for (int c : b.bbox) {
    if (c < 0 || c > 1000) throw ArgumentError("bbox coordinate out of [0, 1000]");
  }
  if (b.bbox[0] > b.bbox[2] || b.bbox[1] > b.bbox[3])
    throw ArgumentError("bbox with x0 > x1 or y0 > y1");
}

/// Reading order: (page, y0, x0). Stable, so sorting twice is a no-op.
inline void sort_reading_order(std::vector<TextBlock>& blocks) {
  std::stable_sort(blocks.begin(), blocks.end(), [](const TextBlock& a, const TextBlock& b) {
    return std::tie(a.page, a.bbox[1], a.bbox[0]) < std::tie(b.page, b.bbox[1], b.bbox[0]);
  });
}

/// Scales a length within [0, span] to an integer in [0, 1000], rounding
/// to nearest (half away from zero).
inline int quantize(double v, double span) {
  if (span <= 0) return 0;
  auto q = std::llround(v * 1000.0 / span);
  return static_cast<int>(std::clamp<long long>(q, 0, 1000));
}

// ---------------------------------------------------------------------------
// PDF extraction
// ---------------------------------------------------------------------------

/// Extracts line-level text blocks from a PDF, coordinates scaled to the
/// 0-1000 space of each page's media box.
inline std::vector<TextBlock> extract_pdf(std::string_view body) {
  pdf::ExtractedText extracted = pdf::extract_text(body);
  std::vector<TextBlock> blocks;
  for (const auto& line : extracted.lines) {
    const pdf::PageGeom& geom = extracted.pages[static_cast<size_t>(line.page)];
    TextBlock b;
    b.text = collapse_whitespace(line.text);
    if (b.text.empty()) continue;
    b.page = line.page;
    b.bbox = {quantize(line.x0, geom.width), quantize(line.y0, geom.height),
              quantize(line.x1, geom.width), quantize(line.y1, geom.height)};
    if (b.bbox[0] > b.bbox[2]) std::swap(b.bbox[0], b.bbox[2]);
    if (b.bbox[1] > b.bbox[3]) std::swap(b.bbox[1], b.bbox[3]);
    blocks.push_back(std::move(b));
  }
  sort_reading_order(blocks);
  return blocks;
}

// ---------------------------------------------------------------------------
// HTML layout
//
// A layout provider turns HTML into pixel-space text boxes. The built-in
// deterministic provider is a monospace flow model: 8 px per character,
// 16 px line height, block elements stack vertically, lines wrap at the
// 1280 px viewport width. An external renderer (see renderer.hpp) supplies
// real browser geometry through the same PxLayout shape.
// ---------------------------------------------------------------------------

struct PxBlock {
  std::string text;
  double x = 0, y = 0, w = 0, h = 0;
};

struct PxLayout {
  std::vector<PxBlock> blocks;
  double viewport_width = 1280;
  double document_height = 0;
};

using LayoutFn = std::function<PxLayout(std::string_view html, const std::string& base_url)>;

constexpr double kCharWidthPx = 8.0;
constexpr double kLineHeightPx = 16.0;
constexpr double kViewportWidthPx = 1280.0;

namespace detail {

inline bool is_block_tag(std::string_view tag) {
  static const std::set<std::string, std::less<>> kBlock = {
      "address", "article", "aside", "blockquote", "body", "dd", "div", "dl",
      "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
      "h3", "h4", "h5", "h6", "header", "hr", "html", "li", "main", "nav",
      "ol", "p", "pre", "section", "table", "tbody", "td", "tfoot", "th",
      "thead", "tr", "ul"};
  return kBlock.count(tag) > 0;
}

inline bool is_skipped_tag(std::string_view tag) {
  static const std::set<std::string, std::less<>> kSkip = {
      "head", "noscript", "script", "style", "template", "title"};
  return kSkip.count(tag) > 0;
}

struct FlowLayout {
  std::vector<PxBlock> blocks;
  double x = 0, y = 0;
  bool line_has_content = false;
  bool pending_space = false;

  // Open fragment of the current text node on the current line.
  std::string frag_text;
  double frag_x = 0;

  void flush_fragment() {
    if (!frag_text.empty()) {
      blocks.push_back({frag_text, frag_x, y,
                        static_cast<double>(frag_text.size()) * kCharWidthPx, kLineHeightPx});
      frag_text.clear();
    }
  }

  void break_line() {
    flush_fragment();
    if (line_has_content) {
      y += kLineHeightPx;
      x = 0;
      line_has_content = false;
    }
    pending_space = false;
  }

  void forced_break() {  // <br>: advances even on an empty line
    flush_fragment();
    y += kLineHeightPx;
    x = 0;
    line_has_content = false;
    pending_space = false;
  }

  void add_text(std::string_view raw) {
    bool leading_ws = !raw.empty() && is_space(raw.front());
    bool trailing_ws = !raw.empty() && is_space(raw.back());
    auto words = whitespace_tokens(raw);
    if (words.empty()) {
      if (line_has_content) pending_space = true;
      return;
    }
    if (leading_ws && line_has_content) pending_space = true;
    for (const auto& word : words) {
      bool join_same_frag = !frag_text.empty();
      double sep = (line_has_content && (pending_space || join_same_frag)) ? kCharWidthPx : 0;
      double w = static_cast<double>(word.size()) * kCharWidthPx;
      if (line_has_content && x + sep + w > kViewportWidthPx) {
        flush_fragment();
        y += kLineHeightPx;
        x = 0;
        line_has_content = false;
        sep = 0;
        join_same_frag = false;
      }
      if (join_same_frag && sep > 0) {
        frag_text.push_back(' ');
      } else {
        flush_fragment();
        x += sep;
        frag_x = x;
      }
      frag_text.append(word);
      x = frag_x + static_cast<double>(frag_text.size()) * kCharWidthPx;
      line_has_content = true;
      pending_space = false;
    }
    if (trailing_ws) pending_space = true;
  }

  void walk(const html::Node& node) {
    if (node.type == html::Node::Type::Text) {
      // One fragment (per line) per text node: block granularity is
      // text-node level.
      add_text(node.text);
      flush_fragment();
      return;
    }
    if (is_skipped_tag(node.tag)) return;
    if (node.tag == "br") {
      forced_break();
      return;
    }
    bool block = is_block_tag(node.tag);
    if (block) break_line();
    for (const auto& child : node.children) walk(*child);
    if (block) break_line();
  }
};

}  // namespace detail

/// The deterministic layout provider. Ignores the base URL (no subresource
/// loading, no scripts, no CSS).
inline PxLayout deterministic_layout(std::string_view html_source, const std::string& = "") {
  auto root = html::parse(html_source);
  detail::FlowLayout flow;
  flow.walk(*root);
  flow.break_line();
  PxLayout out;
  out.blocks = std::move(flow.blocks);
  out.viewport_width = kViewportWidthPx;
  double height = 0;
  for (const auto& b : out.blocks) height = std::max(height, b.y + b.h);
  out.document_height = height;
  return out;
}

/// Scales a pixel layout to the 0-1000 space: x against the viewport
/// width, y against the full document height.
inline std::vector<TextBlock> quantize_layout(const PxLayout& layout) {
  std::vector<TextBlock> blocks;
  for (const auto& b : layout.blocks) {
    TextBlock out;
    out.text = collapse_whitespace(b.text);
    if (out.text.empty()) continue;
    out.page = 0;
    out.bbox = {quantize(b.x, layout.viewport_width),
                quantize(b.y, layout.document_height),
                quantize(b.x + b.w, layout.viewport_width),
                quantize(b.y + b.h, layout.document_height)};
    blocks.push_back(std::move(out));
  }
  sort_reading_order(blocks);
  return blocks;
}

/// Renders HTML to text blocks through the given layout provider.
inline std::vector<TextBlock> render_html(std::string_view body, const std::string& base_url,
                                          const LayoutFn& provider) {
  return quantize_layout(provider(body, base_url));
}

inline std::vector<TextBlock> render_html(std::string_view body, const std::string& base_url) {
  return render_html(body, base_url, [](std::string_view h, const std::string& b) {
    return deterministic_layout(h, b);
  });
}

// ---------------------------------------------------------------------------
// Uniform JSON representation
// ---------------------------------------------------------------------------

inline DocumentRepresentation make_representation(std::string source_url, DocFormat format,
                                                  std::vector<TextBlock> blocks,
                                                  bool layout_included = true) {
  for (const auto& b : blocks) validate_block(b);
  DocumentRepresentation repr;
  repr.source_url = std::move(source_url);
  repr.format = format;
  repr.blocks = std::move(blocks);
  repr.layout_included = layout_included;
  return repr;
}

inline json to_uniform_json(const DocumentRepresentation& repr) {
  json blocks = json::array();
  for (const auto& b : repr.blocks) {
    blocks.push_back({{"text", b.text},
                      {"bbox", {b.bbox[0], b.bbox[1], b.bbox[2], b.bbox[3]}},
                      {"page", b.page}});
  }
  return json{{"source_url", repr.source_url},
              {"format", format_name(repr.format)},
              {"layout_included", repr.layout_included},
              {"blocks", blocks}};
}

/// Byte-deterministic canonical encoding: keys sorted, no whitespace.
inline std::string canonical_json(const DocumentRepresentation& repr) {
  return to_uniform_json(repr).dump();
}

inline DocumentRepresentation from_uniform_json(const json& j) {
  DocumentRepresentation repr;
  try {
    repr.source_url = j.at("source_url").get<std::string>();
    repr.format = format_from_name(j.at("format").get<std::string>());
    repr.layout_included = j.at("layout_included").get<bool>();
    for (const auto& jb : j.at("blocks")) {
      TextBlock b;
      b.text = jb.at("text").get<std::string>();
      auto bbox = jb.at("bbox");
      if (bbox.size() != 4) throw ParseError("bbox must have 4 entries");
      for (int i = 0; i < 4; ++i) b.bbox[static_cast<size_t>(i)] = bbox.at(i).get<int>();
      b.page = jb.at("page").get<int>();
      repr.blocks.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed representation JSON: ") + e.what());
  }
  return repr;
}

inline DocumentRepresentation parse_canonical_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed representation JSON");
  return from_uniform_json(j);
}

/// Drops all layout: every bbox becomes the sentinel and layout_included
/// turns false. Text content and order are untouched. Idempotent.
inline DocumentRepresentation strip_layout(DocumentRepresentation repr) {
  for (auto& b : repr.blocks) b.bbox = kNoLayoutBBox;
  repr.layout_included = false;
  return repr;
}

inline std::string concatenated_text(const DocumentRepresentation& repr) {
  std::string out;
  for (const auto& b : repr.blocks) {
    if (!out.empty()) out.push_back('\n');
    out += b.text;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token truncation
// ---------------------------------------------------------------------------

/// Tokenizer contract: deterministic, returns views aliasing the input in
/// left-to-right order.
using Tokenizer = std::function<std::vector<std::string_view>(std::string_view)>;

/// Cuts the input after its max_tokens-th token. Inputs already within
/// budget are returned unchanged, byte for byte.
inline std::string truncate_tokens(const std::string& input, size_t max_tokens,
                                   const Tokenizer& tokenizer) {
  if (max_tokens < 1) throw ArgumentError("truncate_tokens requires max_tokens >= 1");
  auto tokens = tokenizer(input);
  if (tokens.size() <= max_tokens) return input;
  const std::string_view last = tokens[max_tokens - 1];
  size_t end = static_cast<size_t>(last.data() - input.data()) + last.size();
  return input.substr(0, end);
}

}  // namespace crawldoc::docrepr
