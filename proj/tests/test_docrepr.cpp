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

#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "crawldoc/docrepr.hpp"
#include "support/pdf_builder.hpp"

using namespace crawldoc;
using namespace crawldoc::docrepr;

TEST_CASE("quantize rounds half away from zero and clamps") {
  CHECK(quantize(0, 1000) == 0);
  CHECK(quantize(1000, 1000) == 1000);
  CHECK(quantize(500, 1000) == 500);
  CHECK(quantize(0.5, 1000) == 1);     // 0.5 rounds up
  CHECK(quantize(0.4999, 1000) == 0);
  CHECK(quantize(1200, 1000) == 1000);  // clamp above
  CHECK(quantize(-5, 1000) == 0);       // clamp below
  CHECK(quantize(50, 0) == 0);          // degenerate span
  CHECK(quantize(100, 612) == 163);     // round(163.39...)
}

TEST_CASE("validate_block rejects malformed blocks") {
  TextBlock ok{"text", {0, 0, 10, 10}, 0};
  CHECK_NOTHROW(validate_block(ok));
  CHECK_THROWS_AS(validate_block(TextBlock{"  ", {0, 0, 1, 1}, 0}), ArgumentError);
  CHECK_THROWS_AS(validate_block(TextBlock{"x", {0, 0, 1, 1}, -1}), ArgumentError);
  CHECK_THROWS_AS(validate_block(TextBlock{"x", {0, 0, 1001, 1}, 0}), ArgumentError);
  CHECK_THROWS_AS(validate_block(TextBlock{"x", {-1, 0, 1, 1}, 0}), ArgumentError);
  CHECK_THROWS_AS(validate_block(TextBlock{"x", {5, 0, 1, 1}, 0}), ArgumentError);
  CHECK_THROWS_AS(validate_block(TextBlock{"x", {0, 5, 1, 1}, 0}), ArgumentError);
}

TEST_CASE("sort_reading_order sorts by page, then y, then x") {
  std::vector<TextBlock> blocks = {
      {"d", {0, 0, 1, 1}, 1},
      {"b", {500, 100, 600, 110}, 0},
      {"c", {0, 200, 10, 210}, 0},
      {"a", {10, 100, 20, 110}, 0},
  };
  sort_reading_order(blocks);
  CHECK(blocks[0].text == "a");
  CHECK(blocks[1].text == "b");
  CHECK(blocks[2].text == "c");
  CHECK(blocks[3].text == "d");
}

// "Hello" in 12pt Courier at (100, 700) on a 612x792 page: box
// [100, 82.4, 136, 94.4] top-down, which quantizes to
// [163, 104, 222, 119] in thousandths of the page.
TEST_CASE("extract_pdf produces the hand-computed quantized bbox") {
  std::string pdf_bytes = testsupport::build_pdf({testsupport::PdfTextItem{100, 700, 12, "Hello"}});
  auto blocks = extract_pdf(pdf_bytes);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].text == "Hello");
  CHECK(blocks[0].page == 0);
  CHECK(blocks[0].bbox == std::array<int, 4>{163, 104, 222, 119});
}

TEST_CASE("extract_pdf orders blocks top-down across pages") {
  std::string pdf_bytes = testsupport::build_pdf(std::vector<std::vector<testsupport::PdfTextItem>>{
      {{72, 100, 12, "low"}, {72, 700, 12, "high"}},
      {{72, 400, 12, "second page"}}});
  auto blocks = extract_pdf(pdf_bytes);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].text == "high");
  CHECK(blocks[1].text == "low");
  CHECK(blocks[2].text == "second page");
  CHECK(blocks[2].page == 1);
}

TEST_CASE("deterministic_layout flows text in a monospace grid") {
  // 8 px per character, 16 px line height.
  PxLayout layout = deterministic_layout("<p>ab cd</p>");
  REQUIRE(layout.blocks.size() == 1);
  CHECK(layout.blocks[0].text == "ab cd");
  CHECK(layout.blocks[0].x == 0.0);
  CHECK(layout.blocks[0].y == 0.0);
  CHECK(layout.blocks[0].w == 40.0);
  CHECK(layout.blocks[0].h == 16.0);
  CHECK(layout.viewport_width == 1280.0);
  CHECK(layout.document_height == 16.0);
}

TEST_CASE("block elements stack vertically") {
  PxLayout layout = deterministic_layout("<p>one</p><p>two</p>");
  REQUIRE(layout.blocks.size() == 2);
  CHECK(layout.blocks[0].y == 0.0);
  CHECK(layout.blocks[1].y == 16.0);
  CHECK(layout.document_height == 32.0);
}

TEST_CASE("inline elements continue the line with a separating space") {
  PxLayout layout = deterministic_layout("<p>ab <b>cd</b></p>");
  REQUIRE(layout.blocks.size() == 2);
  CHECK(layout.blocks[0].text == "ab");
  CHECK(layout.blocks[0].x == 0.0);
  CHECK(layout.blocks[1].text == "cd");
  CHECK(layout.blocks[1].x == 24.0);  // 2 chars + 1 space, 8 px each
  CHECK(layout.blocks[1].y == 0.0);
}

TEST_CASE("lines wrap at the viewport width") {
  std::string w1(100, 'a'), w2(100, 'b');
  PxLayout layout = deterministic_layout("<p>" + w1 + " " + w2 + "</p>");
  REQUIRE(layout.blocks.size() == 2);
  CHECK(layout.blocks[0].y == 0.0);
  CHECK(layout.blocks[1].y == 16.0);  // 800 + 8 + 800 > 1280
  CHECK(layout.blocks[1].x == 0.0);
}

TEST_CASE("br forces a line break even on empty lines") {
  PxLayout layout = deterministic_layout("x<br><br>y");
  REQUIRE(layout.blocks.size() == 2);
  CHECK(layout.blocks[0].y == 0.0);
  CHECK(layout.blocks[1].y == 32.0);
}

TEST_CASE("head content never renders") {
  PxLayout layout =
      deterministic_layout("<head><title>T</title></head><body><p>only</p></body>");
  REQUIRE(layout.blocks.size() == 1);
  CHECK(layout.blocks[0].text == "only");
}

TEST_CASE("quantize_layout scales x by viewport and y by document height") {
  PxLayout layout;
  layout.viewport_width = 1280;
  layout.document_height = 64;
  layout.blocks = {{"a", 0, 0, 640, 16}, {"b", 320, 48, 320, 16}};
  auto blocks = quantize_layout(layout);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].bbox == std::array<int, 4>{0, 0, 500, 250});
  CHECK(blocks[1].bbox == std::array<int, 4>{250, 750, 500, 1000});
  CHECK(blocks[0].page == 0);
}

TEST_CASE("quantize_layout drops whitespace-only blocks") {
  PxLayout layout;
  layout.document_height = 16;
  layout.blocks = {{"  ", 0, 0, 16, 16}, {"x", 0, 0, 8, 16}};
  CHECK(quantize_layout(layout).size() == 1);
}

TEST_CASE("render_html is deterministic byte for byte") {
  std::string html_body =
      "<html><body><h1>Title</h1><p>Some paragraph text</p>"
      "<ul><li>first</li><li>second</li></ul></body></html>";
  auto r1 = make_representation("http://x.example/a", DocFormat::html,
                                render_html(html_body, "http://x.example/a"));
  auto r2 = make_representation("http://x.example/a", DocFormat::html,
                                render_html(html_body, "http://x.example/a"));
  CHECK(canonical_json(r1) == canonical_json(r2));
  CHECK(r1 == r2);
}

TEST_CASE("canonical_json round-trips through parse_canonical_json") {
  std::vector<TextBlock> blocks = {{"alpha", {1, 2, 3, 4}, 0}, {"beta", {5, 6, 7, 8}, 1}};
  auto repr = make_representation("http://x.example/doc.pdf", DocFormat::pdf, blocks);
  std::string encoded = canonical_json(repr);
  DocumentRepresentation back = parse_canonical_json(encoded);
  CHECK(back == repr);
  CHECK(canonical_json(back) == encoded);
}

TEST_CASE("parse_canonical_json rejects malformed input") {
  CHECK_THROWS_AS(parse_canonical_json("{nope"), ParseError);
  CHECK_THROWS_AS(parse_canonical_json("{}"), ParseError);
  CHECK_THROWS_AS(parse_canonical_json(
                      R"({"source_url":"u","format":"html","layout_included":true,)"
                      R"("blocks":[{"text":"t","bbox":[1,2,3],"page":0}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_canonical_json(
                      R"({"source_url":"u","format":"docx","layout_included":true,"blocks":[]})"),
                  ParseError);
}

TEST_CASE("make_representation validates blocks") {
  CHECK_THROWS_AS(
      make_representation("u", DocFormat::html, {TextBlock{"", {0, 0, 1, 1}, 0}}),
      ArgumentError);
}

TEST_CASE("strip_layout zeroes boxes, keeps text and order, idempotent") {
  std::vector<TextBlock> blocks = {{"alpha", {1, 2, 3, 4}, 0}, {"beta", {5, 6, 7, 8}, 1}};
  auto repr = make_representation("u", DocFormat::pdf, blocks);
  auto stripped = strip_layout(repr);
  CHECK_FALSE(stripped.layout_included);
  REQUIRE(stripped.blocks.size() == 2);
  CHECK(stripped.blocks[0].text == "alpha");
  CHECK(stripped.blocks[0].bbox == kNoLayoutBBox);
  CHECK(stripped.blocks[1].text == "beta");
  CHECK(stripped.blocks[1].bbox == kNoLayoutBBox);
  CHECK(stripped.blocks[1].page == 1);
  CHECK(strip_layout(stripped) == stripped);
  CHECK(concatenated_text(stripped) == concatenated_text(repr));
}

TEST_CASE("concatenated_text joins blocks with newlines") {
  auto repr = make_representation(
      "u", DocFormat::html, {TextBlock{"a", {0, 0, 1, 1}, 0}, TextBlock{"b", {0, 2, 1, 3}, 0}});
  CHECK(concatenated_text(repr) == "a\nb");
  CHECK(concatenated_text(DocumentRepresentation{}) == "");
}

TEST_CASE("truncate_tokens cuts at the token budget") {
  Tokenizer tok = [](std::string_view s) { return whitespace_tokens(s); };
  CHECK(truncate_tokens("a b c d", 2, tok) == "a b");
  CHECK(truncate_tokens("a b c d", 4, tok) == "a b c d");
  CHECK(truncate_tokens("a b c d", 99, tok) == "a b c d");
  CHECK(truncate_tokens("  spaced   out  ", 99, tok) == "  spaced   out  ");  // unchanged
  CHECK(truncate_tokens("  spaced   out  ", 1, tok) == "  spaced");
  CHECK_THROWS_AS(truncate_tokens("x", 0, tok), ArgumentError);
}

TEST_CASE("format names round-trip") {
  CHECK(format_name(DocFormat::html) == std::string("html"));
  CHECK(format_name(DocFormat::pdf) == std::string("pdf"));
  CHECK(format_from_name("html") == DocFormat::html);
  CHECK(format_from_name("pdf") == DocFormat::pdf);
  CHECK_THROWS_AS(format_from_name("docx"), ParseError);
}
