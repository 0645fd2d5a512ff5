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

#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "crawldoc/html.hpp"

using namespace crawldoc;

TEST_CASE("decode_entities handles named and numeric references") {
  CHECK(html::decode_entities("a &amp; b") == "a & b");
  CHECK(html::decode_entities("&lt;x&gt;") == "<x>");
  CHECK(html::decode_entities("&quot;q&quot; &apos;a&apos;") == "\"q\" 'a'");
  CHECK(html::decode_entities("x&nbsp;y") == "x y");
  CHECK(html::decode_entities("&#65;&#66;") == "AB");
  CHECK(html::decode_entities("&#x41;&#X42;") == "AB");
  CHECK(html::decode_entities("&#233;") == "\xc3\xa9");   // e-acute, two-byte UTF-8
  CHECK(html::decode_entities("&#x1F600;").size() == 4);  // four-byte UTF-8
  // Unknown or malformed references pass through.
  CHECK(html::decode_entities("&bogus;") == "&bogus;");
  CHECK(html::decode_entities("a & b") == "a & b");
  CHECK(html::decode_entities("&#xZZ;") == "&#xZZ;");
  CHECK(html::decode_entities("&;") == "&;");
}

TEST_CASE("parse builds a tree with attributes") {
  auto root = html::parse("<div id=\"main\" class='big'><p>Hi</p></div>");
  REQUIRE(root->children.size() == 1);
  const html::Node& div = *root->children[0];
  CHECK(div.tag == "div");
  CHECK(div.attr("id") == "main");
  CHECK(div.attr("class") == "big");
  CHECK_FALSE(div.attr("missing").has_value());
  REQUIRE(div.children.size() == 1);
  CHECK(div.children[0]->tag == "p");
  REQUIRE(div.children[0]->children.size() == 1);
  CHECK(div.children[0]->children[0]->text == "Hi");
}

TEST_CASE("parse handles unquoted and valueless attributes") {
  auto root = html::parse("<input type=text disabled>");
  const html::Node& input = *root->children[0];
  CHECK(input.attr("type") == "text");
  CHECK(input.attr("disabled") == "");
}

TEST_CASE("parse treats void and self-closing elements as leaves") {
  auto root = html::parse("<p>a<br>b<img src=x/>c</p>");
  const html::Node& p = *root->children[0];
  REQUIRE(p.children.size() == 5);
  CHECK(p.children[0]->text == "a");
  CHECK(p.children[1]->tag == "br");
  CHECK(p.children[2]->text == "b");
  CHECK(p.children[3]->tag == "img");
  CHECK(p.children[4]->text == "c");
}

TEST_CASE("parse drops comments, doctype and raw script/style text") {
  auto root = html::parse(
      "<!DOCTYPE html><!-- note --><script>var x = '<p>';</script>"
      "<style>p { color: red }</style><p>visible</p>");
  CHECK(html::text_content(*root) == "visible");
}

TEST_CASE("parse recovers from malformed markup") {
  // Unmatched closers are ignored; unclosed tags are closed at EOF.
  auto root = html::parse("</div><p>one<span>two");
  CHECK(html::text_content(*root) == "one two");
  // A bare '<' that opens nothing becomes text.
  CHECK(html::text_content(*html::parse("a < b")) == "a < b");
}

TEST_CASE("sibling p and li auto-close") {
  auto root = html::parse("<ul><li>a<li>b</ul><p>x<p>y");
  std::vector<std::string> tags;
  html::for_each_element(*root, [&](const html::Node& n) { tags.push_back(n.tag); });
  CHECK(tags == std::vector<std::string>{"ul", "li", "li", "p", "p"});
  const html::Node& ul = *root->children[0];
  REQUIRE(ul.children.size() == 2);  // second <li> is a sibling, not a child
  CHECK(html::text_content(*ul.children[0]) == "a");
  CHECK(html::text_content(*ul.children[1]) == "b");
}

TEST_CASE("text_content collapses whitespace across nodes") {
  auto root = html::parse("<div>  Hello \n <b>world</b> ! </div>");
  CHECK(html::text_content(*root) == "Hello world !");
}

TEST_CASE("attribute values decode entities") {
  auto root = html::parse("<a href=\"x?a=1&amp;b=2\" title='&lt;t&gt;'>y</a>");
  const html::Node& a = *root->children[0];
  CHECK(a.attr("href") == "x?a=1&b=2");
  CHECK(a.attr("title") == "<t>");
}

TEST_CASE("for_each_element visits in document order") {
  auto root = html::parse("<a><b></b><c><d></d></c></a><e></e>");
  std::vector<std::string> tags;
  html::for_each_element(*root, [&](const html::Node& n) { tags.push_back(n.tag); });
  CHECK(tags == std::vector<std::string>{"a", "b", "c", "d", "e"});
}

TEST_CASE("uppercase tags and attributes are lowercased") {
  auto root = html::parse("<DIV ID=\"x\"><P>t</P></DIV>");
  const html::Node& div = *root->children[0];
  CHECK(div.tag == "div");
  CHECK(div.attr("id") == "x");
  CHECK(div.children[0]->tag == "p");
}
