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

#include <algorithm>
#include <numeric>
#include <set>

#include "catch2/catch_amalgamated.hpp"
#include "crawldoc/util.hpp"

using namespace crawldoc;

TEST_CASE("collapse_whitespace squeezes runs and trims ends") {
  CHECK(collapse_whitespace("") == "");
  CHECK(collapse_whitespace("   ") == "");
  CHECK(collapse_whitespace("a") == "a");
  CHECK(collapse_whitespace("  a  b\t\nc ") == "a b c");
  CHECK(collapse_whitespace("a\r\nb") == "a b");
}

TEST_CASE("trim removes surrounding whitespace only") {
  CHECK(trim("  x y  ") == "x y");
  CHECK(trim("\t\n") == "");
  CHECK(trim("abc") == "abc");
}

TEST_CASE("whitespace_tokens splits on runs") {
  auto toks = whitespace_tokens("  one two\tthree\n");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == "one");
  CHECK(toks[1] == "two");
  CHECK(toks[2] == "three");
  CHECK(whitespace_tokens("").empty());
  CHECK(whitespace_tokens(" \t ").empty());
}

TEST_CASE("starts_with_ci ignores case") {
  CHECK(starts_with_ci("Content-Type: text", "content-type"));
  CHECK(starts_with_ci("ABC", "abc"));
  CHECK_FALSE(starts_with_ci("ab", "abc"));
  CHECK_FALSE(starts_with_ci("xbc", "abc"));
}

TEST_CASE("uniform_below stays in range and is deterministic") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    uint64_t n = 1 + static_cast<uint64_t>(i % 97);
    uint64_t x = uniform_below(a, n);
    CHECK(x < n);
    CHECK(x == uniform_below(b, n));
  }
  Rng c(7);
  CHECK(uniform_below(c, 0) == 0);
  CHECK(uniform_below(c, 1) == 0);
}

TEST_CASE("uniform_below covers the whole range") {
  Rng rng(3);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(uniform_below(rng, 8));
  CHECK(seen.size() == 8);
}

TEST_CASE("shuffle_deterministic permutes and reproduces") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng a(9), b(9);
  shuffle_deterministic(v, a);
  shuffle_deterministic(w, b);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
  CHECK(v != expect);  // 50 elements: identity is astronomically unlikely
}

TEST_CASE("sample_without_replacement yields distinct indices") {
  Rng rng(11);
  auto s = sample_without_replacement(rng, 20, 7);
  REQUIRE(s.size() == 7);
  std::set<size_t> uniq(s.begin(), s.end());
  CHECK(uniq.size() == 7);
  for (size_t i : s) CHECK(i < 20);

  auto all = sample_without_replacement(rng, 5, 99);  // k clamps to n
  REQUIRE(all.size() == 5);
  std::set<size_t> uniq2(all.begin(), all.end());
  CHECK(uniq2 == std::set<size_t>({0, 1, 2, 3, 4}));

  Rng x(123), y(123);
  CHECK(sample_without_replacement(x, 30, 10) == sample_without_replacement(y, 30, 10));
}

TEST_CASE("mean and standard deviation match hand-computed values") {
  std::vector<double> xs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(mean_of(xs) == Catch::Approx(5.0));
  CHECK(stddev_of(xs) == Catch::Approx(2.0));  // classic population-sd example
  CHECK(stddev_of(xs, true) == Catch::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(mean_of({}) == 0.0);
  CHECK(stddev_of({}) == 0.0);
  CHECK(stddev_of({3.0}, true) == 0.0);
}

TEST_CASE("stddev agrees with a naive two-pass oracle") {
  Rng rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i)
    xs.push_back(static_cast<double>(uniform_below(rng, 1000)) / 31.0);
  double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double acc = 0;
  for (double x : xs) acc += (x - m) * (x - m);
  CHECK(stddev_of(xs) == Catch::Approx(std::sqrt(acc / xs.size())).epsilon(1e-12));
  CHECK(stddev_of(xs, true) == Catch::Approx(std::sqrt(acc / (xs.size() - 1))).epsilon(1e-12));
}

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // Exercise the multi-block path (message > 64 bytes).
  CHECK(sha256_hex(std::string(1000, 'a')) ==
        "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 14695981039346656037ull);          // offset basis
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(fnv1a64("x", 1) != fnv1a64("x", 2));  // seed perturbs the basis
  CHECK(fnv1a64("x", 0) == fnv1a64("x"));
}
