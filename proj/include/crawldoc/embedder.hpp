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

// Embedding backends and model-input assembly. Inputs are flat strings:
// anchor text, URL and serialized page content joined with a [SEP]
// marker, truncated to the backend's token budget, then embedded to a
// unit-norm vector. The hashing backend keeps everything testable and
// dependency-free; remote backends plug in behind the same interface.

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "crawldoc/docrepr.hpp"
#include "crawldoc/errors.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::embedder {

enum class Role { query, document };

inline const char* role_name(Role r) { return r == Role::query ? "query" : "document"; }

struct EmbeddingVector {
  std::vector<double> values;
  Role role = Role::document;

  size_t dim() const { return values.size(); }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("dot: dimension mismatch");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

/// Scales v to unit L2 norm in place. Zero vectors are left untouched.
inline void normalize(std::vector<double>& v) {
  double n = norm(v);
  if (n == 0) return;
  for (double& x : v) x /= n;
}

constexpr std::string_view kSeparator = "[SEP]";
constexpr size_t kDefaultMaxTokens = 2048;

/// Abstract embedding backend. Implementations must return unit-norm
/// vectors of a fixed dimension and tokenize deterministically.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  virtual size_t dimension() const = 0;
  virtual size_t max_tokens() const { return kDefaultMaxTokens; }

  /// Token count as seen by this backend; used for input truncation.
  virtual std::vector<std::string_view> tokenize(std::string_view text) const {
    return whitespace_tokens(text);
  }

  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& inputs,
                                             Role role) = 0;

  EmbeddingVector embed_one(const std::string& input, Role role) {
    auto batch = embed({input}, role);
    if (batch.size() != 1)
      throw BackendError(name() + ": expected 1 vector, got " + std::to_string(batch.size()));
    return std::move(batch.front());
  }
};

/// Deterministic signed-feature-hashing backend. Every token is hashed
/// to a bucket with a +/-1 sign; the counts vector is L2-normalized.
class HashBackend : public Backend {
 public:
  explicit HashBackend(size_t dim = 256, uint64_t seed = 0, size_t max_tokens = kDefaultMaxTokens)
      : dim_(dim), seed_(seed), max_tokens_(max_tokens) {
    if (dim_ == 0) throw ArgumentError("HashBackend: dimension must be positive");
  }

  std::string name() const override { return "hash-" + std::to_string(dim_); }
  size_t dimension() const override { return dim_; }
  size_t max_tokens() const override { return max_tokens_; }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& inputs,
                                     Role role) override {
    std::vector<EmbeddingVector> out;
    out.reserve(inputs.size());
    for (const auto& input : inputs) {
      EmbeddingVector v;
      v.role = role;
      v.values.assign(dim_, 0.0);
      auto tokens = tokenize(input);
      if (tokens.empty()) {
        v.values[0] = 1.0;  // fixed sentinel so empty inputs stay comparable
      } else {
        for (auto tok : tokens) {
          uint64_t h = fnv1a64(tok, seed_);
          size_t bucket = static_cast<size_t>(h % dim_);
          double sign = (h & 0x8000000000000000ull) ? -1.0 : 1.0;
          v.values[bucket] += sign;
        }
        normalize(v.values);
        if (norm(v.values) == 0) v.values[0] = 1.0;  // signs cancelled exactly
      }
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  size_t dim_;
  uint64_t seed_;
  size_t max_tokens_;
};

/// Renders representation blocks to the flat content string: one line
/// per block, text followed by the four quantized coordinates. When the
/// representation carries no layout the coordinates are omitted.
inline std::string serialize_content(const docrepr::DocumentRepresentation& repr) {
  std::string out;
  for (size_t i = 0; i < repr.blocks.size(); ++i) {
    if (i > 0) out.push_back('\n');
    const auto& b = repr.blocks[i];
    out += b.text;
    if (repr.layout_included) {
      for (int coord : b.bbox) {
        out.push_back(' ');
        out += std::to_string(coord);
      }
    }
  }
  return out;
}

/// Joins anchor, URL and content with the separator and truncates to
/// the backend token budget. The separator token must not occur inside
/// the anchor or the URL, otherwise the three fields would be
/// indistinguishable downstream.
inline std::string build_input(const Backend& backend, std::string_view anchor,
                               std::string_view url, std::string_view content) {
  if (anchor.find(kSeparator) != std::string_view::npos)
    throw ArgumentError("anchor text contains the reserved [SEP] marker");
  if (url.find(kSeparator) != std::string_view::npos)
    throw ArgumentError("url contains the reserved [SEP] marker");
  std::string input;
  input.reserve(anchor.size() + url.size() + content.size() + 2 * (kSeparator.size() + 2));
  input.append(anchor);
  input.append(" ").append(kSeparator).append(" ");
  input.append(url);
  input.append(" ").append(kSeparator).append(" ");
  input.append(content);
  std::string truncated(docrepr::truncate_tokens(
      input, backend.max_tokens(),
      [&backend](std::string_view s) { return backend.tokenize(s); }));
  return truncated;
}

/// Query input: the landing page itself, with an empty anchor slot.
inline std::string build_query_input(const Backend& backend,
                                     const docrepr::DocumentRepresentation& landing) {
  return build_input(backend, "", landing.source_url, serialize_content(landing));
}

/// Document input: the link's anchor text and target URL plus the
/// fetched target content.
inline std::string build_document_input(const Backend& backend, std::string_view anchor,
                                        std::string_view url,
                                        const docrepr::DocumentRepresentation& target) {
  return build_input(backend, anchor, url, serialize_content(target));
}

inline EmbeddingVector embed_query(Backend& backend,
                                   const docrepr::DocumentRepresentation& landing) {
  return backend.embed_one(build_query_input(backend, landing), Role::query);
}

inline EmbeddingVector embed_document(Backend& backend, std::string_view anchor,
                                      std::string_view url,
                                      const docrepr::DocumentRepresentation& target) {
  return backend.embed_one(build_document_input(backend, anchor, url, target), Role::document);
}

}  // namespace crawldoc::embedder
