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

// Exhaustive inner-product ranking. Candidate sets are a few hundred
// links per page, so a full scan is both exact and faster than any
// index would be at this size. Ties break on ascending URL to keep
// rankings reproducible across platforms.

#include <algorithm>
#include <string>
#include <vector>

#include "crawldoc/embedder.hpp"
#include "crawldoc/errors.hpp"

namespace crawldoc::ranker {

struct Candidate {
  std::string url;
  embedder::EmbeddingVector vec;
};

struct RankedEntry {
  std::string url;
  double score = 0;
};

struct RankedList {
  std::string query_url;
  std::vector<RankedEntry> entries;
  bool produced_with_layout = true;

  std::vector<std::string> urls() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.url);
    return out;
  }
};

/// Inner product between a query vector and a document vector. Both
/// sides must be tagged with the matching role and share a dimension.
inline double score(const embedder::EmbeddingVector& query,
                    const embedder::EmbeddingVector& document) {
  if (query.role != embedder::Role::query)
    throw ContractError("score: left operand is not a query vector");
  if (document.role != embedder::Role::document)
    throw ContractError("score: right operand is not a document vector");
  if (query.dim() != document.dim())
    throw ContractError("score: dimension mismatch (" + std::to_string(query.dim()) + " vs " +
                        std::to_string(document.dim()) + ")");
  return embedder::dot(query.values, document.values);
}

/// Scores every candidate and sorts by descending score, then by
/// ascending URL. Duplicate candidate URLs make the ranking ambiguous
/// and are rejected.
inline RankedList rank(const embedder::EmbeddingVector& query,
                       const std::vector<Candidate>& candidates,
                       const std::string& query_url = {}) {
  if (candidates.empty()) throw ArgumentError("rank: empty candidate set");
  RankedList out;
  out.query_url = query_url;
  out.entries.reserve(candidates.size());
  for (const auto& c : candidates) out.entries.push_back({c.url, score(query, c.vec)});

  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.url < b.url;
  });
  for (size_t i = 1; i < out.entries.size(); ++i) {
    if (out.entries[i].url == out.entries[i - 1].url)
      throw ArgumentError("rank: duplicate candidate url " + out.entries[i].url);
  }
  return out;
}

/// First k entries of the ranking (all of them when k exceeds size).
inline std::vector<RankedEntry> top_k(const RankedList& list, size_t k) {
  size_t n = std::min(k, list.entries.size());
  return std::vector<RankedEntry>(list.entries.begin(), list.entries.begin() + n);
}

}  // namespace crawldoc::ranker
