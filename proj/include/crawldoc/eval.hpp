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

#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crawldoc/errors.hpp"

namespace crawldoc::eval {

using nlohmann::json;

/// One evaluation query: the ranked candidate URLs of a landing page and
/// the ground-truth relevant set.
struct QueryResult {
  std::string publication_id;
  std::string publisher;
  std::vector<std::string> ranked_urls;  // duplicate-free, best first
  std::set<std::string> relevant_urls;
};

struct PrecisionRecallF1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// 1/rank of the first relevant URL; 0 when none of the relevant URLs
/// appears in the ranking.
inline double reciprocal_rank(const QueryResult& q) {
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

/// Mean of precision@r over the ranks r holding relevant documents.
/// Relevant URLs missing from the ranking contribute zero (the denominator
/// is the full relevant count).
inline double average_precision(const QueryResult& q) {
  if (q.relevant_urls.empty())
    throw ArgumentError("average_precision undefined for a query with no relevant documents");
  size_t hits = 0;
  double sum = 0;
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(q.relevant_urls.size());
}

/// Binary-gain nDCG with discount 1/log2(rank+1), normalized by the ideal
/// DCG over all relevant documents of the query.
inline double ndcg(const QueryResult& q) {
  if (q.relevant_urls.empty())
    throw ArgumentError("ndcg undefined for a query with no relevant documents");
  double dcg = 0;
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i]))
      dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  double idcg = 0;
  for (size_t i = 0; i < q.relevant_urls.size(); ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  return dcg / idcg;
}

/// precision@k = hits/k, recall@k = hits/|relevant|, f1 their harmonic mean
/// (zero when both are zero). When k exceeds the list length, hits are
/// counted over the full list; the precision denominator stays k.
inline PrecisionRecallF1 prf_at_k(const QueryResult& q, size_t k) {
  if (k < 1) throw ArgumentError("prf_at_k requires k >= 1");
  if (q.relevant_urls.empty())
    throw ArgumentError("prf_at_k undefined for a query with no relevant documents");
  size_t cutoff = std::min(k, q.ranked_urls.size());
  size_t hits = 0;
  for (size_t i = 0; i < cutoff; ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) ++hits;
  }
  PrecisionRecallF1 out;
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(q.relevant_urls.size());
  out.f1 = (out.precision + out.recall) == 0
               ? 0.0
               : 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation. Per-publisher values are means over that publisher's
// queries; the overall value is the unweighted (macro) mean over
// publishers.
// ---------------------------------------------------------------------------

constexpr size_t kDefaultMaxK = 10;

struct PerQueryMetrics {
  std::string publication_id;
  std::string publisher;
  double rr = 0;
  std::optional<double> ap;    // absent when the query has no relevant docs
  std::optional<double> ndcg;
  std::map<size_t, PrecisionRecallF1> at_k;
};

struct MetricValues {
  double mrr = 0;
  double map = 0;
  double ndcg = 0;
  std::map<size_t, PrecisionRecallF1> at_k;
};

struct MetricsReport {
  std::vector<PerQueryMetrics> per_query;
  std::map<std::string, MetricValues> per_publisher;
  MetricValues overall;
  size_t excluded_queries = 0;  // queries without relevant docs, skipped for ap/ndcg
};

/// Computes rr/ap/ndcg plus p/r/f1 for k in [1, max_k] for one query.
inline PerQueryMetrics compute_query_metrics(const QueryResult& q, size_t max_k = kDefaultMaxK) {
  PerQueryMetrics m;
  m.publication_id = q.publication_id;
  m.publisher = q.publisher;
  m.rr = reciprocal_rank(q);
  if (!q.relevant_urls.empty()) {
    m.ap = average_precision(q);
    m.ndcg = ndcg(q);
    for (size_t k = 1; k <= max_k; ++k) m.at_k[k] = prf_at_k(q, k);
  }
  return m;
}

inline MetricsReport aggregate(const std::vector<PerQueryMetrics>& per_query) {
  if (per_query.empty()) throw ArgumentError("aggregate: no queries");

  struct Acc {
    double rr = 0, ap = 0, ndcg = 0;
    size_t n = 0, n_scored = 0;
    std::map<size_t, PrecisionRecallF1> at_k_sum;
  };
  std::map<std::string, Acc> by_pub;
  MetricsReport report;
  report.per_query = per_query;

  for (const auto& q : per_query) {
    Acc& acc = by_pub[q.publisher];
    acc.rr += q.rr;
    ++acc.n;
    if (q.ap) {
      acc.ap += *q.ap;
      acc.ndcg += *q.ndcg;
      ++acc.n_scored;
      for (const auto& [k, v] : q.at_k) {
        auto& s = acc.at_k_sum[k];
        s.precision += v.precision;
        s.recall += v.recall;
        s.f1 += v.f1;
      }
    } else {
      ++report.excluded_queries;
    }
  }

  size_t n_pub = 0, n_pub_scored = 0;
  for (auto& [publisher, acc] : by_pub) {
    MetricValues v;
    v.mrr = acc.rr / static_cast<double>(acc.n);
    if (acc.n_scored > 0) {
      v.map = acc.ap / static_cast<double>(acc.n_scored);
      v.ndcg = acc.ndcg / static_cast<double>(acc.n_scored);
      for (const auto& [k, s] : acc.at_k_sum) {
        v.at_k[k] = {s.precision / static_cast<double>(acc.n_scored),
                     s.recall / static_cast<double>(acc.n_scored),
                     s.f1 / static_cast<double>(acc.n_scored)};
      }
    }
    report.overall.mrr += v.mrr;
    ++n_pub;
    if (acc.n_scored > 0) {
      report.overall.map += v.map;
      report.overall.ndcg += v.ndcg;
      for (const auto& [k, s] : v.at_k) {
        auto& o = report.overall.at_k[k];
        o.precision += s.precision;
        o.recall += s.recall;
        o.f1 += s.f1;
      }
      ++n_pub_scored;
    }
    report.per_publisher[publisher] = std::move(v);
  }
  report.overall.mrr /= static_cast<double>(n_pub);
  if (n_pub_scored > 0) {
    report.overall.map /= static_cast<double>(n_pub_scored);
    report.overall.ndcg /= static_cast<double>(n_pub_scored);
    for (auto& [k, o] : report.overall.at_k) {
      o.precision /= static_cast<double>(n_pub_scored);
      o.recall /= static_cast<double>(n_pub_scored);
      o.f1 /= static_cast<double>(n_pub_scored);
    }
  }
  return report;
}

/// Cut-off sweep over k in [1, max_k]. Macro mode averages per publisher
/// first (the default); micro mode averages over queries directly.
inline std::map<size_t, PrecisionRecallF1> run_cutoff_sweep(
    const std::vector<PerQueryMetrics>& per_query, size_t max_k = kDefaultMaxK,
    bool macro = true) {
  if (macro) return aggregate(per_query).overall.at_k;

  std::map<size_t, PrecisionRecallF1> out;
  size_t n = 0;
  for (const auto& q : per_query) {
    if (!q.ap) continue;
    ++n;
    for (size_t k = 1; k <= max_k; ++k) {
      auto it = q.at_k.find(k);
      if (it == q.at_k.end()) continue;
      out[k].precision += it->second.precision;
      out[k].recall += it->second.recall;
      out[k].f1 += it->second.f1;
    }
  }
  if (n > 0) {
    for (auto& [k, v] : out) {
      v.precision /= static_cast<double>(n);
      v.recall /= static_cast<double>(n);
      v.f1 /= static_cast<double>(n);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline json to_json(const MetricValues& v) {
  json at_k = json::object();
  for (const auto& [k, s] : v.at_k) {
    at_k[std::to_string(k)] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return json{{"mrr", v.mrr}, {"map", v.map}, {"ndcg", v.ndcg}, {"at_k", at_k}};
}

inline json to_json(const MetricsReport& r) {
  json per_publisher = json::object();
  for (const auto& [p, v] : r.per_publisher) per_publisher[p] = to_json(v);
  json per_query = json::array();
  for (const auto& q : r.per_query) {
    json jq{{"publication_id", q.publication_id}, {"publisher", q.publisher}, {"rr", q.rr}};
    if (q.ap) {
      jq["ap"] = *q.ap;
      jq["ndcg"] = *q.ndcg;
    }
    per_query.push_back(std::move(jq));
  }
  return json{{"schema_version", 1},
              {"overall", to_json(r.overall)},
              {"per_publisher", per_publisher},
              {"per_query", per_query},
              {"excluded_queries", r.excluded_queries}};
}

/// Aligned text table: publishers as columns, one row per metric.
inline std::string format_table(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(8) << "";
  for (const auto& [p, v] : r.per_publisher) os << std::setw(12) << p;
  os << std::setw(12) << "All" << "\n";
  auto row = [&](const char* name, auto getter) {
    os << std::left << std::setw(8) << name;
    for (const auto& [p, v] : r.per_publisher) os << std::setw(12) << getter(v);
    os << std::setw(12) << getter(r.overall) << "\n";
  };
  row("MRR", [](const MetricValues& v) { return v.mrr; });
  row("MAP", [](const MetricValues& v) { return v.map; });
  row("nDCG", [](const MetricValues& v) { return v.ndcg; });
  return os.str();
}

/// CSV with one row per k: k,precision,recall,f1.
inline std::string format_k_table_csv(const std::map<size_t, PrecisionRecallF1>& table) {
  std::ostringstream os;
  os << "k,precision,recall,f1\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& [k, v] : table)
    os << k << "," << v.precision << "," << v.recall << "," << v.f1 << "\n";
  return os.str();
}

}  // namespace crawldoc::eval
