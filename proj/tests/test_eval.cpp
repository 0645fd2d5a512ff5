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

#include <cmath>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "crawldoc/eval.hpp"
#include "crawldoc/util.hpp"

using namespace crawldoc;
using namespace crawldoc::eval;

namespace {

QueryResult make_query(std::vector<std::string> ranked, std::vector<std::string> relevant,
                       const std::string& publisher = "pub") {
  QueryResult q;
  q.publication_id = "q";
  q.publisher = publisher;
  q.ranked_urls = std::move(ranked);
  q.relevant_urls.insert(relevant.begin(), relevant.end());
  return q;
}

// Independent oracles, written from the textbook formulas with a
// different computation shape (prefix sums, natural logs).
double oracle_rr(const QueryResult& q) {
  size_t rank = 0;
  for (size_t i = 0; i < q.ranked_urls.size() && rank == 0; ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) rank = i + 1;
  }
  return rank == 0 ? 0.0 : 1.0 / static_cast<double>(rank);
}

double oracle_ap(const QueryResult& q) {
  std::vector<size_t> hits_prefix(q.ranked_urls.size() + 1, 0);
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    hits_prefix[i + 1] =
        hits_prefix[i] + (q.relevant_urls.count(q.ranked_urls[i]) ? 1 : 0);
  }
  double total = 0;
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i]))
      total += static_cast<double>(hits_prefix[i + 1]) / static_cast<double>(i + 1);
  }
  return total / static_cast<double>(q.relevant_urls.size());
}

double oracle_ndcg(const QueryResult& q) {
  auto discount = [](size_t rank) { return std::log(2.0) / std::log(static_cast<double>(rank) + 1.0); };
  double dcg = 0;
  for (size_t i = 0; i < q.ranked_urls.size(); ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) dcg += discount(i + 1);
  }
  double ideal = 0;
  for (size_t r = 1; r <= q.relevant_urls.size(); ++r) ideal += discount(r);
  return dcg / ideal;
}

PrecisionRecallF1 oracle_prf(const QueryResult& q, size_t k) {
  size_t hits = 0;
  for (size_t i = 0; i < q.ranked_urls.size() && i < k; ++i) {
    if (q.relevant_urls.count(q.ranked_urls[i])) ++hits;
  }
  PrecisionRecallF1 out;
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(q.relevant_urls.size());
  double denom = out.precision + out.recall;
  out.f1 = denom == 0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

}  // namespace

TEST_CASE("metrics on a worked example") {
  // Ranking: irrelevant, relevant, irrelevant, relevant; 2 relevant total.
  QueryResult q = make_query({"i1", "r1", "i2", "r2"}, {"r1", "r2"});

  CHECK(reciprocal_rank(q) == Catch::Approx(0.5));
  CHECK(average_precision(q) == Catch::Approx(0.5));  // (1/2 + 2/4) / 2
  double expected_ndcg =
      (1.0 / std::log2(3.0) + 1.0 / std::log2(5.0)) / (1.0 + 1.0 / std::log2(3.0));
  CHECK(ndcg(q) == Catch::Approx(expected_ndcg).epsilon(1e-12));

  auto k1 = prf_at_k(q, 1);
  CHECK(k1.precision == 0.0);
  CHECK(k1.recall == 0.0);
  CHECK(k1.f1 == 0.0);
  auto k2 = prf_at_k(q, 2);
  CHECK(k2.precision == Catch::Approx(0.5));
  CHECK(k2.recall == Catch::Approx(0.5));
  CHECK(k2.f1 == Catch::Approx(0.5));
  auto k4 = prf_at_k(q, 4);
  CHECK(k4.precision == Catch::Approx(0.5));
  CHECK(k4.recall == Catch::Approx(1.0));
  CHECK(k4.f1 == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("perfect and degenerate rankings") {
  QueryResult perfect = make_query({"r1", "r2", "i1"}, {"r1", "r2"});
  CHECK(reciprocal_rank(perfect) == 1.0);
  CHECK(average_precision(perfect) == 1.0);
  CHECK(ndcg(perfect) == Catch::Approx(1.0));

  // Relevant URLs exist but none was ranked.
  QueryResult missed = make_query({"i1", "i2"}, {"r1"});
  CHECK(reciprocal_rank(missed) == 0.0);
  CHECK(average_precision(missed) == 0.0);
  CHECK(ndcg(missed) == 0.0);
  CHECK(prf_at_k(missed, 2).recall == 0.0);

  QueryResult empty_rel = make_query({"i1"}, {});
  CHECK(reciprocal_rank(empty_rel) == 0.0);
  CHECK_THROWS_AS(average_precision(empty_rel), ArgumentError);
  CHECK_THROWS_AS(ndcg(empty_rel), ArgumentError);
  CHECK_THROWS_AS(prf_at_k(empty_rel, 1), ArgumentError);
  CHECK_THROWS_AS(prf_at_k(make_query({"a"}, {"a"}), 0), ArgumentError);
}

TEST_CASE("k beyond the list length keeps the k denominator") {
  QueryResult q = make_query({"r1", "r2"}, {"r1", "r2"});
  auto k5 = prf_at_k(q, 5);
  CHECK(k5.precision == Catch::Approx(0.4));  // 2/5
  CHECK(k5.recall == Catch::Approx(1.0));
}

TEST_CASE("metrics agree with independent oracles on random queries") {
  Rng rng(20240817);
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 1 + uniform_below(rng, 30);
    std::vector<std::string> ranked;
    for (size_t i = 0; i < n; ++i) ranked.push_back("u" + std::to_string(i));
    shuffle_deterministic(ranked, rng);

    std::vector<std::string> relevant;
    for (size_t i = 0; i < n; ++i) {
      if (uniform_below(rng, 3) == 0) relevant.push_back("u" + std::to_string(i));
    }
    // Sometimes add relevant URLs that are absent from the ranking.
    if (uniform_below(rng, 4) == 0) relevant.push_back("missing");
    if (relevant.empty()) relevant.push_back("u0");

    QueryResult q = make_query(ranked, relevant);
    CHECK(reciprocal_rank(q) == Catch::Approx(oracle_rr(q)).margin(1e-12));
    CHECK(average_precision(q) == Catch::Approx(oracle_ap(q)).margin(1e-12));
    CHECK(ndcg(q) == Catch::Approx(oracle_ndcg(q)).margin(1e-12));
    for (size_t k : {size_t{1}, size_t{3}, size_t{10}, n}) {
      auto got = prf_at_k(q, k);
      auto want = oracle_prf(q, k);
      CHECK(got.precision == Catch::Approx(want.precision).margin(1e-12));
      CHECK(got.recall == Catch::Approx(want.recall).margin(1e-12));
      CHECK(got.f1 == Catch::Approx(want.f1).margin(1e-12));
    }
  }
}

TEST_CASE("compute_query_metrics fills per-k entries") {
  QueryResult q = make_query({"r1", "i1"}, {"r1"});
  PerQueryMetrics m = compute_query_metrics(q, 5);
  CHECK(m.rr == 1.0);
  REQUIRE(m.ap.has_value());
  REQUIRE(m.ndcg.has_value());
  CHECK(m.at_k.size() == 5);
  CHECK(m.at_k.at(1).precision == 1.0);
  CHECK(m.at_k.at(5).precision == Catch::Approx(0.2));

  PerQueryMetrics none = compute_query_metrics(make_query({"i1"}, {}));
  CHECK_FALSE(none.ap.has_value());
  CHECK(none.at_k.empty());
}

TEST_CASE("aggregate macro-averages per publisher") {
  // Publisher a: rr 1.0 and 0.5 -> 0.75. Publisher b: rr 0.25.
  // Macro overall: (0.75 + 0.25) / 2 = 0.5; micro would be 0.583...
  std::vector<PerQueryMetrics> qs(3);
  qs[0] = {"q1", "a", 1.0, 1.0, 1.0, {}};
  qs[1] = {"q2", "a", 0.5, 0.5, 0.5, {}};
  qs[2] = {"q3", "b", 0.25, 0.25, 0.25, {}};
  MetricsReport r = aggregate(qs);
  CHECK(r.per_publisher.at("a").mrr == Catch::Approx(0.75));
  CHECK(r.per_publisher.at("b").mrr == Catch::Approx(0.25));
  CHECK(r.overall.mrr == Catch::Approx(0.5));
  CHECK(r.overall.map == Catch::Approx(0.5));
  CHECK(r.overall.ndcg == Catch::Approx(0.5));
  CHECK(r.excluded_queries == 0);
}

TEST_CASE("aggregate excludes relevance-free queries from map and ndcg only") {
  std::vector<PerQueryMetrics> qs(2);
  qs[0] = {"q1", "a", 1.0, 1.0, 1.0, {{1, {1.0, 1.0, 1.0}}}};
  qs[1] = {"q2", "a", 0.0, std::nullopt, std::nullopt, {}};
  MetricsReport r = aggregate(qs);
  CHECK(r.per_publisher.at("a").mrr == Catch::Approx(0.5));  // rr counts both
  CHECK(r.per_publisher.at("a").map == Catch::Approx(1.0));  // ap counts one
  CHECK(r.excluded_queries == 1);
  CHECK(r.overall.at_k.at(1).precision == Catch::Approx(1.0));

  CHECK_THROWS_AS(aggregate({}), ArgumentError);
}

TEST_CASE("cutoff sweep distinguishes macro from micro") {
  // Publisher a has two scored queries, b has one. P@1: a -> {1, 0}, b -> {1}.
  // Macro: (0.5 + 1) / 2 = 0.75. Micro: 2/3.
  std::vector<PerQueryMetrics> qs(3);
  qs[0] = {"q1", "a", 1.0, 1.0, 1.0, {{1, {1.0, 1.0, 1.0}}}};
  qs[1] = {"q2", "a", 0.0, 0.0, 0.0, {{1, {0.0, 0.0, 0.0}}}};
  qs[2] = {"q3", "b", 1.0, 1.0, 1.0, {{1, {1.0, 1.0, 1.0}}}};
  auto macro = run_cutoff_sweep(qs, 1, true);
  auto micro = run_cutoff_sweep(qs, 1, false);
  CHECK(macro.at(1).precision == Catch::Approx(0.75));
  CHECK(micro.at(1).precision == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("report serialization carries the structure") {
  QueryResult q = make_query({"r1"}, {"r1"}, "pressx");
  MetricsReport r = aggregate({compute_query_metrics(q, 2)});
  json j = to_json(r);
  CHECK(j["schema_version"] == 1);
  CHECK(j["overall"]["mrr"] == 1.0);
  CHECK(j["per_publisher"].contains("pressx"));
  CHECK(j["per_query"].size() == 1);
  CHECK(j["overall"]["at_k"]["2"]["recall"] == 1.0);

  std::string table = format_table(r);
  CHECK(table.find("pressx") != std::string::npos);
  CHECK(table.find("MRR") != std::string::npos);
  CHECK(table.find("nDCG") != std::string::npos);

  std::string csv = format_k_table_csv(r.overall.at_k);
  CHECK(csv.rfind("k,precision,recall,f1\n", 0) == 0);
  CHECK(csv.find("\n1,") != std::string::npos);
  CHECK(csv.find("\n2,") != std::string::npos);
}

TEST_CASE("per-publisher single-query rows reproduce their macro mean") {
  // Six publishers, one query each; the overall figure must equal the
  // plain mean of the per-publisher figures.
  std::vector<double> rows = {1.000, 0.800, 1.000, 1.000, 1.000, 1.000};
  std::vector<PerQueryMetrics> qs;
  for (size_t i = 0; i < rows.size(); ++i) {
    PerQueryMetrics m;
    m.publication_id = "q" + std::to_string(i);
    m.publisher = "pub" + std::to_string(i);
    m.rr = rows[i];
    m.ap = rows[i];
    m.ndcg = rows[i];
    qs.push_back(m);
  }
  MetricsReport r = aggregate(qs);
  CHECK(r.overall.mrr == Catch::Approx(mean_of(rows)).margin(1e-12));
  CHECK(r.overall.mrr == Catch::Approx(0.967).margin(5e-4));
}
