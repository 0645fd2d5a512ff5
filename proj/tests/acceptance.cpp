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

// Release acceptance gate. Every check exercises one gate criterion end
// to end against an in-file oracle or a generated fixture corpus and
// prints exactly one "PASS - name" / "FAIL - name" line. Run without
// arguments for the whole gate, or name individual checks as arguments.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crawldoc/crawldoc.hpp"
#include "support/fixture_corpus.hpp"
#include "support/fixture_server.hpp"

using namespace crawldoc;
using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// On the first violated condition, record the source line and bail out.
#define NEED(cond)                                                                  \
  do {                                                                              \
    if (!(cond)) {                                                                  \
      why = "line " + std::to_string(__LINE__) + ": " #cond;                        \
      return false;                                                                 \
    }                                                                               \
  } while (0)

template <typename Fn>
bool throws_argument_error(Fn&& fn) {
  try {
    fn();
  } catch (const ArgumentError&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Brute-force metric oracles, written independently of eval.hpp: plain
// loops, log() instead of log2(), no shared helpers.
// ---------------------------------------------------------------------------

size_t oracle_hits_at(const std::vector<std::string>& ranked, const std::set<std::string>& rel,
                      size_t k) {
  size_t hits = 0;
  for (size_t i = 0; i < std::min(k, ranked.size()); ++i)
    if (rel.count(ranked[i])) ++hits;
  return hits;
}

double oracle_rr(const std::vector<std::string>& ranked, const std::set<std::string>& rel) {
  for (size_t i = 0; i < ranked.size(); ++i)
    if (rel.count(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double oracle_ap(const std::vector<std::string>& ranked, const std::set<std::string>& rel) {
  size_t hits = 0;
  double acc = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    if (rel.count(ranked[i])) {
      ++hits;
      acc += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return acc / static_cast<double>(rel.size());
}

double oracle_ndcg(const std::vector<std::string>& ranked, const std::set<std::string>& rel) {
  const double ln2 = std::log(2.0);
  double dcg = 0;
  for (size_t i = 0; i < ranked.size(); ++i)
    if (rel.count(ranked[i])) dcg += ln2 / std::log(static_cast<double>(i + 2));
  double ideal = 0;
  for (size_t j = 0; j < rel.size(); ++j) ideal += ln2 / std::log(static_cast<double>(j + 2));
  return dcg / ideal;
}

// Ranking metrics agree with the brute-force oracle on 240 random
// instances covering list lengths 1-150 and 0-10 relevant documents,
// including relevant URLs missing from the ranking. Budget: 5 s.
bool check_metric_oracles(std::string& why) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(20260823);
  const size_t n_instances = 240;
  for (size_t t = 0; t < n_instances; ++t) {
    size_t len = 1 + static_cast<size_t>(rng() % 150);
    size_t n_rel = static_cast<size_t>(rng() % 11);

    eval::QueryResult q;
    q.publication_id = "q" + std::to_string(t);
    q.publisher = "pub" + std::to_string(t % 6);
    for (size_t i = 0; i < len; ++i) q.ranked_urls.push_back("doc" + std::to_string(1000 + i));

    size_t max_in = std::min(n_rel, len);
    size_t n_in = max_in == 0 ? 0 : static_cast<size_t>(rng() % (max_in + 1));
    std::vector<size_t> order(len);
    std::iota(order.begin(), order.end(), size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < n_in; ++i) q.relevant_urls.insert(q.ranked_urls[order[i]]);
    for (size_t j = 0; n_in + j < n_rel; ++j) q.relevant_urls.insert("absent" + std::to_string(j));

    NEED(near(eval::reciprocal_rank(q), oracle_rr(q.ranked_urls, q.relevant_urls), 1e-9));
    if (q.relevant_urls.empty()) {
      NEED(throws_argument_error([&] { eval::average_precision(q); }));
      NEED(throws_argument_error([&] { eval::ndcg(q); }));
      NEED(throws_argument_error([&] { eval::prf_at_k(q, 5); }));
      continue;
    }
    NEED(near(eval::average_precision(q), oracle_ap(q.ranked_urls, q.relevant_urls), 1e-9));
    NEED(near(eval::ndcg(q), oracle_ndcg(q.ranked_urls, q.relevant_urls), 1e-9));
    for (size_t k = 1; k <= 10; ++k) {
      eval::PrecisionRecallF1 prf = eval::prf_at_k(q, k);
      size_t hits = oracle_hits_at(q.ranked_urls, q.relevant_urls, k);
      double p = static_cast<double>(hits) / static_cast<double>(k);
      double r = static_cast<double>(hits) / static_cast<double>(q.relevant_urls.size());
      double f = (p + r) == 0 ? 0.0 : 2 * p * r / (p + r);
      NEED(near(prf.precision, p, 1e-9));
      NEED(near(prf.recall, r, 1e-9));
      NEED(near(prf.f1, f, 1e-9));
    }
    eval::PerQueryMetrics m = eval::compute_query_metrics(q);
    NEED(m.rr == eval::reciprocal_rank(q));
    NEED(m.ap.has_value() && *m.ap == eval::average_precision(q));
    NEED(m.ndcg.has_value() && *m.ndcg == eval::ndcg(q));
  }
  NEED(seconds_since(t0) < 5.0);
  return true;
}

// Feeding reference per-publisher results through aggregate() reproduces
// their rounded overall column within half an ulp of three-decimal
// rounding. Two reference rows: full training and the leave-one-out
// robustness run. Budget: 1 s.
bool check_aggregation_consistency(std::string& why) {
  auto t0 = Clock::now();
  const std::array<std::string, 6> pubs = {"IEEE", "Springer", "Elsevier",
                                           "ACM",  "arXiv",    "MDPI"};
  struct Row {
    double mrr[6], map[6], ndcg[6];
    double overall[3];  // rounded MRR, MAP, nDCG across publishers
  };
  const Row full = {{1.000, 0.800, 1.000, 1.000, 1.000, 1.000},
                    {1.000, 0.998, 0.970, 0.999, 1.000, 0.954},
                    {1.000, 0.800, 0.985, 1.000, 1.000, 0.982},
                    {0.967, 0.987, 0.961}};
  const Row held_out = {{1.000, 0.757, 1.000, 1.000, 1.000, 1.000},
                        {1.000, 0.835, 0.996, 0.999, 1.000, 0.979},
                        {1.000, 0.772, 0.999, 1.000, 1.000, 0.992},
                        {0.959, 0.968, 0.961}};
  const double tol = 0.0005 + 1e-12;

  for (const Row* row : {&full, &held_out}) {
    std::vector<eval::PerQueryMetrics> per_query;
    for (size_t i = 0; i < pubs.size(); ++i) {
      eval::PerQueryMetrics m;
      m.publication_id = pubs[i];
      m.publisher = pubs[i];
      m.rr = row->mrr[i];
      m.ap = row->map[i];
      m.ndcg = row->ndcg[i];
      per_query.push_back(std::move(m));
    }
    eval::MetricsReport report = eval::aggregate(per_query);
    NEED(near(report.overall.mrr, row->overall[0], tol));
    NEED(near(report.overall.map, row->overall[1], tol));
    NEED(near(report.overall.ndcg, row->overall[2], tol));
    for (size_t i = 0; i < pubs.size(); ++i) {
      const eval::MetricValues& cell = report.per_publisher.at(pubs[i]);
      NEED(cell.mrr == row->mrr[i]);
      NEED(cell.map == row->map[i]);
      NEED(cell.ndcg == row->ndcg[i]);
    }
  }
  NEED(seconds_since(t0) < 1.0);
  return true;
}

// Exhaustive ranking equals an independent argsort oracle exactly, for
// 1,000 random unit vectors in dimensions 16 and 256, including
// deliberately constructed score ties that must break on ascending URL.
// Budget: 5 s.
bool check_ranking_exactness(std::string& why) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(415926);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t dim : {size_t{16}, size_t{256}}) {
    auto unit = [&] {
      std::vector<double> v(dim);
      for (double& x : v) x = gauss(rng);
      embedder::normalize(v);
      return v;
    };

    const size_t n = 1000;
    std::vector<ranker::Candidate> cands(n);
    char buf[16];
    for (size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "c%04zu", i);
      cands[i].url = buf;
      cands[i].vec.values = unit();
      cands[i].vec.role = embedder::Role::document;
    }
    // Ties: 25 far-apart URL pairs share a vector, plus one triple.
    for (size_t j = 0; j < 25; ++j) cands[900 + j].vec.values = cands[j * 7].vec.values;
    cands[951].vec.values = cands[950].vec.values;
    cands[952].vec.values = cands[950].vec.values;

    embedder::EmbeddingVector query;
    query.values = unit();
    query.role = embedder::Role::query;

    ranker::RankedList ranked = ranker::rank(query, cands, "probe://query");
    NEED(ranked.entries.size() == n);

    // Oracle: same left-to-right accumulation, explicit argsort.
    struct Scored {
      double s;
      const std::string* url;
    };
    std::vector<Scored> oracle(n);
    for (size_t i = 0; i < n; ++i) {
      double s = 0;
      for (size_t k = 0; k < dim; ++k) s += query.values[k] * cands[i].vec.values[k];
      oracle[i] = {s, &cands[i].url};
    }
    std::sort(oracle.begin(), oracle.end(), [](const Scored& a, const Scored& b) {
      if (a.s != b.s) return a.s > b.s;
      return *a.url < *b.url;
    });
    for (size_t i = 0; i < n; ++i) {
      NEED(ranked.entries[i].url == *oracle[i].url);
      NEED(ranked.entries[i].score == oracle[i].s);
    }

    // The constructed triple is score-tied, so it must come out in URL order.
    auto position = [&](const std::string& u) {
      for (size_t i = 0; i < n; ++i)
        if (ranked.entries[i].url == u) return i;
      return n;
    };
    NEED(position("c0950") + 1 == position("c0951"));
    NEED(position("c0951") + 1 == position("c0952"));
  }
  NEED(seconds_since(t0) < 5.0);
  return true;
}

// Analytic contrastive-loss gradients match central finite differences
// on 50 random instances (d=16, 1 positive, 3-15 negatives, temperature
// in {0.05, 0.5, 1.0}); the all-equal-scores case yields exactly
// ln(N+1). Budget: 10 s.
bool check_loss_gradients(std::string& why) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(271828);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const size_t d = 16;
  const double taus[3] = {0.05, 0.5, 1.0};
  auto unit = [&] {
    std::vector<double> v(d);
    for (double& x : v) x = gauss(rng);
    embedder::normalize(v);
    return v;
  };

  for (size_t t = 0; t < 50; ++t) {
    const double tau = taus[t % 3];
    const size_t m = 3 + static_cast<size_t>(rng() % 13);
    std::vector<double> query = unit();
    std::vector<double> positive = unit();
    std::vector<std::vector<double>> negatives(m);
    for (auto& neg : negatives) neg = unit();

    trainer::InfoNceResult res = trainer::info_nce(query, positive, negatives, tau);
    std::vector<double> analytic;
    analytic.insert(analytic.end(), res.grad_query.begin(), res.grad_query.end());
    analytic.insert(analytic.end(), res.grad_positive.begin(), res.grad_positive.end());
    for (const auto& g : res.grad_negatives) analytic.insert(analytic.end(), g.begin(), g.end());

    const double h = 1e-6;
    std::vector<double> numeric;
    auto central_diff = [&](std::vector<double>& vec) {
      for (size_t k = 0; k < vec.size(); ++k) {
        const double orig = vec[k];
        vec[k] = orig + h;
        double up = trainer::info_nce(query, positive, negatives, tau).loss;
        vec[k] = orig - h;
        double down = trainer::info_nce(query, positive, negatives, tau).loss;
        vec[k] = orig;
        numeric.push_back((up - down) / (2 * h));
      }
    };
    central_diff(query);
    central_diff(positive);
    for (auto& neg : negatives) central_diff(neg);

    NEED(analytic.size() == numeric.size());
    double diff2 = 0, ref2 = 0;
    for (size_t k = 0; k < analytic.size(); ++k) {
      diff2 += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      ref2 += analytic[k] * analytic[k];
    }
    NEED(ref2 > 0);
    NEED(std::sqrt(diff2 / ref2) < 1e-4);
  }

  // Positive and negatives identical: uniform softmax, loss ln(N+1).
  for (size_t n_neg : {size_t{3}, size_t{7}, size_t{15}}) {
    for (double tau : {0.05, 1.0}) {
      std::vector<double> query = unit();
      std::vector<double> shared = unit();
      std::vector<std::vector<double>> negatives(n_neg, shared);
      double loss = trainer::info_nce(query, shared, negatives, tau).loss;
      NEED(near(loss, std::log(static_cast<double>(n_neg) + 1.0), 1e-9));
    }
  }
  NEED(seconds_since(t0) < 10.0);
  return true;
}

// Full pipeline on a six-publisher fixture corpus (10 landing pages per
// publisher, 20 links per page, 2-6 relevant among them): crawl from a
// local server, embed with the hash backend, train projection heads
// with the stock training configuration. Held-out test MRR must be 1.0
// with recall@10 of at least 0.95, and a rerun under the same seed must
// reproduce the heads bit for bit. Budget: 60 s.
bool check_end_to_end(std::string& why) {
  auto t0 = Clock::now();
  FixtureServer server;
  FixtureData fx = make_main_fixture(server.base_url(), 6, 10);
  fx.install(server);
  std::vector<experiments::PageData> pages = crawl_fixture_pages(fixture_policy(), fx);
  NEED(pages.size() == 60);

  embedder::HashBackend backend(1024);
  experiments::ExperimentConfig config;  // stock TrainConfig and split
  experiments::PipelineResult first = experiments::run_pipeline(backend, pages, config);
  NEED(first.split.test.size() == 6);
  NEED(first.report.overall.mrr == 1.0);
  NEED(first.report.overall.at_k.at(10).recall >= 0.95);

  experiments::PipelineResult second = experiments::run_pipeline(backend, pages, config);
  NEED(first.training.query_head.a == second.training.query_head.a);
  NEED(first.training.document_head.a == second.training.document_head.a);
  NEED(first.report.overall.mrr == second.report.overall.mrr);
  NEED(first.report.overall.map == second.report.overall.map);
  NEED(seconds_since(t0) < 60.0);
  return true;
}

// Leave-one-out protocol on the same fixture corpus: six models, each
// trained without the held-out publisher. The provenance log of every
// fold must be free of the held-out publisher's pages, and every
// held-out evaluation must reach MRR >= 0.9. Budget: 5 min.
bool check_leave_one_out(std::string& why) {
  auto t0 = Clock::now();
  FixtureServer server;
  FixtureData fx = make_main_fixture(server.base_url(), 6, 10);
  fx.install(server);
  std::vector<experiments::PageData> pages = crawl_fixture_pages(fixture_policy(), fx);

  std::map<std::string, std::string> publisher_of;
  for (const auto& pub : fx.dataset.publications) publisher_of[pub.id] = pub.publisher;

  embedder::HashBackend backend(1024);
  experiments::ExperimentConfig config;
  experiments::LooResult loo = experiments::run_leave_one_out(backend, pages, config);
  NEED(loo.per_publisher.size() == 6);
  for (const auto& fold : loo.per_publisher) {
    NEED(fold.n_train_examples > 0);
    NEED(!fold.train_publications.empty());
    for (const auto& id : fold.train_publications) {
      NEED(publisher_of.count(id) == 1);
      NEED(publisher_of.at(id) != fold.publisher);
    }
    NEED(fold.report.overall.mrr >= 0.9);
  }
  NEED(seconds_since(t0) < 300.0);
  return true;
}

// A 3,000-token input truncates to exactly the 2,048-token budget, with
// the anchor text and URL fields fully retained at the front; inputs
// within budget come back byte-identical.
bool check_truncation(std::string& why) {
  embedder::HashBackend backend(64);
  const std::string anchor = "alpha beta gamma delta";
  const std::string url = "http://fixture.test/landing";
  const size_t total = 3000;
  const size_t overhead = 7;  // 4 anchor tokens + 2 separators + 1 url token
  std::string content;
  for (size_t i = 0; i < total - overhead; ++i) {
    if (!content.empty()) content.push_back(' ');
    content += "tok" + std::to_string(i);
  }
  std::string raw = anchor + " [SEP] " + url + " [SEP] " + content;
  NEED(backend.tokenize(raw).size() == total);

  std::string input = embedder::build_input(backend, anchor, url, content);
  std::vector<std::string_view> tokens = backend.tokenize(input);
  NEED(backend.max_tokens() == 2048);
  NEED(tokens.size() == 2048);
  NEED(tokens[0] == "alpha");
  NEED(tokens[1] == "beta");
  NEED(tokens[2] == "gamma");
  NEED(tokens[3] == "delta");
  NEED(tokens[4] == "[SEP]");
  NEED(tokens[5] == url);
  NEED(tokens[6] == "[SEP]");
  NEED(tokens[7] == "tok0");

  const std::string short_content = "just a few words";
  std::string untouched = embedder::build_input(backend, anchor, url, short_content);
  NEED(untouched == anchor + " [SEP] " + url + " [SEP] " + short_content);
  return true;
}

// Building the representation of every fixture document twice from
// scratch yields byte-identical canonical JSON, and stripping layout
// preserves the concatenated text exactly.
bool check_representation_determinism(std::string& why) {
  FixtureData fx = make_main_fixture("http://fixture.test:1", 6, 10);
  size_t n_docs = 0;
  for (const auto& [path, route] : fx.routes) {
    const std::string& body = route.first;
    const bool is_pdf = route.second.find("pdf") != std::string::npos;
    const std::string url = "http://fixture.test:1" + path;
    auto build = [&] {
      std::vector<docrepr::TextBlock> blocks =
          is_pdf ? docrepr::extract_pdf(body) : docrepr::render_html(body, url);
      return docrepr::make_representation(
          url, is_pdf ? docrepr::DocFormat::pdf : docrepr::DocFormat::html, std::move(blocks));
    };
    docrepr::DocumentRepresentation r1 = build();
    docrepr::DocumentRepresentation r2 = build();
    NEED(docrepr::canonical_json(r1) == docrepr::canonical_json(r2));

    docrepr::DocumentRepresentation stripped = docrepr::strip_layout(r1);
    NEED(!stripped.layout_included);
    for (const auto& b : stripped.blocks) NEED(b.bbox == docrepr::kNoLayoutBBox);
    NEED(docrepr::concatenated_text(stripped) == docrepr::concatenated_text(r2));
    ++n_docs;
  }
  NEED(n_docs == 1200);  // 60 landing pages, 19 link targets each
  return true;
}

// Ablation direction: on the geometry-bound fixture, stripping layout
// must strictly lower MRR; on the text-bound fixture, the two runs must
// tie within 1e-9.
bool check_layout_ablation(std::string& why) {
  embedder::HashBackend backend(1024);
  experiments::ExperimentConfig config;
  config.train.max_epochs = 4;
  config.train.patience = 4;

  {
    FixtureServer server;
    FixtureData fx = make_layout_ablation_fixture(server.base_url());
    fx.install(server);
    std::vector<experiments::PageData> pages = crawl_fixture_pages(fixture_policy(), fx);
    experiments::AblationResult res = experiments::run_ablation(backend, pages, config);
    NEED(res.without_layout.report.overall.mrr < res.with_layout.report.overall.mrr);
  }
  {
    FixtureServer server;
    FixtureData fx = make_text_ablation_fixture(server.base_url());
    fx.install(server);
    std::vector<experiments::PageData> pages = crawl_fixture_pages(fixture_policy(), fx);
    experiments::AblationResult res = experiments::run_ablation(backend, pages, config);
    const eval::MetricValues& with = res.with_layout.report.overall;
    const eval::MetricValues& without = res.without_layout.report.overall;
    NEED(near(with.mrr, without.mrr, 1e-9));
    NEED(near(with.map, without.map, 1e-9));
    NEED(near(with.ndcg, without.ndcg, 1e-9));
    NEED(with.mrr >= 0.9);
  }
  return true;
}

struct Check {
  const char* name;
  bool (*fn)(std::string&);
};

constexpr Check kChecks[] = {
    {"metric_oracles", check_metric_oracles},
    {"aggregation_consistency", check_aggregation_consistency},
    {"ranking_exactness", check_ranking_exactness},
    {"loss_gradients", check_loss_gradients},
    {"end_to_end", check_end_to_end},
    {"leave_one_out", check_leave_one_out},
    {"truncation", check_truncation},
    {"representation_determinism", check_representation_determinism},
    {"layout_ablation", check_layout_ablation},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& c : kChecks) known = known || w == c.name;
    if (!known) {
      std::cerr << "unknown check: " << w << "\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& check : kChecks) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), check.name) == wanted.end())
      continue;
    std::string why;
    bool ok = false;
    try {
      ok = check.fn(why);
    } catch (const std::exception& e) {
      why = std::string("unhandled exception: ") + e.what();
    }
    if (ok) {
      std::cout << "PASS - " << check.name << "\n";
    } else {
      std::cout << "FAIL - " << check.name << (why.empty() ? "" : " (" + why + ")") << "\n";
      ++failures;
    }
    std::cout.flush();
  }
  return failures == 0 ? 0 : 1;
}
