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

// End-to-end experiment drivers: turn crawl bundles into uniform
// representations, embed them, train the projection heads on the train
// split, and score the held-out queries. Also hosts the leave-one-out
// robustness protocol and the layout ablation.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "crawldoc/corpus.hpp"
#include "crawldoc/docrepr.hpp"
#include "crawldoc/embedder.hpp"
#include "crawldoc/errors.hpp"
#include "crawldoc/eval.hpp"
#include "crawldoc/fetcher.hpp"
#include "crawldoc/ranker.hpp"
#include "crawldoc/trainer.hpp"

namespace crawldoc::experiments {

/// Uniform representations derived from one crawl bundle: the landing
/// page plus every successfully fetched link target, keyed by
/// normalized URL.
struct ReprStore {
  docrepr::DocumentRepresentation landing;
  std::vector<fetcher::Link> links;  // bundle order
  std::map<std::string, docrepr::DocumentRepresentation> targets;
  std::vector<fetcher::FetchFailure> failures;
};

/// Converts fetched bodies to representations. PDF targets that fail to
/// parse are recorded as failures rather than aborting the page.
inline ReprStore build_reprs(const fetcher::CrawlBundle& bundle,
                             const docrepr::LayoutFn& layout = docrepr::deterministic_layout) {
  ReprStore store;
  store.landing = docrepr::make_representation(
      bundle.seed.url, docrepr::DocFormat::html,
      docrepr::render_html(bundle.seed.body, bundle.seed.final_url, layout));
  store.links = bundle.links;
  for (size_t i = 0; i < bundle.links.size(); ++i) {
    const std::string& url = bundle.links[i].url;
    if (const auto* res = std::get_if<fetcher::FetchedResource>(&bundle.results[i])) {
      if (!res->ok()) {
        store.failures.push_back({url, "status " + std::to_string(res->status)});
        continue;
      }
      try {
        if (res->is_pdf()) {
          store.targets.emplace(url, docrepr::make_representation(
                                         url, docrepr::DocFormat::pdf,
                                         docrepr::extract_pdf(res->body)));
        } else {
          store.targets.emplace(url, docrepr::make_representation(
                                         url, docrepr::DocFormat::html,
                                         docrepr::render_html(res->body, res->final_url, layout)));
        }
      } catch (const Error& e) {
        store.failures.push_back({url, e.what()});
      }
    } else {
      store.failures.push_back(std::get<fetcher::FetchFailure>(bundle.results[i]));
    }
  }
  return store;
}

/// One landing page with its representations and relevance labels.
struct PageData {
  corpus::PublicationRecord pub;
  ReprStore reprs;
  std::vector<corpus::LinkLabel> labels;
};

/// A page after embedding: query vector plus raw candidate vectors.
/// Self-links (the page linking to its own landing URL) are excluded
/// from both candidates and relevance, since ranking a page against
/// itself says nothing about link identification.
struct EmbeddedPage {
  std::string publication_id;
  std::string publisher;
  embedder::EmbeddingVector query;
  std::vector<ranker::Candidate> candidates;
  std::set<std::string> relevant_urls;
};

inline EmbeddedPage embed_page(embedder::Backend& backend, const PageData& page,
                               bool with_layout) {
  EmbeddedPage out;
  out.publication_id = page.pub.id;
  out.publisher = page.pub.publisher;

  docrepr::DocumentRepresentation landing =
      with_layout ? page.reprs.landing : docrepr::strip_layout(page.reprs.landing);
  out.query = embedder::embed_query(backend, landing);

  std::string self = normalize_url(page.pub.landing_url);
  for (const corpus::LinkLabel& label : page.labels) {
    if (!label.relevant) continue;
    std::string url = normalize_url(label.url);
    if (url != self) out.relevant_urls.insert(url);
  }
  for (const fetcher::Link& link : page.reprs.links) {
    if (link.url == self) continue;
    auto it = page.reprs.targets.find(link.url);
    if (it == page.reprs.targets.end()) continue;  // fetch or parse failure
    docrepr::DocumentRepresentation target =
        with_layout ? it->second : docrepr::strip_layout(it->second);
    out.candidates.push_back(
        {link.url, embedder::embed_document(backend, link.anchor, link.url, target)});
  }
  return out;
}

/// Ranks one embedded page under a pair of heads.
inline eval::QueryResult rank_page(const EmbeddedPage& page, const trainer::Mat& query_head,
                                   const trainer::Mat& document_head, bool with_layout = true) {
  embedder::EmbeddingVector q = trainer::project(query_head, page.query);
  std::vector<ranker::Candidate> projected;
  projected.reserve(page.candidates.size());
  for (const auto& c : page.candidates)
    projected.push_back({c.url, trainer::project(document_head, c.vec)});
  ranker::RankedList ranked = ranker::rank(q, projected, page.publication_id);
  ranked.produced_with_layout = with_layout;

  eval::QueryResult result;
  result.publication_id = page.publication_id;
  result.publisher = page.publisher;
  result.ranked_urls = ranked.urls();
  result.relevant_urls = page.relevant_urls;
  return result;
}

inline std::vector<trainer::PagePool> make_pools(const std::vector<EmbeddedPage>& pages) {
  std::vector<trainer::PagePool> pools;
  pools.reserve(pages.size());
  for (const auto& page : pages) {
    trainer::PagePool pool;
    pool.publication_id = page.publication_id;
    pool.publisher = page.publisher;
    pool.query = page.query;
    for (const auto& c : page.candidates) {
      if (page.relevant_urls.count(c.url))
        pool.relevant.push_back(c.vec);
      else
        pool.irrelevant.push_back(c.vec);
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

/// Mean reciprocal rank of a page set under candidate heads; the
/// training loop uses this as its validation signal.
inline double mean_rr(const std::vector<EmbeddedPage>& pages, const trainer::Mat& query_head,
                      const trainer::Mat& document_head) {
  if (pages.empty()) return 0;
  double sum = 0;
  for (const auto& page : pages) {
    if (page.candidates.empty()) continue;
    eval::QueryResult r = rank_page(page, query_head, document_head);
    sum += eval::reciprocal_rank(r);
  }
  return sum / static_cast<double>(pages.size());
}

struct ExperimentConfig {
  trainer::TrainConfig train;
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
  uint64_t split_seed = 7;
  size_t max_k = eval::kDefaultMaxK;
  bool with_layout = true;
};

struct PipelineResult {
  eval::MetricsReport report;
  trainer::TrainResult training;
  std::vector<eval::QueryResult> test_queries;
  corpus::DatasetSplit split;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<const PageData*> select_pages(const std::vector<PageData>& pages,
                                                 const std::vector<std::string>& ids) {
  std::map<std::string, const PageData*> by_id;
  for (const auto& p : pages) by_id[p.pub.id] = &p;
  std::vector<const PageData*> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw IntegrityError("split references unknown publication " + id);
    out.push_back(it->second);
  }
  return out;
}

inline std::vector<EmbeddedPage> embed_all(embedder::Backend& backend,
                                           const std::vector<const PageData*>& pages,
                                           bool with_layout) {
  std::vector<EmbeddedPage> out;
  out.reserve(pages.size());
  for (const PageData* p : pages) out.push_back(embed_page(backend, *p, with_layout));
  return out;
}

}  // namespace detail

/// Train on the train split, early-stop on validation MRR, report
/// metrics on the test split.
inline PipelineResult run_pipeline(embedder::Backend& backend, const std::vector<PageData>& pages,
                                   const ExperimentConfig& config) {
  if (pages.empty()) throw ArgumentError("run_pipeline: no pages");
  std::vector<corpus::PublicationRecord> pubs;
  pubs.reserve(pages.size());
  for (const auto& p : pages) pubs.push_back(p.pub);

  PipelineResult result;
  result.split = corpus::split_dataset(pubs, config.split_ratios, config.split_seed);

  std::vector<EmbeddedPage> train_pages =
      detail::embed_all(backend, detail::select_pages(pages, result.split.train), config.with_layout);
  std::vector<EmbeddedPage> val_pages = detail::embed_all(
      backend, detail::select_pages(pages, result.split.validation), config.with_layout);
  std::vector<EmbeddedPage> test_pages =
      detail::embed_all(backend, detail::select_pages(pages, result.split.test), config.with_layout);

  Rng rng(config.train.rng_seed);
  trainer::ExampleBuild build = trainer::build_training_examples(
      make_pools(train_pages), config.train.negatives_per_positive, rng);
  result.warnings = build.warnings;
  if (build.examples.empty()) throw ArgumentError("run_pipeline: no training examples");

  result.training = trainer::train(
      build.examples, config.train, [&](const trainer::Mat& wq, const trainer::Mat& wd) {
        return mean_rr(val_pages.empty() ? train_pages : val_pages, wq, wd);
      });

  std::vector<eval::PerQueryMetrics> per_query;
  for (const auto& page : test_pages) {
    if (page.candidates.empty()) {
      result.warnings.push_back("publication " + page.publication_id +
                                " has no ranked candidates; skipped");
      continue;
    }
    eval::QueryResult q = rank_page(page, result.training.query_head,
                                    result.training.document_head, config.with_layout);
    result.test_queries.push_back(q);
    per_query.push_back(eval::compute_query_metrics(q, config.max_k));
  }
  if (per_query.empty()) throw ArgumentError("run_pipeline: no test queries");
  result.report = eval::aggregate(per_query);
  return result;
}

// ---------------------------------------------------------------------------
// Leave-one-out robustness protocol
// ---------------------------------------------------------------------------

struct LooPublisherResult {
  std::string publisher;
  eval::MetricsReport report;
  trainer::TrainResult training;
  size_t n_train_examples = 0;
  std::vector<std::string> train_publications;  // provenance: ids that produced examples
};

struct LooResult {
  std::vector<LooPublisherResult> per_publisher;
};

/// For each publisher: train on every other publisher's train+test
/// pages, validate on their validation pages, evaluate on the held-out
/// publisher's full page set. Training provenance is audited so the
/// held-out publisher can never leak into the examples.
inline LooResult run_leave_one_out(embedder::Backend& backend,
                                   const std::vector<PageData>& pages,
                                   const ExperimentConfig& config) {
  if (pages.empty()) throw ArgumentError("run_leave_one_out: no pages");
  std::set<std::string> publishers;
  for (const auto& p : pages) publishers.insert(p.pub.publisher);
  if (publishers.size() < 2)
    throw ArgumentError("run_leave_one_out: needs at least two publishers");

  std::vector<corpus::PublicationRecord> pubs;
  for (const auto& p : pages) pubs.push_back(p.pub);
  corpus::DatasetSplit split = corpus::split_dataset(pubs, config.split_ratios, config.split_seed);
  std::set<std::string> val_ids(split.validation.begin(), split.validation.end());

  LooResult out;
  for (const std::string& held_out : publishers) {
    std::set<std::string> held_ids;
    std::vector<const PageData*> held_pages, train_pool, val_pool;
    for (const auto& p : pages) {
      if (p.pub.publisher == held_out) {
        held_ids.insert(p.pub.id);
        held_pages.push_back(&p);
      } else if (val_ids.count(p.pub.id)) {
        val_pool.push_back(&p);
      } else {
        train_pool.push_back(&p);
      }
    }

    std::vector<EmbeddedPage> train_pages =
        detail::embed_all(backend, train_pool, config.with_layout);
    std::vector<EmbeddedPage> val_pages = detail::embed_all(backend, val_pool, config.with_layout);
    std::vector<EmbeddedPage> eval_pages =
        detail::embed_all(backend, held_pages, config.with_layout);

    Rng rng(config.train.rng_seed);
    trainer::ExampleBuild build = trainer::build_training_examples(
        make_pools(train_pages), config.train.negatives_per_positive, rng);
    if (build.examples.empty())
      throw ArgumentError("run_leave_one_out: no training examples excluding " + held_out);
    for (const auto& ex : build.examples) {
      if (held_ids.count(ex.publication_id))
        throw IntegrityError("leave-one-out leak: example from held-out publication " +
                             ex.publication_id);
    }

    LooPublisherResult pub_result;
    pub_result.publisher = held_out;
    pub_result.n_train_examples = build.examples.size();
    pub_result.train_publications = build.publications_used;
    pub_result.training = trainer::train(
        build.examples, config.train, [&](const trainer::Mat& wq, const trainer::Mat& wd) {
          return mean_rr(val_pages.empty() ? train_pages : val_pages, wq, wd);
        });

    std::vector<eval::PerQueryMetrics> per_query;
    for (const auto& page : eval_pages) {
      if (page.candidates.empty()) continue;
      per_query.push_back(eval::compute_query_metrics(
          rank_page(page, pub_result.training.query_head, pub_result.training.document_head,
                    config.with_layout),
          config.max_k));
    }
    if (per_query.empty())
      throw ArgumentError("run_leave_one_out: no evaluable pages for " + held_out);
    pub_result.report = eval::aggregate(per_query);
    out.per_publisher.push_back(std::move(pub_result));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layout ablation
// ---------------------------------------------------------------------------

struct AblationResult {
  PipelineResult with_layout;
  PipelineResult without_layout;
};

/// Runs the identical pipeline twice, once with bounding boxes stripped
/// before embedding, so the two reports differ only in layout signal.
inline AblationResult run_ablation(embedder::Backend& backend, const std::vector<PageData>& pages,
                                   const ExperimentConfig& config) {
  ExperimentConfig with = config;
  with.with_layout = true;
  ExperimentConfig without = config;
  without.with_layout = false;
  AblationResult out;
  out.with_layout = run_pipeline(backend, pages, with);
  out.without_layout = run_pipeline(backend, pages, without);
  return out;
}

}  // namespace crawldoc::experiments
