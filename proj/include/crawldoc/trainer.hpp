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

// Contrastive training of the two projection heads. Base embeddings are
// frozen; only the square query/document matrices move. The loss is
// InfoNCE over one positive and a handful of sampled negatives, with
// analytic gradients (no autodiff dependency for two matmuls).

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crawldoc/embedder.hpp"
#include "crawldoc/errors.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::trainer {

/// Dense row-major matrix, only ever square here (head dimension).
struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double at(size_t r, size_t c) const { return a[r * cols + c]; }

  std::vector<double> apply(const std::vector<double>& v) const {
    if (v.size() != cols) throw ArgumentError("Mat::apply: dimension mismatch");
    std::vector<double> out(rows, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      double s = 0;
      const double* row = &a[r * cols];
      for (size_t c = 0; c < cols; ++c) s += row[c] * v[c];
      out[r] = s;
    }
    return out;
  }
};

struct TrainingExample {
  embedder::EmbeddingVector query;
  embedder::EmbeddingVector positive;
  std::vector<embedder::EmbeddingVector> negatives;
  std::string publication_id;  // provenance for split audits
};

// ---------------------------------------------------------------------------
// InfoNCE
// ---------------------------------------------------------------------------

struct InfoNceResult {
  double loss = 0;
  std::vector<double> grad_query;
  std::vector<double> grad_positive;
  std::vector<std::vector<double>> grad_negatives;
};

/// Cross-entropy of the positive against positive+negatives under
/// temperature-scaled inner-product logits. Gradients are with respect
/// to the vectors as passed (i.e. after projection and normalization).
inline InfoNceResult info_nce(const std::vector<double>& query,
                              const std::vector<double>& positive,
                              const std::vector<std::vector<double>>& negatives,
                              double temperature) {
  if (temperature <= 0) throw ArgumentError("info_nce: temperature must be positive");
  const size_t d = query.size();
  if (positive.size() != d) throw ArgumentError("info_nce: positive dimension mismatch");
  for (const auto& n : negatives)
    if (n.size() != d) throw ArgumentError("info_nce: negative dimension mismatch");

  const size_t m = negatives.size() + 1;
  std::vector<double> logits(m);
  logits[0] = embedder::dot(query, positive) / temperature;
  for (size_t i = 0; i < negatives.size(); ++i)
    logits[i + 1] = embedder::dot(query, negatives[i]) / temperature;

  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double denom = 0;
  std::vector<double> p(m);
  for (size_t i = 0; i < m; ++i) {
    p[i] = std::exp(logits[i] - max_logit);
    denom += p[i];
  }
  for (double& x : p) x /= denom;

  InfoNceResult res;
  res.loss = -(logits[0] - max_logit - std::log(denom));

  // dL/ds_0 = (p_0 - 1)/tau, dL/ds_i = p_i/tau; chain through s = q.v.
  std::vector<double> dls(m);
  dls[0] = (p[0] - 1.0) / temperature;
  for (size_t i = 1; i < m; ++i) dls[i] = p[i] / temperature;

  res.grad_query.assign(d, 0.0);
  for (size_t k = 0; k < d; ++k) res.grad_query[k] += dls[0] * positive[k];
  for (size_t i = 0; i < negatives.size(); ++i)
    for (size_t k = 0; k < d; ++k) res.grad_query[k] += dls[i + 1] * negatives[i][k];

  res.grad_positive.assign(d, 0.0);
  for (size_t k = 0; k < d; ++k) res.grad_positive[k] = dls[0] * query[k];

  res.grad_negatives.resize(negatives.size());
  for (size_t i = 0; i < negatives.size(); ++i) {
    res.grad_negatives[i].assign(d, 0.0);
    for (size_t k = 0; k < d; ++k) res.grad_negatives[i][k] = dls[i + 1] * query[k];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Example construction
// ---------------------------------------------------------------------------

/// Per-page pool of embedded links to draw positives and negatives from.
struct PagePool {
  std::string publication_id;
  std::string publisher;
  embedder::EmbeddingVector query;
  std::vector<embedder::EmbeddingVector> relevant;
  std::vector<embedder::EmbeddingVector> irrelevant;
};

struct ExampleBuild {
  std::vector<TrainingExample> examples;
  std::vector<std::string> warnings;
  std::vector<std::string> publications_used;  // ids that contributed examples
};

/// One example per (page, relevant link). Negatives come from the same
/// page, padded from other pages of the same publisher when the page
/// has too few irrelevant links. Deterministic for a given rng state.
inline ExampleBuild build_training_examples(const std::vector<PagePool>& pools,
                                            size_t negatives_per_positive, Rng& rng) {
  ExampleBuild out;
  for (size_t pi = 0; pi < pools.size(); ++pi) {
    const PagePool& pool = pools[pi];
    if (pool.relevant.empty()) {
      out.warnings.push_back("publication " + pool.publication_id +
                             " has no relevant links; skipped");
      continue;
    }
    // Publisher-wide fallback pool, in deterministic pool order.
    std::vector<const embedder::EmbeddingVector*> cross_page;
    for (size_t pj = 0; pj < pools.size(); ++pj) {
      if (pj == pi || pools[pj].publisher != pool.publisher) continue;
      for (const auto& v : pools[pj].irrelevant) cross_page.push_back(&v);
    }
    bool contributed = false;
    for (const auto& pos : pool.relevant) {
      TrainingExample ex;
      ex.publication_id = pool.publication_id;
      ex.query = pool.query;
      ex.positive = pos;
      size_t want = negatives_per_positive;
      size_t in_page = std::min(want, pool.irrelevant.size());
      for (size_t idx : sample_without_replacement(rng, pool.irrelevant.size(), in_page))
        ex.negatives.push_back(pool.irrelevant[idx]);
      if (ex.negatives.size() < want && !cross_page.empty()) {
        size_t pad = std::min(want - ex.negatives.size(), cross_page.size());
        for (size_t idx : sample_without_replacement(rng, cross_page.size(), pad))
          ex.negatives.push_back(*cross_page[idx]);
      }
      if (ex.negatives.empty()) {
        out.warnings.push_back("publication " + pool.publication_id +
                               " has no negatives available; example dropped");
        continue;
      }
      out.examples.push_back(std::move(ex));
      contributed = true;
    }
    if (contributed) out.publications_used.push_back(pool.publication_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  double learning_rate = 3e-5;
  size_t accumulation_steps = 32;  // micro-batches per optimizer step
  size_t patience = 5;             // epochs without validation improvement
  size_t max_epochs = 100;
  double temperature = 0.05;
  size_t negatives_per_positive = 7;
  size_t batch_size = 8;           // examples per micro-batch
  uint64_t rng_seed = 17;
};

struct EpochStats {
  size_t epoch = 0;  // 1-based
  double mean_loss = 0;
  double val_mrr = 0;
};

struct TrainResult {
  Mat query_head;
  Mat document_head;
  std::vector<EpochStats> epochs;
  size_t best_epoch = 0;
  double best_val_mrr = 0;
  bool early_stopped = false;
};

/// Validation callback: scores a candidate pair of heads (typically MRR
/// on a held-out split). Injectable so tests can script plateaus.
using ValEval = std::function<double(const Mat&, const Mat&)>;

namespace detail {

/// Backprop through y = z / |z|: given g = dL/dy, returns dL/dz.
inline std::vector<double> normalize_backprop(const std::vector<double>& z,
                                              const std::vector<double>& g) {
  double n = embedder::norm(z);
  if (n == 0) return std::vector<double>(z.size(), 0.0);
  std::vector<double> y(z.size());
  for (size_t i = 0; i < z.size(); ++i) y[i] = z[i] / n;
  double yg = embedder::dot(y, g);
  std::vector<double> out(z.size());
  for (size_t i = 0; i < z.size(); ++i) out[i] = (g[i] - y[i] * yg) / n;
  return out;
}

inline void add_outer(Mat& grad, const std::vector<double>& gz, const std::vector<double>& v) {
  for (size_t r = 0; r < grad.rows; ++r) {
    double g = gz[r];
    if (g == 0) continue;
    double* row = &grad.a[r * grad.cols];
    for (size_t c = 0; c < grad.cols; ++c) row[c] += g * v[c];
  }
}

/// Forward+backward for one example; accumulates head gradients and
/// returns the loss.
inline double example_pass(const TrainingExample& ex, const Mat& wq, const Mat& wd,
                           double temperature, Mat& grad_q, Mat& grad_d) {
  std::vector<double> zq = wq.apply(ex.query.values);
  std::vector<double> yq = zq;
  embedder::normalize(yq);

  std::vector<double> zp = wd.apply(ex.positive.values);
  std::vector<double> yp = zp;
  embedder::normalize(yp);

  std::vector<std::vector<double>> zn(ex.negatives.size()), yn(ex.negatives.size());
  for (size_t i = 0; i < ex.negatives.size(); ++i) {
    zn[i] = wd.apply(ex.negatives[i].values);
    yn[i] = zn[i];
    embedder::normalize(yn[i]);
  }

  InfoNceResult nce = info_nce(yq, yp, yn, temperature);

  add_outer(grad_q, normalize_backprop(zq, nce.grad_query), ex.query.values);
  add_outer(grad_d, normalize_backprop(zp, nce.grad_positive), ex.positive.values);
  for (size_t i = 0; i < ex.negatives.size(); ++i)
    add_outer(grad_d, normalize_backprop(zn[i], nce.grad_negatives[i]), ex.negatives[i].values);
  return nce.loss;
}

}  // namespace detail

/// SGD over the two heads with gradient accumulation and early stopping
/// on the validation score. Returns the heads from the best epoch.
inline TrainResult train(const std::vector<TrainingExample>& examples, const TrainConfig& config,
                         const ValEval& val_eval) {
  if (examples.empty()) throw ArgumentError("train: no training examples");
  if (config.batch_size == 0 || config.accumulation_steps == 0)
    throw ArgumentError("train: batch_size and accumulation_steps must be positive");
  const size_t d = examples.front().query.dim();
  for (const auto& ex : examples) {
    if (ex.query.dim() != d || ex.positive.dim() != d)
      throw ArgumentError("train: inconsistent example dimensions");
    for (const auto& n : ex.negatives)
      if (n.dim() != d) throw ArgumentError("train: inconsistent example dimensions");
  }

  Mat wq = Mat::identity(d);
  Mat wd = Mat::identity(d);
  TrainResult res;
  res.query_head = wq;
  res.document_head = wd;
  res.best_val_mrr = -std::numeric_limits<double>::infinity();

  Rng rng(config.rng_seed);
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const size_t window = config.batch_size * config.accumulation_steps;
  size_t bad_epochs = 0;

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_deterministic(order, rng);
    Mat grad_q(d, d), grad_d(d, d);
    size_t in_window = 0;
    double loss_sum = 0;

    auto step = [&](size_t count) {
      if (count == 0) return;
      double scale = config.learning_rate / static_cast<double>(count);
      for (size_t i = 0; i < wq.a.size(); ++i) wq.a[i] -= scale * grad_q.a[i];
      for (size_t i = 0; i < wd.a.size(); ++i) wd.a[i] -= scale * grad_d.a[i];
      std::fill(grad_q.a.begin(), grad_q.a.end(), 0.0);
      std::fill(grad_d.a.begin(), grad_d.a.end(), 0.0);
    };

    for (size_t idx : order) {
      double loss = detail::example_pass(examples[idx], wq, wd, config.temperature, grad_q, grad_d);
      if (!std::isfinite(loss))
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += loss;
      if (++in_window == window) {
        step(in_window);
        in_window = 0;
      }
    }
    step(in_window);  // remainder window

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(examples.size());
    stats.val_mrr = val_eval ? val_eval(wq, wd) : 0.0;
    res.epochs.push_back(stats);

    if (stats.val_mrr > res.best_val_mrr + 1e-12) {
      res.best_val_mrr = stats.val_mrr;
      res.best_epoch = epoch;
      res.query_head = wq;
      res.document_head = wd;
      bad_epochs = 0;
    } else {
      if (++bad_epochs >= config.patience) {
        res.early_stopped = true;
        break;
      }
    }
  }
  if (res.best_epoch == 0) {  // no validation signal: keep the final weights
    res.query_head = wq;
    res.document_head = wd;
  }
  return res;
}

/// Projects an embedding through a head and re-normalizes, preserving
/// the role tag.
inline embedder::EmbeddingVector project(const Mat& head, const embedder::EmbeddingVector& v) {
  embedder::EmbeddingVector out;
  out.role = v.role;
  out.values = head.apply(v.values);
  embedder::normalize(out.values);
  return out;
}

// ---------------------------------------------------------------------------
// Head (de)serialization
// ---------------------------------------------------------------------------

inline nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat mat_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("head matrix must be a non-empty array");
  size_t rows = j.size();
  size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ParseError("head matrix rows must be non-empty arrays");
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ParseError("head matrix is ragged at row " + std::to_string(r));
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParseError("head matrix has a non-numeric entry");
      m.at(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline nlohmann::json heads_to_json(const Mat& query_head, const Mat& document_head) {
  if (query_head.rows != query_head.cols || document_head.rows != document_head.cols ||
      query_head.rows != document_head.rows)
    throw ArgumentError("heads must be square matrices of equal dimension");
  return nlohmann::json{{"schema_version", 1},
                        {"dim", query_head.rows},
                        {"query", mat_to_json(query_head)},
                        {"document", mat_to_json(document_head)}};
}

inline std::pair<Mat, Mat> heads_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("query") || !j.contains("document"))
    throw ParseError("heads document must contain query and document matrices");
  Mat q = mat_from_json(j["query"]);
  Mat d = mat_from_json(j["document"]);
  if (j.contains("dim")) {
    size_t dim = j["dim"].get<size_t>();
    if (q.rows != dim || q.cols != dim || d.rows != dim || d.cols != dim)
      throw ParseError("heads dim field disagrees with matrix shapes");
  }
  return {std::move(q), std::move(d)};
}

}  // namespace crawldoc::trainer
