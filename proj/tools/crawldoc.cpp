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

// Command-line front end. All machine-readable output goes to stdout as
// JSON; tables and diagnostics go to stderr. Every run appends a
// manifest line (command, resolved parameters, outputs, exit code) to a
// JSONL audit file.
//
// Exit codes: 0 ok, 1 usage, 2 bad input (malformed, unreachable or
// disallowed), 3 empty result, 4 embedding or renderer backend failure,
// 5 internal error, 130 interrupted.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crawldoc/crawldoc.hpp"

namespace {

using namespace crawldoc;

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

// ---------------------------------------------------------------------------
// Flag plumbing: every tunable is a named setting resolved through the
// flag > environment > config-file > default chain.
// ---------------------------------------------------------------------------

class FlagBinder {
 public:
  explicit FlagBinder(CLI::App* cmd) : cmd_(cmd) {}

  void bind(const std::string& key, const std::string& help) {
    auto slot = std::make_shared<std::string>();
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = cmd_->add_option(flag, *slot, help);
    entries_.push_back({key, slot, opt});
  }

  void bind_fetch_settings() {
    bind("timeout_ms", "request timeout in milliseconds");
    bind("max_redirects", "redirect chain limit");
    bind("max_body_bytes", "response body size cap");
    bind("user_agent", "User-Agent header");
    bind("per_host_parallelism", "concurrent requests per host");
    bind("per_host_delay_ms", "minimum spacing between request starts per host");
    bind("max_workers", "global worker thread cap");
    bind("respect_robots", "honor robots.txt Disallow rules (true/false)");
    bind("cache_dir", "on-disk response cache directory");
  }

  void bind_embed_settings() {
    bind("backend", "embedding backend: hash or remote");
    bind("dim", "embedding dimension (hash backend)");
    bind("hash_seed", "hash backend seed");
    bind("max_tokens", "token budget per model input");
    bind("endpoint", "remote embedding endpoint");
    bind("renderer_endpoint", "external layout renderer endpoint");
    bind("renderer_fallback", "renderer fallback policy: deterministic or fail");
  }

  void bind_train_settings() {
    bind("learning_rate", "SGD learning rate");
    bind("accumulation_steps", "micro-batches per optimizer step");
    bind("patience", "epochs without validation improvement before stopping");
    bind("max_epochs", "epoch cap");
    bind("temperature", "contrastive temperature");
    bind("negatives_per_positive", "sampled negatives per positive");
    bind("batch_size", "examples per micro-batch");
    bind("train_seed", "training rng seed");
  }

  void bind_split_settings() {
    bind("split_ratios", "train,validation,test ratios, e.g. 0.8,0.1,0.1");
    bind("split_seed", "split shuffle seed");
  }

  void apply(config::Layers& layers) const {
    for (const auto& e : entries_) {
      if (e.opt->count() > 0) layers.set_flag(e.key, *e.slot);
    }
  }

 private:
  struct Entry {
    std::string key;
    std::shared_ptr<std::string> slot;
    CLI::Option* opt;
  };
  CLI::App* cmd_;
  std::vector<Entry> entries_;
};

void require_exists(const std::filesystem::path& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw ArgumentError(what + " " + path.string() + " does not exist");
}

// ---------------------------------------------------------------------------
// Builders from resolved settings
// ---------------------------------------------------------------------------

fetcher::FetchPolicy fetch_policy_from(const config::Layers& layers) {
  fetcher::FetchPolicy p;
  p.timeout_ms = static_cast<int>(layers.get_int("timeout_ms", p.timeout_ms));
  p.max_redirects = static_cast<int>(layers.get_int("max_redirects", p.max_redirects));
  p.max_body_bytes =
      static_cast<size_t>(layers.get_int("max_body_bytes", static_cast<int64_t>(p.max_body_bytes)));
  p.user_agent = layers.get_string("user_agent", p.user_agent);
  p.per_host_parallelism = static_cast<size_t>(
      layers.get_int("per_host_parallelism", static_cast<int64_t>(p.per_host_parallelism)));
  p.per_host_delay_ms =
      static_cast<int>(layers.get_int("per_host_delay_ms", p.per_host_delay_ms));
  p.max_workers =
      static_cast<size_t>(layers.get_int("max_workers", static_cast<int64_t>(p.max_workers)));
  p.respect_robots = layers.get_bool("respect_robots", p.respect_robots);
  p.cache_dir = layers.get_string("cache_dir", p.cache_dir);
  p.cancel = &g_interrupted;
  return p;
}

std::unique_ptr<embedder::Backend> backend_from(const config::Layers& layers) {
  std::string kind = layers.get_string("backend", "hash");
  size_t max_tokens = static_cast<size_t>(
      layers.get_int("max_tokens", static_cast<int64_t>(embedder::kDefaultMaxTokens)));
  if (kind == "hash") {
    size_t dim = static_cast<size_t>(layers.get_int("dim", 256));
    uint64_t seed = static_cast<uint64_t>(layers.get_int("hash_seed", 0));
    return std::make_unique<embedder::HashBackend>(dim, seed, max_tokens);
  }
  if (kind == "remote") {
    embedder::RemoteConfig rc;
    rc.endpoint = layers.get_string("endpoint", "");
    if (rc.endpoint.empty())
      throw ArgumentError("remote backend requires the endpoint setting");
    rc.dimension = static_cast<size_t>(layers.get_int("dim", 0));
    rc.max_tokens = max_tokens;
    return std::make_unique<embedder::RemoteBackend>(rc);
  }
  throw ArgumentError("unknown backend \"" + kind + "\" (expected hash or remote)");
}

docrepr::LayoutFn layout_from(const config::Layers& layers) {
  renderer::RendererConfig rc;
  rc.endpoint = layers.get_string("renderer_endpoint", "");
  std::string fb = layers.get_string("renderer_fallback", "deterministic");
  if (fb == "deterministic")
    rc.fallback = renderer::Fallback::deterministic;
  else if (fb == "fail")
    rc.fallback = renderer::Fallback::fail;
  else
    throw ArgumentError("renderer_fallback must be deterministic or fail, got \"" + fb + "\"");
  return renderer::make_layout_fn(rc);
}

trainer::TrainConfig train_config_from(const config::Layers& layers) {
  trainer::TrainConfig t;
  t.learning_rate = layers.get_double("learning_rate", t.learning_rate);
  t.accumulation_steps = static_cast<size_t>(
      layers.get_int("accumulation_steps", static_cast<int64_t>(t.accumulation_steps)));
  t.patience = static_cast<size_t>(layers.get_int("patience", static_cast<int64_t>(t.patience)));
  t.max_epochs =
      static_cast<size_t>(layers.get_int("max_epochs", static_cast<int64_t>(t.max_epochs)));
  t.temperature = layers.get_double("temperature", t.temperature);
  t.negatives_per_positive = static_cast<size_t>(layers.get_int(
      "negatives_per_positive", static_cast<int64_t>(t.negatives_per_positive)));
  t.batch_size =
      static_cast<size_t>(layers.get_int("batch_size", static_cast<int64_t>(t.batch_size)));
  t.rng_seed = static_cast<uint64_t>(layers.get_int("train_seed", 17));
  return t;
}

experiments::ExperimentConfig experiment_config_from(const config::Layers& layers,
                                                     bool with_layout) {
  experiments::ExperimentConfig e;
  e.train = train_config_from(layers);
  std::string ratios = layers.get_string("split_ratios", "0.8,0.1,0.1");
  std::array<double, 3> parsed{};
  size_t pos = 0;
  for (size_t i = 0; i < 3; ++i) {
    size_t comma = ratios.find(',', pos);
    std::string part = ratios.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
    try {
      parsed[i] = std::stod(part);
    } catch (const std::exception&) {
      throw ArgumentError("split_ratios must be three comma-separated numbers");
    }
    if (comma == std::string::npos && i < 2)
      throw ArgumentError("split_ratios must be three comma-separated numbers");
    pos = comma + 1;
  }
  e.split_ratios = parsed;
  e.split_seed = static_cast<uint64_t>(layers.get_int("split_seed", 7));
  e.with_layout = with_layout;
  return e;
}

nlohmann::json settings_snapshot(const config::Layers& layers,
                                 const std::vector<std::string>& keys) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& key : keys) {
    if (auto v = layers.raw(key)) out[key] = *v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset loading for the experiment commands
// ---------------------------------------------------------------------------

std::vector<experiments::PageData> load_pages(const std::filesystem::path& data_dir,
                                              const docrepr::LayoutFn& layout) {
  require_exists(data_dir, "dataset directory");
  corpus::Dataset ds = corpus::load_dataset(data_dir);
  std::vector<experiments::PageData> pages;
  for (const auto& pub : ds.publications) {
    std::filesystem::path bundle_dir = data_dir / "bundles" / pub.id;
    if (!std::filesystem::exists(bundle_dir / "index.json")) {
      std::cerr << "warning: no bundle for publication " << pub.id << ", skipping\n";
      continue;
    }
    fetcher::CrawlBundle bundle = fetcher::load_bundle(bundle_dir);
    pages.push_back({pub, experiments::build_reprs(bundle, layout), ds.labels_for(pub.id)});
  }
  if (pages.empty()) throw EmptyError("no publications with crawl bundles under " +
                                      data_dir.string());
  return pages;
}

// ---------------------------------------------------------------------------
// Report rendering helpers
// ---------------------------------------------------------------------------

nlohmann::json training_summary(const trainer::TrainResult& tr) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : tr.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"val_mrr", e.val_mrr}});
  return nlohmann::json{{"best_epoch", tr.best_epoch},
                        {"best_val_mrr", tr.best_val_mrr},
                        {"early_stopped", tr.early_stopped},
                        {"epochs", epochs}};
}

// An unreachable or disallowed URL is bad input, so TransportError and
// PolicyError land in the same bucket as malformed files; 4 is reserved
// for the embedding and renderer services behind the pipeline.
int exit_code_for(const Error& e) {
  if (dynamic_cast<const EmptyError*>(&e)) return 3;
  if (dynamic_cast<const BackendError*>(&e) || dynamic_cast<const RendererError*>(&e) ||
      dynamic_cast<const ContractError*>(&e))
    return 4;
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const IntegrityError*>(&e) || dynamic_cast<const PolicyError*>(&e) ||
      dynamic_cast<const ExtractionError*>(&e) || dynamic_cast<const TransportError*>(&e))
    return 2;
  return 5;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_sigint);

  CLI::App app{"crawldoc: one-hop crawling, layout-aware representations and link ranking"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path = "crawldoc_runs.jsonl";
  app.add_option("--config", config_path, "JSON config file (flat object of settings)");
  app.add_option("--manifest", manifest_path, "run manifest JSONL file");

  // crawl ------------------------------------------------------------------
  CLI::App* crawl = app.add_subcommand("crawl", "one-hop crawl from a landing URL");
  std::string crawl_url, crawl_out;
  crawl->add_option("url", crawl_url, "seed landing URL")->required();
  crawl->add_option("--out", crawl_out, "bundle output directory")->required();
  FlagBinder crawl_flags(crawl);
  crawl_flags.bind_fetch_settings();

  // represent --------------------------------------------------------------
  CLI::App* represent =
      app.add_subcommand("represent", "uniform representation of one document");
  represent->alias("docrepr");
  std::string rep_input, rep_url, rep_format = "auto";
  bool rep_no_layout = false;
  represent->add_option("input", rep_input, "path to the raw document body")->required();
  represent->add_option("--url", rep_url, "source URL of the document")->required();
  represent->add_option("--format", rep_format, "html, pdf or auto");
  represent->add_flag("--no-layout", rep_no_layout, "strip bounding boxes");
  FlagBinder rep_flags(represent);
  rep_flags.bind("renderer_endpoint", "external layout renderer endpoint");
  rep_flags.bind("renderer_fallback", "renderer fallback policy: deterministic or fail");

  // rank -------------------------------------------------------------------
  CLI::App* rank_cmd = app.add_subcommand(
      "rank", "rank the outgoing links of a landing page or saved crawl bundle");
  std::string rank_target, rank_heads;
  int64_t rank_k = 0;
  bool rank_no_layout = false;
  rank_cmd->add_option("target", rank_target, "seed landing URL or crawl bundle directory")
      ->required();
  rank_cmd->add_option("--heads", rank_heads, "trained projection heads JSON");
  rank_cmd->add_option("--k", rank_k, "keep only the top k entries (0 = all)");
  rank_cmd->add_flag("--no-layout", rank_no_layout, "strip bounding boxes before embedding");
  FlagBinder rank_flags(rank_cmd);
  rank_flags.bind_embed_settings();
  rank_flags.bind_fetch_settings();

  // train ------------------------------------------------------------------
  CLI::App* train_cmd = app.add_subcommand("train", "train projection heads on a dataset");
  std::string train_data, train_out = "heads.json";
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output path for the heads JSON");
  FlagBinder train_flags(train_cmd);
  train_flags.bind_embed_settings();
  train_flags.bind_train_settings();
  train_flags.bind_split_settings();

  // evaluate ---------------------------------------------------------------
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "split, train and report metrics on the test split");
  std::string eval_data, eval_out;
  bool eval_ablation = false, eval_no_layout = false;
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "also write the report JSON here");
  eval_cmd->add_flag("--ablation", eval_ablation, "run with and without layout");
  eval_cmd->add_flag("--no-layout", eval_no_layout, "strip bounding boxes before embedding");
  FlagBinder eval_flags(eval_cmd);
  eval_flags.bind_embed_settings();
  eval_flags.bind_train_settings();
  eval_flags.bind_split_settings();

  // loo --------------------------------------------------------------------
  CLI::App* loo_cmd =
      app.add_subcommand("loo", "leave-one-publisher-out robustness evaluation");
  std::string loo_data;
  loo_cmd->add_option("--data", loo_data, "dataset directory")->required();
  FlagBinder loo_flags(loo_cmd);
  loo_flags.bind_embed_settings();
  loo_flags.bind_train_settings();
  loo_flags.bind_split_settings();

  // stats ------------------------------------------------------------------
  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset summary statistics");
  std::string stats_data;
  stats_cmd->add_option("--data", stats_data, "dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // every usage problem maps to one code
  }

  config::RunManifest manifest;
  manifest.started_at = config::utc_timestamp();
  for (int i = 1; i < argc; ++i) manifest.args.emplace_back(argv[i]);

  config::Layers layers;
  int code = 0;
  try {
    if (!config_path.empty()) {
      require_exists(config_path, "config file");
      layers.load_file(config_path);
    }

    if (*crawl) {
      manifest.command = "crawl";
      crawl_flags.apply(layers);
      fetcher::FetchPolicy policy = fetch_policy_from(layers);
      manifest.parameters = settings_snapshot(
          layers, {"timeout_ms", "max_redirects", "max_body_bytes", "user_agent",
                   "per_host_parallelism", "per_host_delay_ms", "max_workers", "respect_robots",
                   "cache_dir"});
      fetcher::CrawlBundle bundle = fetcher::crawl_one_hop(policy, crawl_url);
      fetcher::save_bundle(crawl_out, bundle);
      size_t ok = 0, failed = 0;
      for (const auto& r : bundle.results) (fetcher::fetch_ok(r) ? ok : failed)++;
      bool interrupted = g_interrupted.load();
      nlohmann::json summary = {{"schema_version", 1},
                                {"seed_url", bundle.seed.url},
                                {"final_url", bundle.seed.final_url},
                                {"status", bundle.seed.status},
                                {"n_links", bundle.links.size()},
                                {"n_fetched", ok},
                                {"n_failed", failed},
                                {"bundle_dir", crawl_out},
                                {"interrupted", interrupted}};
      std::cout << summary.dump() << "\n";
      manifest.outputs = {{"bundle_dir", crawl_out}};
      if (interrupted)
        code = 130;
      else if (bundle.links.empty())
        throw EmptyError("seed page has no outgoing links");
    } else if (*represent) {
      manifest.command = "represent";
      rep_flags.apply(layers);
      require_exists(rep_input, "input file");
      std::string body = io::read_file(rep_input);
      std::string format = rep_format;
      if (format == "auto") format = body.compare(0, 5, "%PDF-") == 0 ? "pdf" : "html";
      docrepr::DocumentRepresentation repr;
      if (format == "pdf") {
        repr = docrepr::make_representation(rep_url, docrepr::DocFormat::pdf,
                                            docrepr::extract_pdf(body));
      } else if (format == "html") {
        repr = docrepr::make_representation(
            rep_url, docrepr::DocFormat::html,
            docrepr::render_html(body, rep_url, layout_from(layers)));
      } else {
        throw ArgumentError("format must be html, pdf or auto, got \"" + rep_format + "\"");
      }
      if (rep_no_layout) repr = docrepr::strip_layout(repr);
      manifest.parameters = {{"format", format}, {"no_layout", rep_no_layout}};
      nlohmann::json out = {{"schema_version", 1},
                            {"representation", docrepr::to_uniform_json(repr)}};
      std::cout << out.dump() << "\n";
    } else if (*rank_cmd) {
      manifest.command = "rank";
      rank_flags.apply(layers);
      if (rank_k < 0) throw ArgumentError("--k must be non-negative");
      auto backend = backend_from(layers);
      docrepr::LayoutFn layout = layout_from(layers);
      bool is_url = rank_target.rfind("http://", 0) == 0 || rank_target.rfind("https://", 0) == 0;
      fetcher::CrawlBundle bundle;
      if (is_url) {
        bundle = fetcher::crawl_one_hop(fetch_policy_from(layers), rank_target);
      } else {
        require_exists(rank_target, "crawl bundle");
        bundle = fetcher::load_bundle(rank_target);
      }
      experiments::ReprStore store = experiments::build_reprs(bundle, layout);

      experiments::PageData page;
      page.pub.id = bundle.seed.url;
      page.pub.publisher = "unknown";
      page.pub.landing_url = bundle.seed.url;
      page.reprs = std::move(store);
      experiments::EmbeddedPage embedded =
          experiments::embed_page(*backend, page, !rank_no_layout);
      if (embedded.candidates.empty())
        throw EmptyError("bundle has no rankable link targets");

      trainer::Mat wq, wd;
      if (!rank_heads.empty()) {
        require_exists(rank_heads, "heads file");
        nlohmann::json heads_doc;
        try {
          heads_doc = nlohmann::json::parse(io::read_file(rank_heads));
        } catch (const nlohmann::json::exception& e) {
          throw ParseError("heads file " + rank_heads + " is not valid JSON: " + e.what());
        }
        auto heads = trainer::heads_from_json(heads_doc);
        wq = std::move(heads.first);
        wd = std::move(heads.second);
        if (wq.rows != embedded.query.dim())
          throw ArgumentError("heads dimension " + std::to_string(wq.rows) +
                              " does not match embedding dimension " +
                              std::to_string(embedded.query.dim()));
      } else {
        wq = trainer::Mat::identity(embedded.query.dim());
        wd = wq;
      }
      embedder::EmbeddingVector q = trainer::project(wq, embedded.query);
      std::vector<ranker::Candidate> projected;
      for (const auto& c : embedded.candidates)
        projected.push_back({c.url, trainer::project(wd, c.vec)});
      ranker::RankedList ranked = ranker::rank(q, projected, bundle.seed.url);
      ranked.produced_with_layout = !rank_no_layout;

      size_t keep = rank_k > 0 ? std::min(static_cast<size_t>(rank_k), ranked.entries.size())
                               : ranked.entries.size();
      nlohmann::json entries = nlohmann::json::array();
      for (size_t i = 0; i < keep; ++i)
        entries.push_back({{"url", ranked.entries[i].url}, {"score", ranked.entries[i].score}});
      nlohmann::json out = {{"schema_version", 1},
                            {"query_url", ranked.query_url},
                            {"produced_with_layout", ranked.produced_with_layout},
                            {"entries", entries}};
      manifest.parameters = settings_snapshot(layers, {"backend", "dim", "hash_seed"});
      std::cout << out.dump() << "\n";
    } else if (*train_cmd) {
      manifest.command = "train";
      train_flags.apply(layers);
      auto backend = backend_from(layers);
      docrepr::LayoutFn layout = layout_from(layers);
      experiments::ExperimentConfig config = experiment_config_from(layers, true);
      std::vector<experiments::PageData> pages = load_pages(train_data, layout);
      experiments::PipelineResult result = experiments::run_pipeline(*backend, pages, config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

      nlohmann::json heads =
          trainer::heads_to_json(result.training.query_head, result.training.document_head);
      io::write_file(train_out, heads.dump());
      nlohmann::json summary = training_summary(result.training);
      summary["schema_version"] = 1;
      summary["heads_path"] = train_out;
      summary["n_train"] = result.split.train.size();
      summary["n_validation"] = result.split.validation.size();
      summary["n_test"] = result.split.test.size();
      manifest.parameters = settings_snapshot(
          layers, {"backend", "dim", "learning_rate", "accumulation_steps", "patience",
                   "max_epochs", "temperature", "negatives_per_positive", "batch_size",
                   "train_seed", "split_ratios", "split_seed"});
      manifest.outputs = {{"heads", train_out}};
      std::cout << summary.dump() << "\n";
    } else if (*eval_cmd) {
      manifest.command = "evaluate";
      eval_flags.apply(layers);
      auto backend = backend_from(layers);
      docrepr::LayoutFn layout = layout_from(layers);
      std::vector<experiments::PageData> pages = load_pages(eval_data, layout);
      nlohmann::json out;
      if (eval_ablation) {
        experiments::ExperimentConfig config = experiment_config_from(layers, true);
        experiments::AblationResult ab = experiments::run_ablation(*backend, pages, config);
        out = {{"schema_version", 1},
               {"with_layout", eval::to_json(ab.with_layout.report)},
               {"without_layout", eval::to_json(ab.without_layout.report)},
               {"mrr_delta",
                ab.with_layout.report.overall.mrr - ab.without_layout.report.overall.mrr}};
        std::cerr << "=== with layout ===\n"
                  << eval::format_table(ab.with_layout.report) << "=== without layout ===\n"
                  << eval::format_table(ab.without_layout.report);
      } else {
        experiments::ExperimentConfig config = experiment_config_from(layers, !eval_no_layout);
        experiments::PipelineResult result = experiments::run_pipeline(*backend, pages, config);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        out = eval::to_json(result.report);
        out["training"] = training_summary(result.training);
        std::cerr << eval::format_table(result.report);
      }
      if (!eval_out.empty()) {
        io::write_file(eval_out, out.dump(2));
        manifest.outputs = {{"report", eval_out}};
      }
      manifest.parameters = settings_snapshot(
          layers, {"backend", "dim", "learning_rate", "split_ratios", "split_seed"});
      std::cout << out.dump() << "\n";
    } else if (*loo_cmd) {
      manifest.command = "loo";
      loo_flags.apply(layers);
      auto backend = backend_from(layers);
      docrepr::LayoutFn layout = layout_from(layers);
      experiments::ExperimentConfig config = experiment_config_from(layers, true);
      std::vector<experiments::PageData> pages = load_pages(loo_data, layout);
      experiments::LooResult loo = experiments::run_leave_one_out(*backend, pages, config);
      nlohmann::json rows = nlohmann::json::array();
      double mrr_sum = 0, map_sum = 0, ndcg_sum = 0;
      for (const auto& pr : loo.per_publisher) {
        rows.push_back({{"publisher", pr.publisher},
                        {"n_train_examples", pr.n_train_examples},
                        {"report", eval::to_json(pr.report)}});
        mrr_sum += pr.report.overall.mrr;
        map_sum += pr.report.overall.map;
        ndcg_sum += pr.report.overall.ndcg;
        std::cerr << "held out " << pr.publisher << ": MRR " << pr.report.overall.mrr
                  << ", MAP " << pr.report.overall.map << ", nDCG " << pr.report.overall.ndcg
                  << "\n";
      }
      double n = static_cast<double>(loo.per_publisher.size());
      nlohmann::json out = {{"schema_version", 1},
                            {"held_out", rows},
                            {"average",
                             {{"mrr", mrr_sum / n}, {"map", map_sum / n},
                              {"ndcg", ndcg_sum / n}}}};
      manifest.parameters = settings_snapshot(layers, {"backend", "dim", "split_seed"});
      std::cout << out.dump() << "\n";
    } else if (*stats_cmd) {
      manifest.command = "stats";
      require_exists(stats_data, "dataset directory");
      corpus::Dataset ds = corpus::load_dataset(stats_data);
      corpus::DatasetStats stats = corpus::compute_stats(ds.publications, ds.labels);
      nlohmann::json out = corpus::to_json(stats);
      out["schema_version"] = 1;
      out["n_self_links"] = ds.report.n_self_links;
      std::cout << out.dump() << "\n";
    }
  } catch (const Error& e) {
    code = exit_code_for(e);
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = 5;
    std::cerr << "internal error: " << e.what() << "\n";
  }

  manifest.finished_at = config::utc_timestamp();
  manifest.exit_code = code;
  try {
    config::append_manifest(manifest_path, manifest);
  } catch (const std::exception& e) {
    std::cerr << "warning: could not append run manifest: " << e.what() << "\n";
  }
  return code;
}
