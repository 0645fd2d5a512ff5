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

// One-hop crawler: fetch a seed page, extract its outgoing links, fetch
// every target once. Politeness is per host (minimum spacing between
// request starts plus a parallelism cap); robots.txt Disallow rules for
// the wildcard agent are honoured. A content-addressed disk cache makes
// repeated crawls cheap and testable offline.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crawldoc/errors.hpp"
#include "crawldoc/html.hpp"
#include "crawldoc/io.hpp"
#include "crawldoc/url.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::fetcher {

struct FetchPolicy {
  int timeout_ms = 15000;
  int max_redirects = 5;
  size_t max_body_bytes = 8 * 1024 * 1024;
  std::string user_agent = "crawldoc/0.1";
  size_t per_host_parallelism = 4;
  int per_host_delay_ms = 500;
  size_t max_workers = 16;
  bool respect_robots = true;
  std::string cache_dir;  // empty = no caching
  // When set, a raised flag stops the crawl after in-flight requests
  // finish; already-collected results remain usable.
  const std::atomic<bool>* cancel = nullptr;
};

struct FetchedResource {
  std::string url;        // as requested (normalized)
  std::string final_url;  // after redirects
  int status = 0;
  std::string content_type;
  std::string body;
  bool truncated = false;
  bool from_cache = false;

  bool ok() const { return status >= 200 && status < 300; }
  bool is_html() const {
    return content_type.find("html") != std::string::npos ||
           (content_type.empty() && body.find('<') != std::string::npos);
  }
  bool is_pdf() const {
    return content_type.find("pdf") != std::string::npos ||
           body.compare(0, 5, "%PDF-") == 0;
  }
};

struct FetchFailure {
  std::string url;
  std::string reason;
};

using FetchResult = std::variant<FetchedResource, FetchFailure>;

inline bool fetch_ok(const FetchResult& r) {
  return std::holds_alternative<FetchedResource>(r);
}

struct Link {
  std::string url;     // resolved, normalized, fragment-free
  std::string anchor;  // collapsed anchor text ("" when none)
};

// ---------------------------------------------------------------------------
// Link extraction
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_fetchable_scheme(std::string_view href) {
  std::string lower = to_lower(std::string(href.substr(0, href.find(':'))));
  if (href.find(':') == std::string_view::npos) return true;  // relative
  return lower == "http" || lower == "https";
}

inline std::string anchor_text(const html::Node& a) {
  std::string text = html::text_content(a);
  if (!text.empty()) return text;
  std::string alt;
  html::for_each_element(a, [&](const html::Node& el) {
    if (alt.empty() && el.tag == "img") {
      if (auto v = el.attr("alt")) alt = collapse_whitespace(*v);
    }
  });
  return alt;
}

}  // namespace detail

/// Collects outgoing <a href> links in document order. Fragment-only and
/// non-HTTP references are skipped, resolved URLs lose their fragment,
/// and a URL seen twice keeps its first anchor text.
inline std::vector<Link> extract_links(std::string_view html_body, const std::string& base_url) {
  std::unique_ptr<html::Node> root = html::parse(html_body);

  Url base = parse_url(base_url);
  // <base href> overrides the document URL for resolution.
  html::for_each_element(*root, [&](const html::Node& el) {
    if (el.tag == "base") {
      if (auto href = el.attr("href")) {
        try {
          base = resolve_url(base, trim(*href));
        } catch (const ParseError&) {
        }
      }
    }
  });

  std::vector<Link> links;
  std::map<std::string, size_t> seen;
  html::for_each_element(*root, [&](const html::Node& el) {
    if (el.tag != "a") return;
    auto href = el.attr("href");
    if (!href) return;
    std::string target(trim(*href));
    if (target.empty() || target[0] == '#') return;  // same-page reference
    if (!detail::is_fetchable_scheme(target)) return;
    Url resolved;
    try {
      resolved = resolve_url(base, target);
    } catch (const ParseError&) {
      return;
    }
    if (!resolved.is_http()) return;
    resolved.fragment.reset();
    std::string normalized = normalize_url(resolved);
    if (normalized.empty()) return;
    if (seen.emplace(normalized, links.size()).second)
      links.push_back({normalized, detail::anchor_text(el)});
  });
  return links;
}

// ---------------------------------------------------------------------------
// robots.txt
// ---------------------------------------------------------------------------

struct RobotsRules {
  std::vector<std::string> disallow;  // path prefixes for User-agent: *
};

/// Minimal robots.txt reader: only User-agent: * groups, only Disallow
/// lines. An empty Disallow value allows everything (per convention).
inline RobotsRules parse_robots(std::string_view body) {
  RobotsRules rules;
  bool group_has_star = false;
  bool in_rules = false;  // rules seen since the last agent line
  size_t pos = 0;
  while (pos < body.size()) {
    size_t eol = body.find('\n', pos);
    std::string_view line =
        body.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? body.size() : eol + 1;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string key = to_lower(std::string(trim(line.substr(0, colon))));
    std::string value(trim(line.substr(colon + 1)));
    if (key == "user-agent") {
      if (in_rules) {  // a new group header resets membership
        group_has_star = false;
        in_rules = false;
      }
      if (value == "*") group_has_star = true;
    } else {
      in_rules = true;
      if (key == "disallow" && group_has_star && !value.empty())
        rules.disallow.push_back(value);
    }
  }
  return rules;
}

inline bool robots_allows(const RobotsRules& rules, std::string_view path) {
  if (path.empty()) path = "/";
  for (const auto& prefix : rules.disallow) {
    if (path.substr(0, prefix.size()) == prefix) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Single fetch with redirects, caps and cache
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cache_key(const std::string& normalized_url) {
  return sha256_hex(normalized_url);
}

inline std::optional<FetchedResource> cache_load(const FetchPolicy& policy,
                                                 const std::string& normalized_url) {
  if (policy.cache_dir.empty()) return std::nullopt;
  std::filesystem::path base =
      std::filesystem::path(policy.cache_dir) / cache_key(normalized_url);
  std::filesystem::path meta_path = base.string() + ".json";
  std::filesystem::path body_path = base.string() + ".body";
  if (!std::filesystem::exists(meta_path) || !std::filesystem::exists(body_path))
    return std::nullopt;
  try {
    nlohmann::json meta = nlohmann::json::parse(io::read_file(meta_path));
    FetchedResource res;
    res.url = normalized_url;
    res.final_url = meta.value("final_url", normalized_url);
    res.status = meta.value("status", 0);
    res.content_type = meta.value("content_type", std::string());
    res.truncated = meta.value("truncated", false);
    res.body = io::read_file(body_path);
    res.from_cache = true;
    return res;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable cache entries are treated as misses
  }
}

inline void cache_store(const FetchPolicy& policy, const FetchedResource& res) {
  if (policy.cache_dir.empty() || !res.ok()) return;
  io::ensure_dir(policy.cache_dir);
  std::filesystem::path base = std::filesystem::path(policy.cache_dir) / cache_key(res.url);
  nlohmann::json meta = {{"url", res.url},
                         {"final_url", res.final_url},
                         {"status", res.status},
                         {"content_type", res.content_type},
                         {"truncated", res.truncated}};
  io::write_file(base.string() + ".json", meta.dump());
  io::write_file(base.string() + ".body", res.body);
}

struct RawResponse {
  int status = 0;
  std::string content_type;
  std::string location;
  std::string body;
  bool truncated = false;
};

inline RawResponse http_get(const FetchPolicy& policy, const Url& url) {
  std::string origin = url.scheme + "://" + url.host;
  if (!url.port.empty()) origin += ":" + url.port;
  httplib::Client client(origin);
  client.set_connection_timeout(policy.timeout_ms / 1000, (policy.timeout_ms % 1000) * 1000);
  client.set_read_timeout(policy.timeout_ms / 1000, (policy.timeout_ms % 1000) * 1000);
  client.set_follow_location(false);
  client.set_default_headers({{"User-Agent", policy.user_agent}});

  std::string target = url.path.empty() ? "/" : url.path;
  if (url.query) target += "?" + *url.query;

  RawResponse raw;
  auto res = client.Get(
      target,
      [&raw](const httplib::Response& response) {
        raw.status = response.status;
        raw.content_type = response.get_header_value("Content-Type");
        raw.location = response.get_header_value("Location");
        return true;
      },
      [&raw, &policy](const char* data, size_t len) {
        size_t room = policy.max_body_bytes > raw.body.size()
                          ? policy.max_body_bytes - raw.body.size()
                          : 0;
        if (len > room) {
          raw.body.append(data, room);
          raw.truncated = true;
          return false;  // stop the transfer
        }
        raw.body.append(data, len);
        return true;
      });
  if (!res) {
    if (raw.truncated && raw.status != 0) return raw;  // we aborted on purpose
    throw TransportError("GET " + url.to_string() + " failed: " + httplib::to_string(res.error()));
  }
  return raw;
}

}  // namespace detail

/// Fetches one URL, following redirects manually so loops and chain
/// length can be policed. Non-2xx statuses are returned, not thrown;
/// only transport-level failures throw.
inline FetchedResource fetch_url(const FetchPolicy& policy, const std::string& input_url) {
  Url first = parse_url(normalize_url(input_url));
  if (!first.is_http()) throw ArgumentError("fetch_url: not an http(s) url: " + input_url);
  std::string normalized = first.to_string();

  if (auto cached = detail::cache_load(policy, normalized)) return *cached;

  std::vector<std::string> chain{normalized};
  Url current = first;
  for (int hop = 0; hop <= policy.max_redirects; ++hop) {
    detail::RawResponse raw = detail::http_get(policy, current);
    bool redirect = raw.status == 301 || raw.status == 302 || raw.status == 303 ||
                    raw.status == 307 || raw.status == 308;
    if (redirect && !raw.location.empty()) {
      Url next = parse_url(normalize_url(resolve_url(current, raw.location)));
      std::string next_str = next.to_string();
      for (const auto& seen : chain)
        if (seen == next_str)
          throw PolicyError("redirect loop at " + next_str + " (from " + normalized + ")");
      if (hop == policy.max_redirects)
        throw PolicyError("redirect chain exceeds " + std::to_string(policy.max_redirects) +
                          " hops from " + normalized);
      chain.push_back(next_str);
      current = next;
      continue;
    }
    FetchedResource res;
    res.url = normalized;
    res.final_url = current.to_string();
    res.status = raw.status;
    res.content_type = raw.content_type;
    res.body = std::move(raw.body);
    res.truncated = raw.truncated;
    detail::cache_store(policy, res);
    return res;
  }
  throw PolicyError("redirect chain exceeds " + std::to_string(policy.max_redirects) +
                    " hops from " + normalized);
}

// ---------------------------------------------------------------------------
// One-hop crawl
// ---------------------------------------------------------------------------

struct CrawlBundle {
  FetchedResource seed;
  std::vector<Link> links;          // document order, deduplicated
  std::vector<FetchResult> results; // parallel to links
};

namespace detail {

class RobotsCache {
 public:
  explicit RobotsCache(const FetchPolicy& policy) : policy_(policy) {}

  /// Allows everything when robots.txt is missing or unreadable.
  bool allows(const Url& url) {
    if (!policy_.respect_robots) return true;
    std::string host_key = url.scheme + "://" + url.host +
                           (url.port.empty() ? "" : ":" + url.port);
    RobotsRules* rules = nullptr;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(host_key);
      if (it != cache_.end()) rules = &it->second;
    }
    if (!rules) {
      RobotsRules fetched;
      try {
        FetchPolicy quiet = policy_;
        quiet.respect_robots = false;
        FetchedResource res = fetch_url(quiet, host_key + "/robots.txt");
        if (res.ok()) fetched = parse_robots(res.body);
      } catch (const Error&) {
        // unreachable robots.txt leaves the host unrestricted
      }
      std::lock_guard<std::mutex> lock(mu_);
      rules = &cache_.emplace(host_key, std::move(fetched)).first->second;
    }
    return robots_allows(*rules, url.path.empty() ? "/" : url.path);
  }

 private:
  const FetchPolicy& policy_;
  std::mutex mu_;
  std::map<std::string, RobotsRules> cache_;
};

/// Per-host politeness scheduler: spaces request starts and bounds
/// concurrent requests per host.
class HostScheduler {
 public:
  using Clock = std::chrono::steady_clock;

  explicit HostScheduler(const FetchPolicy& policy) : policy_(policy) {}

  /// Claims the next eligible job index, or returns nullopt when the
  /// queue is drained.
  std::optional<size_t> acquire(const std::vector<std::string>& hosts) {
    std::unique_lock<std::mutex> lock(mu_);
    while (true) {
      if (policy_.cancel && policy_.cancel->load()) return std::nullopt;
      if (pending_.empty()) return std::nullopt;
      Clock::time_point now = Clock::now();
      Clock::time_point earliest = Clock::time_point::max();
      for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        const std::string& host = hosts[*it];
        HostState& hs = state_[host];
        if (hs.in_flight >= policy_.per_host_parallelism) continue;
        if (hs.next_start > now) {
          earliest = std::min(earliest, hs.next_start);
          continue;
        }
        size_t job = *it;
        pending_.erase(it);
        ++hs.in_flight;
        hs.next_start = now + std::chrono::milliseconds(policy_.per_host_delay_ms);
        return job;
      }
      // Bounded waits so a cancel flag raised from a signal handler
      // (which cannot notify the condition variable) is still noticed.
      Clock::time_point cap = now + std::chrono::milliseconds(100);
      cv_.wait_until(lock, earliest == Clock::time_point::max() ? cap : std::min(earliest, cap));
    }
  }

  void release(const std::string& host) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      --state_[host].in_flight;
    }
    cv_.notify_all();
  }

  void enqueue(size_t job) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      pending_.push_back(job);
    }
    cv_.notify_all();
  }

 private:
  struct HostState {
    size_t in_flight = 0;
    Clock::time_point next_start = Clock::time_point::min();
  };

  const FetchPolicy& policy_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<size_t> pending_;
  std::map<std::string, HostState> state_;
};

}  // namespace detail

/// Fetches the seed page, extracts its links and fetches every target.
/// Seed failures throw; per-link failures are recorded in the bundle.
inline CrawlBundle crawl_one_hop(const FetchPolicy& policy, const std::string& seed_url) {
  detail::RobotsCache robots(policy);
  Url seed_parsed = parse_url(normalize_url(seed_url));
  if (!robots.allows(seed_parsed))
    throw PolicyError("seed url disallowed by robots.txt: " + seed_parsed.to_string());

  CrawlBundle bundle;
  bundle.seed = fetch_url(policy, seed_url);
  if (!bundle.seed.ok())
    throw TransportError("seed fetch returned status " + std::to_string(bundle.seed.status) +
                         " for " + bundle.seed.url);
  if (bundle.seed.is_html())
    bundle.links = extract_links(bundle.seed.body, bundle.seed.final_url);
  bundle.results.reserve(bundle.links.size());
  for (const auto& link : bundle.links)
    bundle.results.push_back(FetchFailure{link.url, "not fetched"});

  std::vector<std::string> hosts(bundle.links.size());
  for (size_t i = 0; i < bundle.links.size(); ++i) {
    try {
      Url u = parse_url(bundle.links[i].url);
      hosts[i] = u.scheme + "://" + u.host + (u.port.empty() ? "" : ":" + u.port);
    } catch (const ParseError&) {
      hosts[i] = bundle.links[i].url;
    }
  }

  detail::HostScheduler scheduler(policy);
  for (size_t i = 0; i < bundle.links.size(); ++i) scheduler.enqueue(i);

  std::mutex results_mu;
  auto worker = [&]() {
    while (auto job = scheduler.acquire(hosts)) {
      size_t i = *job;
      FetchResult result = FetchFailure{bundle.links[i].url, "unknown"};
      try {
        Url u = parse_url(bundle.links[i].url);
        if (!robots.allows(u)) {
          result = FetchFailure{bundle.links[i].url, "disallowed by robots.txt"};
        } else {
          result = fetch_url(policy, bundle.links[i].url);
        }
      } catch (const Error& e) {
        result = FetchFailure{bundle.links[i].url, e.what()};
      }
      {
        std::lock_guard<std::mutex> lock(results_mu);
        bundle.results[i] = std::move(result);
      }
      scheduler.release(hosts[i]);
    }
  };

  size_t n_workers = std::min(policy.max_workers, std::max<size_t>(1, bundle.links.size()));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return bundle;
}

// ---------------------------------------------------------------------------
// Bundle persistence
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json resource_meta(const FetchedResource& res) {
  return nlohmann::json{{"url", res.url},
                        {"final_url", res.final_url},
                        {"status", res.status},
                        {"content_type", res.content_type},
                        {"truncated", res.truncated},
                        {"body_key", cache_key(res.url)}};
}

inline FetchedResource resource_from_meta(const nlohmann::json& j,
                                          const std::filesystem::path& bodies) {
  FetchedResource res;
  res.url = j.at("url").get<std::string>();
  res.final_url = j.value("final_url", res.url);
  res.status = j.value("status", 0);
  res.content_type = j.value("content_type", std::string());
  res.truncated = j.value("truncated", false);
  res.body = io::read_file(bodies / j.at("body_key").get<std::string>());
  return res;
}

}  // namespace detail

/// Writes index.json plus one body file per fetched resource, keyed by
/// the URL digest.
inline void save_bundle(const std::filesystem::path& dir, const CrawlBundle& bundle) {
  io::ensure_dir(dir / "bodies");
  nlohmann::json index;
  index["schema_version"] = 1;
  index["seed"] = detail::resource_meta(bundle.seed);
  io::write_file(dir / "bodies" / detail::cache_key(bundle.seed.url), bundle.seed.body);

  index["links"] = nlohmann::json::array();
  for (const auto& link : bundle.links)
    index["links"].push_back({{"url", link.url}, {"anchor", link.anchor}});

  index["results"] = nlohmann::json::array();
  for (size_t i = 0; i < bundle.results.size(); ++i) {
    if (const auto* res = std::get_if<FetchedResource>(&bundle.results[i])) {
      nlohmann::json meta = detail::resource_meta(*res);
      meta["ok"] = true;
      index["results"].push_back(std::move(meta));
      io::write_file(dir / "bodies" / detail::cache_key(res->url), res->body);
    } else {
      const auto& fail = std::get<FetchFailure>(bundle.results[i]);
      index["results"].push_back({{"ok", false}, {"url", fail.url}, {"reason", fail.reason}});
    }
  }
  io::write_file(dir / "index.json", index.dump(2));
}

inline CrawlBundle load_bundle(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(io::read_file(dir / "index.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bundle index.json is invalid: " + std::string(e.what()));
  }
  std::filesystem::path bodies = dir / "bodies";
  CrawlBundle bundle;
  try {
    bundle.seed = detail::resource_from_meta(index.at("seed"), bodies);
    for (const auto& l : index.at("links"))
      bundle.links.push_back({l.at("url").get<std::string>(), l.value("anchor", std::string())});
    for (const auto& r : index.at("results")) {
      if (r.value("ok", false))
        bundle.results.push_back(detail::resource_from_meta(r, bodies));
      else
        bundle.results.push_back(FetchFailure{r.value("url", std::string()),
                                              r.value("reason", std::string("unknown"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bundle index.json is malformed: " + std::string(e.what()));
  }
  if (bundle.results.size() != bundle.links.size())
    throw IntegrityError("bundle links and results disagree in length");
  return bundle;
}

}  // namespace crawldoc::fetcher
