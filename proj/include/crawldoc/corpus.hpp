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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crawldoc/errors.hpp"
#include "crawldoc/url.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::corpus {

using nlohmann::json;

struct AuthorRecord {
  std::string name;
  std::vector<std::string> affiliations;
};

struct PublicationRecord {
  std::string id;
  std::string doi;
  std::string publisher;
  std::string title;
  int year = 0;
  std::vector<AuthorRecord> authors;
  std::string landing_url;
};

/// One labeled outgoing link of a landing page. (publication_id, url) is
/// unique within a dataset.
struct LinkLabel {
  std::string publication_id;
  std::string anchor_text;
  std::string url;
  bool relevant = false;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct DatasetStats {
  size_t n_publications = 0;
  size_t n_links = 0;
  double mean_links_per_page = 0;
  double sd_links_per_page = 0;
  double mean_relevant_per_page = 0;
  double sd_relevant_per_page = 0;
  double mean_authors = 0;
  double sd_authors = 0;
  // Per-author affiliation count, same convention as the other moments.
  double mean_affiliations_per_author = 0;
  double sd_affiliations_per_author = 0;
};

/// Counts reported by the loader. Self-links are counted but never dropped
/// at load time; evaluation decides what to exclude.
struct LoadReport {
  size_t n_publications = 0;
  size_t n_links = 0;
  size_t n_self_links = 0;
};

struct Dataset {
  std::vector<PublicationRecord> publications;
  std::vector<LinkLabel> labels;
  LoadReport report;

  const PublicationRecord& publication(const std::string& id) const {
    for (const auto& p : publications) {
      if (p.id == id) return p;
    }
    throw IntegrityError("unknown publication id: " + id);
  }

  std::vector<LinkLabel> labels_for(const std::string& publication_id) const {
    std::vector<LinkLabel> out;
    for (const auto& l : labels) {
      if (l.publication_id == publication_id) out.push_back(l);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Record validation
// ---------------------------------------------------------------------------

inline void validate_publication(const PublicationRecord& p,
                                 const std::set<std::string>& allowed_publishers = {}) {
  if (p.id.empty()) throw ParseError("publication with empty id");
  if (p.doi.rfind("10.", 0) != 0)
    throw ParseError("publication " + p.id + ": doi must begin with \"10.\"");
  if (p.year < 1900 || p.year > 2100)
    throw ParseError("publication " + p.id + ": year out of range [1900, 2100]");
  if (!is_absolute_http_url(p.landing_url))
    throw ParseError("publication " + p.id + ": landing_url is not an absolute http(s) URL");
  if (!allowed_publishers.empty() && allowed_publishers.count(p.publisher) == 0)
    throw ParseError("publication " + p.id + ": publisher \"" + p.publisher +
                     "\" not in the configured publisher set");
  for (const auto& a : p.authors) {
    if (a.name.empty()) throw ParseError("publication " + p.id + ": author with empty name");
  }
}

inline void validate_label(const LinkLabel& l) {
  if (l.publication_id.empty()) throw ParseError("link label with empty publication_id");
  Url u = parse_url(l.url);
  if (!u.is_absolute() || u.host.empty())
    throw ParseError("link label for " + l.publication_id + ": url not absolute: " + l.url);
}

// ---------------------------------------------------------------------------
// JSONL serialization. One record per line; canonical form sorts keys and
// orders publications by id, labels by (publication_id, url).
// ---------------------------------------------------------------------------

inline json to_json(const PublicationRecord& p) {
  json authors = json::array();
  for (const auto& a : p.authors)
    authors.push_back({{"name", a.name}, {"affiliations", a.affiliations}});
  return json{{"id", p.id},       {"doi", p.doi},   {"publisher", p.publisher},
              {"title", p.title}, {"year", p.year}, {"authors", authors},
              {"landing_url", p.landing_url}};
}

inline json to_json(const LinkLabel& l) {
  return json{{"publication_id", l.publication_id},
              {"anchor_text", l.anchor_text},
              {"url", l.url},
              {"relevant", l.relevant}};
}

namespace detail {

template <typename T>
T field(const json& j, const char* name, size_t line, const char* file) {
  if (!j.contains(name))
    throw ParseError(std::string(file) + " line " + std::to_string(line) +
                     ": missing field \"" + name + "\"");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string(file) + " line " + std::to_string(line) +
                     ": field \"" + name + "\" has the wrong type");
  }
}

inline PublicationRecord publication_from_json(const json& j, size_t line) {
  PublicationRecord p;
  p.id = field<std::string>(j, "id", line, "publications.jsonl");
  p.doi = field<std::string>(j, "doi", line, "publications.jsonl");
  p.publisher = field<std::string>(j, "publisher", line, "publications.jsonl");
  p.title = field<std::string>(j, "title", line, "publications.jsonl");
  p.year = field<int>(j, "year", line, "publications.jsonl");
  p.landing_url = field<std::string>(j, "landing_url", line, "publications.jsonl");
  json authors = field<json>(j, "authors", line, "publications.jsonl");
  for (const auto& a : authors) {
    AuthorRecord rec;
    rec.name = field<std::string>(a, "name", line, "publications.jsonl");
    if (a.contains("affiliations")) rec.affiliations = a.at("affiliations").get<std::vector<std::string>>();
    p.authors.push_back(std::move(rec));
  }
  return p;
}

inline LinkLabel label_from_json(const json& j, size_t line) {
  LinkLabel l;
  l.publication_id = field<std::string>(j, "publication_id", line, "links.jsonl");
  l.anchor_text = field<std::string>(j, "anchor_text", line, "links.jsonl");
  l.url = field<std::string>(j, "url", line, "links.jsonl");
  l.relevant = field<bool>(j, "relevant", line, "links.jsonl");
  return l;
}

inline std::vector<std::pair<size_t, json>> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path.string());
  std::vector<std::pair<size_t, json>> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    json j = json::parse(trimmed, nullptr, false);
    if (j.is_discarded())
      throw ParseError(path.filename().string() + " line " + std::to_string(lineno) +
                       ": malformed JSON");
    records.emplace_back(lineno, std::move(j));
  }
  return records;
}

}  // namespace detail

/// Loads `publications.jsonl` and `links.jsonl` from a dataset directory.
/// Every label must resolve to a loaded publication.
inline Dataset load_dataset(const std::filesystem::path& dir,
                            const std::set<std::string>& allowed_publishers = {}) {
  Dataset ds;
  std::set<std::string> ids;
  for (const auto& [line, j] : detail::read_jsonl(dir / "publications.jsonl")) {
    PublicationRecord p = detail::publication_from_json(j, line);
    try {
      validate_publication(p, allowed_publishers);
    } catch (const ParseError& e) {
      throw ParseError("publications.jsonl line " + std::to_string(line) + ": " + e.what());
    }
    if (!ids.insert(p.id).second)
      throw ParseError("publications.jsonl line " + std::to_string(line) +
                       ": duplicate publication id " + p.id);
    ds.publications.push_back(std::move(p));
  }

  std::map<std::string, std::string> landing_by_id;
  for (const auto& p : ds.publications) landing_by_id[p.id] = normalize_url(p.landing_url);

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [line, j] : detail::read_jsonl(dir / "links.jsonl")) {
    LinkLabel l = detail::label_from_json(j, line);
    try {
      validate_label(l);
    } catch (const ParseError& e) {
      throw ParseError("links.jsonl line " + std::to_string(line) + ": " + e.what());
    }
    auto it = landing_by_id.find(l.publication_id);
    if (it == landing_by_id.end())
      throw IntegrityError("links.jsonl line " + std::to_string(line) +
                           ": label references unknown publication id " + l.publication_id);
    if (!seen.emplace(l.publication_id, l.url).second)
      throw ParseError("links.jsonl line " + std::to_string(line) + ": duplicate (publication, url) pair");
    if (normalize_url(l.url) == it->second) ++ds.report.n_self_links;
    ds.labels.push_back(std::move(l));
  }

  ds.report.n_publications = ds.publications.size();
  ds.report.n_links = ds.labels.size();
  return ds;
}

/// Writes the canonical JSONL form; load_dataset(save_dataset(ds)) is a
/// byte-for-byte fixed point.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<PublicationRecord> pubs = ds.publications;
  std::sort(pubs.begin(), pubs.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<LinkLabel> labels = ds.labels;
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
    return std::tie(a.publication_id, a.url) < std::tie(b.publication_id, b.url);
  });

  std::ofstream pubs_out(dir / "publications.jsonl", std::ios::trunc);
  for (const auto& p : pubs) pubs_out << to_json(p).dump() << "\n";
  std::ofstream links_out(dir / "links.jsonl", std::ios::trunc);
  for (const auto& l : labels) links_out << to_json(l).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Stratified split by publisher. Within each publisher the validation and
/// test sizes are floor(ratio * n); the remainder goes to train. The output
/// is deterministic for a fixed seed.
inline DatasetSplit split_dataset(const std::vector<PublicationRecord>& publications,
                                  std::array<double, 3> ratios, uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ArgumentError("split ratios must sum to 1, got " + std::to_string(sum));
  for (double r : ratios) {
    if (r < 0) throw ArgumentError("split ratios must be non-negative");
  }

  std::map<std::string, std::vector<std::string>> by_publisher;
  for (const auto& p : publications) by_publisher[p.publisher].push_back(p.id);

  DatasetSplit split;
  Rng rng(seed);
  for (auto& [publisher, ids] : by_publisher) {
    std::sort(ids.begin(), ids.end());
    shuffle_deterministic(ids, rng);
    size_t n = ids.size();
    size_t n_val = static_cast<size_t>(ratios[1] * static_cast<double>(n));
    size_t n_test = static_cast<size_t>(ratios[2] * static_cast<double>(n));
    size_t n_train = n - n_val - n_test;
    for (size_t i = 0; i < n; ++i) {
      if (i < n_train) split.train.push_back(ids[i]);
      else if (i < n_train + n_val) split.validation.push_back(ids[i]);
      else split.test.push_back(ids[i]);
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Cleaning and statistics
// ---------------------------------------------------------------------------

/// Drops labels whose normalized URL equals the publication's normalized
/// landing URL. Used when constructing evaluation queries.
inline std::vector<LinkLabel> remove_self_links(const PublicationRecord& publication,
                                                const std::vector<LinkLabel>& labels) {
  std::string landing = normalize_url(publication.landing_url);
  std::vector<LinkLabel> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    if (l.publication_id != publication.id)
      throw ArgumentError("label for publication " + l.publication_id +
                          " passed with publication " + publication.id);
    if (normalize_url(l.url) != landing) out.push_back(l);
  }
  return out;
}

inline DatasetStats compute_stats(const std::vector<PublicationRecord>& publications,
                                  const std::vector<LinkLabel>& labels,
                                  bool sample_sd = false) {
  if (publications.empty()) throw ArgumentError("compute_stats: empty dataset");

  std::map<std::string, size_t> links_per_pub, relevant_per_pub;
  for (const auto& p : publications) {
    links_per_pub[p.id] = 0;
    relevant_per_pub[p.id] = 0;
  }
  for (const auto& l : labels) {
    auto it = links_per_pub.find(l.publication_id);
    if (it == links_per_pub.end())
      throw IntegrityError("label references unknown publication id " + l.publication_id);
    ++it->second;
    if (l.relevant) ++relevant_per_pub[l.publication_id];
  }

  std::vector<double> links, relevant, authors, affiliations;
  for (const auto& p : publications) {
    links.push_back(static_cast<double>(links_per_pub[p.id]));
    relevant.push_back(static_cast<double>(relevant_per_pub[p.id]));
    authors.push_back(static_cast<double>(p.authors.size()));
    for (const auto& a : p.authors)
      affiliations.push_back(static_cast<double>(a.affiliations.size()));
  }

  DatasetStats s;
  s.n_publications = publications.size();
  s.n_links = labels.size();
  s.mean_links_per_page = mean_of(links);
  s.sd_links_per_page = stddev_of(links, sample_sd);
  s.mean_relevant_per_page = mean_of(relevant);
  s.sd_relevant_per_page = stddev_of(relevant, sample_sd);
  s.mean_authors = mean_of(authors);
  s.sd_authors = stddev_of(authors, sample_sd);
  s.mean_affiliations_per_author = mean_of(affiliations);
  s.sd_affiliations_per_author = stddev_of(affiliations, sample_sd);
  return s;
}

inline json to_json(const DatasetStats& s) {
  return json{{"n_publications", s.n_publications},
              {"n_links", s.n_links},
              {"mean_links_per_page", s.mean_links_per_page},
              {"sd_links_per_page", s.sd_links_per_page},
              {"mean_relevant_per_page", s.mean_relevant_per_page},
              {"sd_relevant_per_page", s.sd_relevant_per_page},
              {"mean_authors", s.mean_authors},
              {"sd_authors", s.sd_authors},
              {"mean_affiliations_per_author", s.mean_affiliations_per_author},
              {"sd_affiliations_per_author", s.sd_affiliations_per_author}};
}

}  // namespace crawldoc::corpus
