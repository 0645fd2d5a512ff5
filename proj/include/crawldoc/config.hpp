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

// Layered run configuration for the command-line tool. Precedence, most
// to least specific: command-line flag, CRAWLDOC_* environment
// variable, JSON config file, built-in default. Also defines the run
// manifest appended after every invocation so runs stay auditable.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crawldoc/errors.hpp"
#include "crawldoc/io.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::config {

inline std::string env_key_for(std::string_view key, std::string_view prefix = "CRAWLDOC_") {
  std::string out(prefix);
  for (char c : key) {
    if (c == '.' || c == '-')
      out.push_back('_');
    else
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

/// Resolves settings by precedence. Keys are flat snake_case names
/// ("cache_dir", "timeout_ms"); the file layer is a flat JSON object.
class Layers {
 public:
  void load_file(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
      throw ParseError("config file " + path.string() + " must hold a JSON object");
    file_ = doc;
  }

  void set_flag(const std::string& key, std::string value) { flags_[key] = std::move(value); }

  /// Environment lookup is injectable so tests need not mutate the
  /// process environment.
  void set_env_reader(std::function<std::optional<std::string>(const std::string&)> reader) {
    env_reader_ = std::move(reader);
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto it = flags_.find(key); it != flags_.end()) return it->second;
    std::string env_key = env_key_for(key);
    if (env_reader_) {
      if (auto v = env_reader_(env_key)) return v;
    } else if (const char* v = std::getenv(env_key.c_str())) {
      return std::string(v);
    }
    if (file_.contains(key)) {
      const auto& v = file_[key];
      if (v.is_string()) return v.get<std::string>();
      return v.dump();
    }
    return std::nullopt;
  }

  std::string get_string(const std::string& key, std::string fallback) const {
    if (auto v = raw(key)) return *v;
    return fallback;
  }

  int64_t get_int(const std::string& key, int64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      int64_t out = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return out;
    } catch (const std::exception&) {
      throw ArgumentError("setting " + key + " must be an integer, got \"" + *v + "\"");
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      double out = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return out;
    } catch (const std::exception&) {
      throw ArgumentError("setting " + key + " must be a number, got \"" + *v + "\"");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::string lower = to_lower(*v);
    if (lower == "1" || lower == "true" || lower == "yes" || lower == "on") return true;
    if (lower == "0" || lower == "false" || lower == "no" || lower == "off") return false;
    throw ArgumentError("setting " + key + " must be a boolean, got \"" + *v + "\"");
  }

  const nlohmann::json& file_values() const { return file_; }

 private:
  nlohmann::json file_ = nlohmann::json::object();
  std::map<std::string, std::string> flags_;
  std::function<std::optional<std::string>(const std::string&)> env_reader_;
};

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::string started_at;
  std::string finished_at;
  int exit_code = 0;
};

inline nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"schema_version", 1}, {"command", m.command},
                        {"args", m.args},      {"parameters", m.parameters},
                        {"outputs", m.outputs}, {"started_at", m.started_at},
                        {"finished_at", m.finished_at}, {"exit_code", m.exit_code}};
}

/// Appends one manifest line to the JSONL audit file.
inline void append_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open manifest file " + path.string());
  out << to_json(m).dump() << "\n";
}

}  // namespace crawldoc::config
