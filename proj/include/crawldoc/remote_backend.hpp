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

// HTTP embedding backend. POSTs batched inputs to {endpoint}/embed and
// expects {"vectors": [[...], ...], "dim": d} back. Transient failures
// are retried with exponential backoff; contract violations (wrong
// dimension, wrong count) are not retried.

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crawldoc/embedder.hpp"
#include "crawldoc/errors.hpp"

namespace crawldoc::embedder {

struct RemoteConfig {
  std::string endpoint;           // e.g. "http://localhost:8080"
  std::string model_name = "remote";
  size_t dimension = 0;           // 0 = accept whatever the server reports
  size_t max_tokens = kDefaultMaxTokens;
  int max_attempts = 3;
  int backoff_ms = 100;           // doubled after each failed attempt
  int timeout_ms = 30000;
};

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
      throw ArgumentError("RemoteBackend: endpoint must not be empty");
    if (config_.max_attempts < 1)
      throw ArgumentError("RemoteBackend: max_attempts must be at least 1");
  }

  std::string name() const override { return config_.model_name; }

  size_t dimension() const override { return config_.dimension; }

  size_t max_tokens() const override { return config_.max_tokens; }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& inputs,
                                     Role role) override {
    if (inputs.empty()) return {};
    nlohmann::json request;
    request["inputs"] = inputs;
    request["role"] = role_name(role);
    const std::string payload = request.dump();

    std::string last_error;
    int delay_ms = config_.backoff_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        delay_ms *= 2;
      }
      httplib::Client client(config_.endpoint);
      client.set_connection_timeout(0, config_.timeout_ms * 1000);
      client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
      auto res = client.Post("/embed", payload, "application/json");
      if (!res) {
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server status " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300)
        throw BackendError(name() + ": embed request rejected with status " +
                           std::to_string(res->status));
      return parse_response(res->body, inputs.size(), role);
    }
    throw BackendError(name() + ": embed failed after " +
                       std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
  }

 private:
  std::vector<EmbeddingVector> parse_response(const std::string& body, size_t expected,
                                              Role role) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ContractError(name() + ": invalid JSON in embed response: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array())
      throw ContractError(name() + ": embed response is missing the vectors array");
    const auto& vectors = doc["vectors"];
    if (vectors.size() != expected)
      throw ContractError(name() + ": expected " + std::to_string(expected) +
                          " vectors, got " + std::to_string(vectors.size()));
    size_t dim = config_.dimension;
    if (doc.contains("dim") && doc["dim"].is_number_unsigned()) {
      size_t reported = doc["dim"].get<size_t>();
      if (dim != 0 && reported != dim)
        throw ContractError(name() + ": server reports dim " + std::to_string(reported) +
                            ", expected " + std::to_string(dim));
      dim = reported;
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& row : vectors) {
      if (!row.is_array())
        throw ContractError(name() + ": vector entry is not an array");
      EmbeddingVector v;
      v.role = role;
      v.values.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw ContractError(name() + ": non-numeric vector component");
        v.values.push_back(x.get<double>());
      }
      if (dim != 0 && v.values.size() != dim)
        throw ContractError(name() + ": vector has dim " + std::to_string(v.values.size()) +
                            ", expected " + std::to_string(dim));
      if (dim == 0) dim = v.values.size();
      normalize(v.values);  // defend against servers that skip normalization
      out.push_back(std::move(v));
    }
    if (config_.dimension == 0) config_.dimension = dim;
    return out;
  }

  RemoteConfig config_;
};

}  // namespace crawldoc::embedder
