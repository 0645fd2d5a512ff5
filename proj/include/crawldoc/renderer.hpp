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

// Client for an external HTML layout renderer speaking a small JSON
// protocol, plus the policy for falling back to the built-in
// deterministic layout when the renderer is unreachable.

#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crawldoc/docrepr.hpp"
#include "crawldoc/errors.hpp"

namespace crawldoc::renderer {

enum class Fallback {
  fail,           // renderer errors propagate as RendererError
  deterministic,  // fall back to the built-in box model
};

struct RendererConfig {
  std::string endpoint;  // e.g. "http://localhost:9222"; empty = no renderer
  Fallback fallback = Fallback::deterministic;
  int timeout_ms = 10000;
};

namespace detail {

inline docrepr::PxLayout parse_layout_response(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw RendererError(std::string("renderer returned invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array())
    throw RendererError("renderer response is missing the blocks array");
  docrepr::PxLayout layout;
  for (const auto& item : doc["blocks"]) {
    if (!item.is_object()) throw RendererError("renderer block is not an object");
    docrepr::PxBlock block;
    try {
      block.text = item.at("text").get<std::string>();
      block.x = item.at("x").get<double>();
      block.y = item.at("y").get<double>();
      block.w = item.at("w").get<double>();
      block.h = item.at("h").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw RendererError(std::string("renderer block is malformed: ") + e.what());
    }
    layout.blocks.push_back(std::move(block));
  }
  if (doc.contains("document_height") && doc["document_height"].is_number())
    layout.document_height = doc["document_height"].get<double>();
  else {
    double max_y = 0;
    for (const auto& b : layout.blocks) max_y = std::max(max_y, b.y + b.h);
    layout.document_height = max_y;
  }
  if (doc.contains("viewport_width") && doc["viewport_width"].is_number())
    layout.viewport_width = doc["viewport_width"].get<double>();
  return layout;
}

}  // namespace detail

/// Asks the configured renderer to lay out the document. Throws
/// RendererError on transport or protocol failure.
inline docrepr::PxLayout render_remote(const RendererConfig& config, std::string_view html_body,
                                       const std::string& base_url) {
  if (config.endpoint.empty()) throw RendererError("no renderer endpoint configured");
  httplib::Client client(config.endpoint);
  client.set_connection_timeout(0, config.timeout_ms * 1000);
  client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);

  nlohmann::json request = {
      {"html", std::string(html_body)},
      {"base_url", base_url},
      {"viewport_width", static_cast<int>(docrepr::kViewportWidthPx)},
  };
  auto res = client.Post("/render", request.dump(), "application/json");
  if (!res)
    throw RendererError("renderer unreachable: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw RendererError("renderer returned status " + std::to_string(res->status));
  return detail::parse_layout_response(res->body);
}

/// Returns a layout function honouring the configured fallback policy.
inline docrepr::LayoutFn make_layout_fn(const RendererConfig& config) {
  if (config.endpoint.empty()) return docrepr::deterministic_layout;
  return [config](std::string_view html_body, const std::string& base_url) -> docrepr::PxLayout {
    try {
      return render_remote(config, html_body, base_url);
    } catch (const RendererError&) {
      if (config.fallback == Fallback::deterministic)
        return docrepr::deterministic_layout(html_body, base_url);
      throw;
    }
  };
}

}  // namespace crawldoc::renderer
