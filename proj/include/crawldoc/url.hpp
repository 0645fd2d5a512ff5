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

#include <optional>
#include <string>
#include <string_view>

#include "crawldoc/errors.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc {

/// A parsed URL reference (RFC 3986). Components are stored verbatim; `host`
/// may be empty for relative references.
struct Url {
  std::string scheme;    // lowercased; empty for relative references
  std::string userinfo;  // without the trailing '@'
  std::string host;
  std::string port;      // digits only, empty when absent
  std::string path;
  std::optional<std::string> query;     // without '?'
  std::optional<std::string> fragment;  // without '#'
  bool has_authority = false;

  bool is_absolute() const { return !scheme.empty(); }
  bool is_http() const { return scheme == "http" || scheme == "https"; }

  std::string authority() const {
    std::string a;
    if (!userinfo.empty()) a += userinfo + "@";
    a += host;
    if (!port.empty()) a += ":" + port;
    return a;
  }

  std::string to_string() const {
    std::string s;
    if (!scheme.empty()) s += scheme + ":";
    if (has_authority) s += "//" + authority();
    s += path;
    if (query) s += "?" + *query;
    if (fragment) s += "#" + *fragment;
    return s;
  }
};

namespace detail {

inline bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

// RFC 3986 section 5.2.4.
inline std::string remove_dot_segments(std::string_view input) {
  std::string in(input), out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0 || in == "/..") {
      in.replace(0, in == "/.." ? 3 : 4, "/");
      size_t slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      size_t start = in[0] == '/' ? 1 : 0;
      size_t next = in.find('/', start);
      out += in.substr(0, next == std::string::npos ? in.size() : next);
      in.erase(0, next == std::string::npos ? in.size() : next);
    }
  }
  return out;
}

}  // namespace detail

/// Parses an absolute URL or relative reference. Throws ParseError only on
/// structurally broken input (stray whitespace is trimmed, not rejected).
inline Url parse_url(std::string_view raw) {
  Url u;
  std::string_view s = trim(raw);

  if (auto hash = s.find('#'); hash != std::string_view::npos) {
    u.fragment = std::string(s.substr(hash + 1));
    s = s.substr(0, hash);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    u.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }

  // scheme: must start with a letter and precede any '/' to avoid
  // misreading "dir/a:b" as a scheme.
  auto colon = s.find(':');
  if (colon != std::string_view::npos && colon > 0 &&
      std::isalpha(static_cast<unsigned char>(s[0]))) {
    bool ok = true;
    for (size_t i = 1; i < colon; ++i) {
      if (!detail::is_scheme_char(s[i])) { ok = false; break; }
    }
    if (ok && s.substr(0, colon).find('/') == std::string_view::npos) {
      u.scheme = to_lower(s.substr(0, colon));
      s = s.substr(colon + 1);
    }
  }

  if (s.rfind("//", 0) == 0) {
    u.has_authority = true;
    s = s.substr(2);
    auto end = s.find_first_of("/");
    std::string_view auth = s.substr(0, end);
    s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
    if (auto at = auth.rfind('@'); at != std::string_view::npos) {
      u.userinfo = std::string(auth.substr(0, at));
      auth = auth.substr(at + 1);
    }
    if (auto c = auth.rfind(':'); c != std::string_view::npos &&
        auth.find(']') == std::string_view::npos) {  // not an IPv6 literal
      std::string_view port = auth.substr(c + 1);
      for (char ch : port) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
          throw ParseError("invalid port in URL: " + std::string(raw));
      }
      u.port = std::string(port);
      auth = auth.substr(0, c);
    }
    u.host = to_lower(auth);
  }
  u.path = std::string(s);
  return u;
}

/// RFC 3986 section 5.2.2 reference resolution.
inline Url resolve_url(const Url& base, const Url& ref) {
  Url t;
  if (!ref.scheme.empty()) {
    t.scheme = ref.scheme;
    t.has_authority = ref.has_authority;
    t.userinfo = ref.userinfo;
    t.host = ref.host;
    t.port = ref.port;
    t.path = detail::remove_dot_segments(ref.path);
    t.query = ref.query;
  } else {
    t.scheme = base.scheme;
    if (ref.has_authority) {
      t.has_authority = true;
      t.userinfo = ref.userinfo;
      t.host = ref.host;
      t.port = ref.port;
      t.path = detail::remove_dot_segments(ref.path);
      t.query = ref.query;
    } else {
      t.has_authority = base.has_authority;
      t.userinfo = base.userinfo;
      t.host = base.host;
      t.port = base.port;
      if (ref.path.empty()) {
        t.path = base.path;
        t.query = ref.query ? ref.query : base.query;
      } else {
        if (ref.path[0] == '/') {
          t.path = detail::remove_dot_segments(ref.path);
        } else {
          // Merge: base path up to its last '/', then the reference.
          std::string merged;
          if (base.has_authority && base.path.empty()) {
            merged = "/" + ref.path;
          } else {
            auto slash = base.path.find_last_of('/');
            merged = (slash == std::string::npos ? "" : base.path.substr(0, slash + 1)) + ref.path;
          }
          t.path = detail::remove_dot_segments(merged);
        }
        t.query = ref.query;
      }
    }
  }
  t.fragment = ref.fragment;
  return t;
}

inline Url resolve_url(const Url& base, std::string_view ref) {
  return resolve_url(base, parse_url(ref));
}

/// Canonical form used wherever two URLs are compared for identity
/// (self-link removal, crawl bundle keys, cache keys): lowercase scheme and
/// host, drop the fragment, drop a default port, strip one trailing slash.
inline std::string normalize_url(const Url& url) {
  Url u = url;
  u.fragment.reset();
  if ((u.scheme == "http" && u.port == "80") || (u.scheme == "https" && u.port == "443"))
    u.port.clear();
  if (u.path.size() > 1 && u.path.back() == '/') u.path.pop_back();
  if (u.path == "/") u.path.clear();
  return u.to_string();
}

inline std::string normalize_url(std::string_view url) { return normalize_url(parse_url(url)); }

/// True for absolute http(s) URLs — the form required of landing pages and
/// dataset link targets.
inline bool is_absolute_http_url(std::string_view s) {
  try {
    Url u = parse_url(s);
    return u.is_http() && !u.host.empty();
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace crawldoc
