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

#include <stdexcept>
#include <string>

namespace crawldoc {

/// Base class for all crawldoc errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or precondition violation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (JSON, HTML, PDF, URL, dataset records).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Dataset referential-integrity violation (e.g. a label pointing at an
/// unknown publication id).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Network-level failure: DNS, connect, timeout. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A fetch policy was violated (redirect loop, too many redirects,
/// robots exclusion on the seed).
class PolicyError : public Error {
 public:
  using Error::Error;
};

/// An interface contract between components was broken (dimension
/// mismatch, role mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Embedding backend failure (remote endpoint down after retries, bad
/// response shape).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// External layout renderer unreachable or misbehaving.
class RendererError : public Error {
 public:
  using Error::Error;
};

/// A command produced no usable output (page without links, split
/// without test queries). Distinguished so callers can exit cleanly.
class EmptyError : public Error {
 public:
  using Error::Error;
};

/// Document extraction failure. Carries a stable category string such as
/// "not-pdf", "truncated", "encrypted", "bad-object", "unsupported-filter".
class ExtractionError : public Error {
 public:
  ExtractionError(std::string category, const std::string& msg)
      : Error(category + ": " + msg), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

}  // namespace crawldoc
