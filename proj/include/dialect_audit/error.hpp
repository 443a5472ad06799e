// Copyright 2026 The dialect-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dialect_audit {

// Base of every error raised by the library. Subclasses split "the caller
// gave us bad input" from "something underneath us failed"; the CLI maps the
// former to exit code 2 and the latter to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or bad data supplied by the caller.
class InputError : public Error {
 public:
  using Error::Error;
};

// TSV ingestion problems (missing columns, empty filtered pool).
class IngestError : public InputError {
 public:
  using InputError::InputError;
};

// Persisted file carries a schema version this build does not understand.
class SchemaError : public InputError {
 public:
  SchemaError(const std::string& what, std::string found)
      : InputError(what), found_version_(std::move(found)) {}
  const std::string& found_version() const noexcept { return found_version_; }

 private:
  std::string found_version_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Model file missing, unreadable or structurally wrong.
class LoadError : public Error {
 public:
  LoadError(const std::string& path, const std::string& detail)
      : Error("cannot load model '" + path + "': " + detail), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ScoringError : public Error {
 public:
  explicit ScoringError(const std::string& what, std::size_t index = npos)
      : Error(what), index_(index) {}
  // Offending position in a batch, or npos for single-text calls.
  std::size_t index() const noexcept { return index_; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t index_;
};

}  // namespace dialect_audit
