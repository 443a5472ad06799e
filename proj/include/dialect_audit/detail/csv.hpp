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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialect_audit::detail {

inline std::string csv_quote(std::string_view field) {
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Incremental RFC 4180 reader: quoted fields may contain commas, doubled
// quotes and newlines. Accepts both \n and \r\n record terminators.
class CsvReader {
 public:
  explicit CsvReader(std::string_view data) : data_(data) {}

  bool done() const { return pos_ >= data_.size(); }

  // Line number (1-based) where the most recently returned record started.
  std::size_t line() const { return record_line_; }

  // Returns nullopt at end of input; throws std::runtime_error on an
  // unterminated quote.
  std::optional<std::vector<std::string>> next() {
    if (done()) return std::nullopt;
    record_line_ = line_;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos_ < data_.size()) {
      const char c = data_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < data_.size() && data_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty() && !was_quoted) {
        quoted = was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r' && !was_quoted) {
          field.pop_back();
        }
        fields.push_back(std::move(field));
        return fields;
      } else if (c == '\r' && was_quoted) {
        // tolerated between closing quote and \n
      } else {
        field.push_back(c);
      }
    }
    if (quoted) {
      throw std::runtime_error("unterminated quoted field starting at line " +
                               std::to_string(record_line_));
    }
    fields.push_back(std::move(field));
    return fields;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

}  // namespace dialect_audit::detail
