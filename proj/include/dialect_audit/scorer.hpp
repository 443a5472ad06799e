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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <future>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/detail/sha256.hpp"
#include "dialect_audit/detail/text.hpp"
#include "dialect_audit/error.hpp"
#include "dialect_audit/labels.hpp"

namespace dialect_audit {

inline constexpr std::string_view kReferenceModel = "reference";

struct ScorerConfig {
  // "reference", a .safetensors file, or a directory holding model.safetensors.
  std::string model_path = std::string(kReferenceModel);
  // vocab.txt; empty means "next to the model".
  std::string tokenizer_path;
  std::size_t max_tokens = 512;
  std::size_t batch_size = 32;
};

inline void validate(const ScorerConfig& c) {
  if (c.max_tokens < 1) throw InputError("max_tokens must be >= 1");
  if (c.batch_size < 1) throw InputError("batch_size must be >= 1");
}

/// Six-label toxicity scorer. Instances are immutable after construction and
/// safe to share across threads.
class Scorer {
 public:
  explicit Scorer(ScorerConfig config) : config_(std::move(config)) {
    validate(config_);
  }
  virtual ~Scorer() = default;
  Scorer(const Scorer&) = delete;
  Scorer& operator=(const Scorer&) = delete;

  LabelScores score(std::string_view text) const {
    if (detail::trim(text).empty()) {
      throw InputError("cannot score empty text");
    }
    return checked(score_text(text), ScoringError::npos);
  }

  /// result[i] is bit-identical to score(texts[i]). May fan out across
  /// threads; the first failing index wins regardless of scheduling.
  std::vector<LabelScores> score_batch(std::span<const std::string> texts) const {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (detail::trim(texts[i]).empty()) {
        throw InputError("cannot score empty text at index " +
                         std::to_string(i));
      }
    }
    std::vector<LabelScores> out(texts.size());
    const std::size_t workers = std::min<std::size_t>(
        concurrent_batches() ? std::max(1u, std::thread::hardware_concurrency())
                             : 1,
        (texts.size() + config_.batch_size - 1) / config_.batch_size);
    if (workers <= 1) {
      score_range(texts, out, 0, texts.size());
      return out;
    }
    // Contiguous slices, so the lowest failing slice holds the first error.
    std::vector<std::future<void>> jobs;
    const std::size_t per = (texts.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < texts.size(); begin += per) {
      const std::size_t end = std::min(texts.size(), begin + per);
      jobs.push_back(std::async(std::launch::async, [&, begin, end] {
        score_range(texts, out, begin, end);
      }));
    }
    std::exception_ptr first;
    for (auto& j : jobs) {
      try {
        j.get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
    return out;
  }

  const ScorerConfig& config() const { return config_; }

  // "reference" or "bert".
  virtual std::string backend() const = 0;

  // SHA-256 identifying the loaded weights (or lexicon).
  virtual std::string model_digest() const = 0;

  // Identity of the scoring setup as a whole, recorded in reports.
  std::string config_digest() const {
    const nlohmann::ordered_json j = {{"backend", backend()},
                                      {"model_digest", model_digest()},
                                      {"max_tokens", config_.max_tokens}};
    return detail::sha256_hex(j.dump());
  }

 protected:
  virtual LabelScores score_text(std::string_view text) const = 0;
  virtual bool concurrent_batches() const { return false; }

 private:
  static LabelScores checked(const LabelScores& s, std::size_t index) {
    if (!s.valid()) {
      throw ScoringError("backend produced a score outside [0,1]", index);
    }
    return s;
  }

  void score_range(std::span<const std::string> texts,
                   std::vector<LabelScores>& out, std::size_t begin,
                   std::size_t end) const {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i] = checked(score_text(texts[i]), i);
      } catch (const ScoringError& e) {
        if (e.index() == i) throw;
        throw ScoringError("text " + std::to_string(i) + ": " + e.what(), i);
      } catch (const std::exception& e) {
        throw ScoringError("text " + std::to_string(i) + ": " + e.what(), i);
      }
    }
  }

  ScorerConfig config_;
};

}  // namespace dialect_audit
