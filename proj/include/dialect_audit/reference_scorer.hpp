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

// Deterministic lexicon scorer. For each label,
//
//   score = logistic(bias + sum of weights of matched tokens)
//
// where tokens are maximal runs of ASCII letters, digits and apostrophes,
// lowercased, and every occurrence counts. With no hits every label sits at
// the floor logistic(bias). Only the first max_tokens tokens are considered.
//
// The lexicon gives small weights to a few identity and dialect terms so the
// hermetic pipeline shows the same kind of spurious association (and the same
// verdict flips) the audit is built to measure. It is a test oracle and demo
// backend, not a moderation model.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/detail/sha256.hpp"
#include "dialect_audit/scorer.hpp"

namespace dialect_audit {

struct LexiconEntry {
  std::string_view token;
  double weight;
};

inline constexpr double kReferenceBias = -4.0;

namespace detail {

// clang-format off
inline const std::array<std::vector<LexiconEntry>, kNumLabels>& reference_lexicon() {
  static const std::array<std::vector<LexiconEntry>, kNumLabels> lex = {{
    // toxicity
    {{"fuck", 4.0}, {"shit", 3.0}, {"bitch", 3.5}, {"idiot", 3.0},
     {"moron", 3.0}, {"stupid", 2.5}, {"ass", 2.5}, {"kill", 2.5},
     {"dumb", 2.0}, {"hate", 2.0}, {"loser", 2.0}, {"ugly", 1.5},
     {"damn", 1.5}, {"crap", 1.5}, {"trash", 1.5}, {"gun", 2.4},
     {"hell", 1.0}, {"shut", 1.0}, {"mad", 0.75}, {"ain't", 0.75},
     {"muslim", 1.5}, {"black", 1.0}, {"gay", 1.5}, {"dat", 0.5},
     {"nobody", 0.5}, {"smh", 0.5}},
    // severe_toxicity
    {{"fuck", 2.5}, {"kill", 1.5}, {"bitch", 1.5}, {"die", 1.0}},
    // obscene
    {{"fuck", 4.0}, {"shit", 3.5}, {"bitch", 3.0}, {"ass", 2.5},
     {"damn", 1.0}, {"crap", 1.0}, {"hell", 0.5}},
    // threat
    {{"kill", 3.5}, {"shoot", 3.0}, {"gun", 2.0}, {"die", 2.0},
     {"hurt", 2.0}, {"beat", 1.0}, {"pointing", 0.5}},
    // insult
    {{"idiot", 3.5}, {"moron", 3.5}, {"stupid", 3.0}, {"loser", 3.0},
     {"bitch", 3.0}, {"dumb", 2.5}, {"ugly", 2.5}, {"trash", 1.5}},
    // identity_attack
    {{"muslim", 2.0}, {"jew", 1.5}, {"gay", 1.5}, {"black", 1.5},
     {"immigrant", 1.0}, {"christian", 0.5}, {"white", 0.5}},
  }};
  return lex;
}
// clang-format on

inline bool is_reference_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '\'';
}

}  // namespace detail

class ReferenceScorer final : public Scorer {
 public:
  explicit ReferenceScorer(ScorerConfig config = {})
      : Scorer(std::move(config)) {
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      for (const auto& e : detail::reference_lexicon()[l]) {
        weights_[l].emplace(std::string(e.token), e.weight);
      }
    }
    nlohmann::ordered_json canon;
    canon["bias"] = kReferenceBias;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      auto& obj = canon["lexicon"][std::string(kLabelNames[l])];
      obj = nlohmann::ordered_json::object();
      for (const auto& [tok, w] : weights_[l]) obj[tok] = w;
    }
    digest_ = detail::sha256_hex(canon.dump());
  }

  std::string backend() const override { return "reference"; }
  std::string model_digest() const override { return digest_; }

  static double floor_value() { return logistic(kReferenceBias); }

  static double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  std::vector<std::string> tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
      if (detail::is_reference_token_char(c)) {
        cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                           : c);
      } else if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
        if (tokens.size() == config().max_tokens) return tokens;
      }
    }
    if (!cur.empty() && tokens.size() < config().max_tokens) {
      tokens.push_back(std::move(cur));
    }
    return tokens;
  }

 protected:
  LabelScores score_text(std::string_view text) const override {
    std::array<double, kNumLabels> z;
    z.fill(kReferenceBias);
    for (const auto& tok : tokenize(text)) {
      for (std::size_t l = 0; l < kNumLabels; ++l) {
        if (auto it = weights_[l].find(tok); it != weights_[l].end()) {
          z[l] += it->second;
        }
      }
    }
    LabelScores s;
    for (std::size_t l = 0; l < kNumLabels; ++l) s.values[l] = logistic(z[l]);
    return s;
  }

 private:
  std::array<std::map<std::string, double, std::less<>>, kNumLabels> weights_;
  std::string digest_;
};

}  // namespace dialect_audit
