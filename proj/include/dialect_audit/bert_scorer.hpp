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

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dialect_audit/bert/encoder.hpp"
#include "dialect_audit/bert/safetensors.hpp"
#include "dialect_audit/bert/tokenizer.hpp"
#include "dialect_audit/detail/io.hpp"
#include "dialect_audit/detail/sha256.hpp"
#include "dialect_audit/scorer.hpp"

namespace dialect_audit {

struct BertModelFiles {
  std::filesystem::path weights;    // model.safetensors
  std::filesystem::path config;     // config.json
  std::filesystem::path vocabulary; // vocab.txt
};

/// Accepts either a model directory or the weights file itself; config.json
/// and (unless given) vocab.txt are taken from the same directory.
inline BertModelFiles resolve_model_files(const ScorerConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path model(cfg.model_path);
  if (!fs::exists(model)) {
    throw LoadError(cfg.model_path, "no such file or directory");
  }
  BertModelFiles f;
  const fs::path dir = fs::is_directory(model) ? model : model.parent_path();
  f.weights = fs::is_directory(model) ? model / "model.safetensors" : model;
  f.config = dir / "config.json";
  f.vocabulary = cfg.tokenizer_path.empty() ? dir / "vocab.txt"
                                            : fs::path(cfg.tokenizer_path);
  for (const auto& p : {f.weights, f.config, f.vocabulary}) {
    if (!fs::exists(p)) throw LoadError(p.string(), "no such file");
  }
  return f;
}

namespace detail {

// Maps the checkpoint's output rows onto canonical labels. Known upstream
// names are matched; anything else is taken in canonical order.
inline std::array<std::size_t, kNumLabels> label_rows(
    const nlohmann::json& config) {
  static const std::map<std::string, Label, std::less<>> kAliases = {
      {"toxic", Label::kToxicity},
      {"toxicity", Label::kToxicity},
      {"severe_toxic", Label::kSevereToxicity},
      {"severe_toxicity", Label::kSevereToxicity},
      {"obscene", Label::kObscene},
      {"threat", Label::kThreat},
      {"insult", Label::kInsult},
      {"identity_hate", Label::kIdentityAttack},
      {"identity_attack", Label::kIdentityAttack},
  };
  std::array<std::size_t, kNumLabels> rows{0, 1, 2, 3, 4, 5};
  if (!config.contains("id2label")) return rows;
  std::array<bool, kNumLabels> seen{};
  std::array<std::size_t, kNumLabels> mapped{};
  for (const auto& [key, name] : config.at("id2label").items()) {
    auto it = kAliases.find(name.get<std::string>());
    if (it == kAliases.end()) return rows;
    const auto label = static_cast<std::size_t>(it->second);
    mapped[label] = std::stoul(key);
    seen[label] = true;
  }
  for (bool s : seen) {
    if (!s) return rows;
  }
  return mapped;
}

}  // namespace detail

class BertScorer final : public Scorer {
 public:
  explicit BertScorer(ScorerConfig config)
      : Scorer(std::move(config)), files_(resolve_model_files(this->config())) {
    nlohmann::json cfg_json;
    try {
      cfg_json = nlohmann::json::parse(detail::read_file(files_.config));
    } catch (const std::exception& e) {
      throw LoadError(files_.config.string(), e.what());
    }
    bert::EncoderConfig enc;
    try {
      enc = bert::EncoderConfig::from_json(cfg_json);
    } catch (const std::exception& e) {
      throw LoadError(files_.config.string(), e.what());
    }
    if (enc.num_labels != kNumLabels) {
      throw LoadError(files_.config.string(),
                      "expected 6 output labels, found " +
                          std::to_string(enc.num_labels));
    }
    rows_ = detail::label_rows(cfg_json);
    tokenizer_.emplace(bert::WordPieceTokenizer::from_file(files_.vocabulary.string()));
    if (tokenizer_->vocab_size() != enc.vocab_size) {
      throw LoadError(files_.vocabulary.string(),
                      "vocabulary has " + std::to_string(tokenizer_->vocab_size()) +
                          " entries but the model expects " +
                          std::to_string(enc.vocab_size));
    }
    model_.emplace(enc, bert::load_safetensors(files_.weights.string()),
                   files_.weights.string());
    digest_ = detail::sha256_file(files_.weights.string());
    max_len_ = std::min(this->config().max_tokens, enc.max_positions);
    if (max_len_ < 2) {
      throw InputError("max_tokens must be >= 2 for the transformer backend");
    }
  }

  std::string backend() const override { return "bert"; }
  std::string model_digest() const override { return digest_; }
  const BertModelFiles& files() const { return files_; }

  std::vector<std::int32_t> token_ids(std::string_view text) const {
    return tokenizer_->encode(text, max_len_);
  }

 protected:
  LabelScores score_text(std::string_view text) const override {
    const auto logits = model_->logits(token_ids(text));
    LabelScores s;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double z = logits[rows_[l]];
      s.values[l] = 1.0 / (1.0 + std::exp(-z));
    }
    return s;
  }
  bool concurrent_batches() const override { return true; }

 private:
  BertModelFiles files_;
  std::optional<bert::WordPieceTokenizer> tokenizer_;
  std::optional<bert::BertClassifier> model_;
  std::array<std::size_t, kNumLabels> rows_{};
  std::string digest_;
  std::size_t max_len_ = 512;
};

}  // namespace dialect_audit
