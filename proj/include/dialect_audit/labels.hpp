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

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "dialect_audit/error.hpp"

namespace dialect_audit {

// The six independent sigmoid outputs of the classifier, in model output order.
enum class Label : std::size_t {
  kToxicity = 0,
  kSevereToxicity,
  kObscene,
  kThreat,
  kInsult,
  kIdentityAttack,
};

inline constexpr std::size_t kNumLabels = 6;

inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kToxicity, Label::kSevereToxicity, Label::kObscene,
    Label::kThreat,   Label::kInsult,         Label::kIdentityAttack};

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "toxicity", "severe_toxicity", "obscene",
    "threat",   "insult",          "identity_attack"};

// Names used in rendered tables.
inline constexpr std::array<std::string_view, kNumLabels> kLabelDisplayNames = {
    "Toxicity", "Severe toxicity", "Obscene",
    "Threat",   "Insult",          "Identity hate"};

constexpr std::string_view label_name(Label l) {
  return kLabelNames[static_cast<std::size_t>(l)];
}

constexpr std::string_view label_display_name(Label l) {
  return kLabelDisplayNames[static_cast<std::size_t>(l)];
}

inline std::optional<Label> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

inline bool is_probability(double v) {
  return std::isfinite(v) && v >= 0.0 && v <= 1.0;
}

/// Six per-label probabilities. No sum-to-one constraint.
struct LabelScores {
  std::array<double, kNumLabels> values{};

  double& operator[](Label l) { return values[static_cast<std::size_t>(l)]; }
  double operator[](Label l) const {
    return values[static_cast<std::size_t>(l)];
  }
  double toxicity() const { return (*this)[Label::kToxicity]; }

  bool valid() const {
    for (double v : values) {
      if (!is_probability(v)) return false;
    }
    return true;
  }

  friend bool operator==(const LabelScores&, const LabelScores&) = default;
};

inline void require_valid(const LabelScores& s, std::string_view context) {
  if (!s.valid()) {
    throw InputError(std::string(context) +
                     ": label scores must be probabilities in [0,1]");
  }
}

}  // namespace dialect_audit
