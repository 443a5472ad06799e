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

#include <memory>

#include "dialect_audit/bert_scorer.hpp"
#include "dialect_audit/reference_scorer.hpp"
#include "dialect_audit/scorer.hpp"

namespace dialect_audit {

/// "reference" needs no files; anything else is a transformer checkpoint.
inline std::unique_ptr<Scorer> load_scorer(const ScorerConfig& config) {
  validate(config);
  if (config.model_path == kReferenceModel) {
    return std::make_unique<ReferenceScorer>(config);
  }
  return std::make_unique<BertScorer>(config);
}

}  // namespace dialect_audit
