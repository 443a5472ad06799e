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

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace dialect_audit::detail {

// Uniform integer in [0, bound). std::uniform_int_distribution is
// implementation-defined, so sampling would differ between standard
// libraries; this rejection scheme only depends on mt19937_64's output,
// which the standard pins down bit for bit.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= limit) return r % bound;
  }
}

// Fisher-Yates, last position first.
template <typename T>
void seeded_shuffle(std::span<T> items, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_below(gen, i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace dialect_audit::detail
