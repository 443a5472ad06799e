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

// Disparity statistics over scored corpora: group means, AAE/SAE ratios,
// box-plot summaries, histograms, FPR-vs-threshold curves, and the verdict
// rule the threshold slider applies.
//
// Every function here is pure. Inputs are validated as probabilities; bad
// input raises InputError.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialect_audit/corpus.hpp"
#include "dialect_audit/error.hpp"
#include "dialect_audit/labels.hpp"

namespace dialect_audit {

struct ScoredPost {
  Post post;
  LabelScores scores;

  friend bool operator==(const ScoredPost&, const ScoredPost&) = default;
};

struct GroupMeans {
  DialectGroup group = DialectGroup::kAae;
  LabelScores mean;
  std::size_t count = 0;

  friend bool operator==(const GroupMeans&, const GroupMeans&) = default;
};

struct DisparityRatios {
  // AAE mean / SAE mean; nullopt where the SAE mean is zero.
  std::array<std::optional<double>, kNumLabels> ratio{};

  const std::optional<double>& operator[](Label l) const {
    return ratio[static_cast<std::size_t>(l)];
  }

  friend bool operator==(const DisparityRatios&,
                         const DisparityRatios&) = default;
};

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double lower_fence = 0, upper_fence = 0;
  std::size_t outlier_count = 0;

  friend bool operator==(const BoxStats&, const BoxStats&) = default;
};

struct HistogramSeries {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;

  friend bool operator==(const HistogramSeries&,
                         const HistogramSeries&) = default;
};

struct FprCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;

  friend bool operator==(const FprCurve&, const FprCurve&) = default;
};

enum class Verdict { kToxic, kNotToxic };

constexpr std::string_view to_string(Verdict v) {
  return v == Verdict::kToxic ? "TOXIC" : "NOT_TOXIC";
}

class ThresholdPolicy {
 public:
  explicit ThresholdPolicy(double threshold) : threshold_(threshold) {
    if (!is_probability(threshold)) {
      throw InputError("threshold must lie in [0,1]");
    }
  }
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// Half-open [lower, upper).
struct ThresholdInterval {
  double lower = 0;
  double upper = 0;

  bool contains(double t) const { return t >= lower && t < upper; }
  friend bool operator==(const ThresholdInterval&,
                         const ThresholdInterval&) = default;
};

namespace detail {

inline void require_probabilities(std::span<const double> xs,
                                  const char* what) {
  for (double x : xs) {
    if (!is_probability(x)) {
      throw InputError(std::string(what) +
                       ": values must be probabilities in [0,1]");
    }
  }
}

// Neumaier's variant of Kahan summation, accumulated in input order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

// Linear interpolation between closest ranks on sorted data: position
// h = (n-1)p, value x[floor h] + frac(h) * (x[floor h + 1] - x[floor h]).
inline double interpolated_quantile(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Per-label arithmetic mean with compensated summation in input order.
inline GroupMeans group_means(std::span<const ScoredPost> scored,
                              DialectGroup group) {
  if (scored.empty()) throw InputError("group_means: empty input");
  std::array<detail::CompensatedSum, kNumLabels> sums;
  for (const ScoredPost& sp : scored) {
    require_valid(sp.scores, "group_means");
    for (std::size_t i = 0; i < kNumLabels; ++i) sums[i].add(sp.scores.values[i]);
  }
  GroupMeans out;
  out.group = group;
  out.count = scored.size();
  const auto n = static_cast<double>(scored.size());
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    out.mean.values[i] = std::clamp(sums[i].value() / n, 0.0, 1.0);
  }
  return out;
}

inline DisparityRatios disparity_ratios(const GroupMeans& aae,
                                        const GroupMeans& sae) {
  if (aae.group != DialectGroup::kAae || sae.group != DialectGroup::kSae) {
    throw InputError("disparity_ratios: expected (AAE, SAE) means, got (" +
                     std::string(to_string(aae.group)) + ", " +
                     std::string(to_string(sae.group)) + ")");
  }
  DisparityRatios out;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (sae.mean.values[i] > 0) {
      out.ratio[i] = aae.mean.values[i] / sae.mean.values[i];
    }
  }
  return out;
}

/// Five-number summary with 1.5 IQR fences clamped to [0,1]. Outliers are
/// the points strictly outside the fences.
inline BoxStats box_stats(std::span<const double> scores) {
  if (scores.empty()) throw InputError("box_stats: empty input");
  detail::require_probabilities(scores, "box_stats");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  BoxStats b;
  b.min = sorted.front();
  b.max = sorted.back();
  b.q1 = detail::interpolated_quantile(sorted, 0.25);
  b.median = detail::interpolated_quantile(sorted, 0.5);
  b.q3 = detail::interpolated_quantile(sorted, 0.75);
  const double iqr = b.q3 - b.q1;
  b.lower_fence = std::clamp(b.q1 - 1.5 * iqr, 0.0, 1.0);
  b.upper_fence = std::clamp(b.q3 + 1.5 * iqr, 0.0, 1.0);
  b.outlier_count = static_cast<std::size_t>(
      std::count_if(sorted.begin(), sorted.end(), [&](double x) {
        return x < b.lower_fence || x > b.upper_fence;
      }));
  return b;
}

/// Equal-width bins over [0,1]; bins are [lo, hi) except the last, which
/// also takes 1.0.
inline HistogramSeries histogram(std::span<const double> scores,
                                 std::size_t bin_count) {
  if (bin_count < 1) throw InputError("histogram: bin_count must be >= 1");
  detail::require_probabilities(scores, "histogram");
  HistogramSeries h;
  h.bin_edges.resize(bin_count + 1);
  const auto k = static_cast<double>(bin_count);
  for (std::size_t i = 0; i <= bin_count; ++i) {
    h.bin_edges[i] = static_cast<double>(i) / k;
  }
  h.counts.assign(bin_count, 0);
  for (double s : scores) {
    auto idx = std::min(static_cast<std::size_t>(s * k), bin_count - 1);
    // s * k can round across an edge; settle against the stored edges.
    while (idx > 0 && s < h.bin_edges[idx]) --idx;
    while (idx + 1 < bin_count && s >= h.bin_edges[idx + 1]) ++idx;
    ++h.counts[idx];
  }
  return h;
}

/// Every sample is treated as benign, so any flag counts as a false
/// positive: fpr(t) = |{s : s > t}| / n.
inline FprCurve fpr_curve(std::span<const double> scores,
                          std::span<const double> thresholds) {
  if (scores.empty()) throw InputError("fpr_curve: empty scores");
  detail::require_probabilities(scores, "fpr_curve scores");
  detail::require_probabilities(thresholds, "fpr_curve thresholds");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw InputError("fpr_curve: thresholds must be increasing");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  FprCurve c;
  c.thresholds.assign(thresholds.begin(), thresholds.end());
  c.fpr.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = static_cast<std::size_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    c.fpr.push_back(static_cast<double>(above) / n);
  }
  return c;
}

/// Strictly greater than the threshold is TOXIC; only the toxicity label
/// participates.
inline Verdict verdict(const LabelScores& scores, const ThresholdPolicy& policy) {
  return scores.toxicity() > policy.threshold() ? Verdict::kToxic
                                                : Verdict::kNotToxic;
}

inline Verdict verdict(double toxicity, const ThresholdPolicy& policy) {
  return toxicity > policy.threshold() ? Verdict::kToxic : Verdict::kNotToxic;
}

/// Thresholds at which two toxicity scores receive different verdicts.
inline std::optional<ThresholdInterval> flip_interval(double score_a,
                                                      double score_b) {
  if (score_a == score_b) return std::nullopt;
  return ThresholdInterval{std::min(score_a, score_b),
                           std::max(score_a, score_b)};
}

// --- threshold grids -------------------------------------------------------

struct ThresholdGrid {
  double start = 0.0;
  double stop = 1.0;
  double step = 0.01;
};

/// Points start, start+step, ... up to stop. When (stop-start)/step is an
/// integer k (to 1e-9), exactly k+1 points are produced and computed as
/// start + (stop-start)*i/k so that 0.00..1.00 by 0.01 lands on the nearest
/// doubles to i/100 and ends exactly on stop.
inline std::vector<double> make_grid(const ThresholdGrid& g) {
  if (!(g.step > 0)) throw InputError("grid step must be > 0");
  if (!(g.start < g.stop)) throw InputError("grid start must be < stop");
  if (!is_probability(g.start) || !is_probability(g.stop)) {
    throw InputError("grid bounds must lie in [0,1]");
  }
  const double span = g.stop - g.start;
  const double k_real = span / g.step;
  const double k_round = std::round(k_real);
  std::vector<double> out;
  if (std::fabs(k_real - k_round) < 1e-9) {
    const auto k = static_cast<std::size_t>(k_round);
    out.reserve(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      out.push_back(i == k ? g.stop
                           : g.start + span * static_cast<double>(i) /
                                           static_cast<double>(k));
    }
  } else {
    const auto k = static_cast<std::size_t>(std::floor(k_real));
    for (std::size_t i = 0; i <= k; ++i) {
      out.push_back(g.start + g.step * static_cast<double>(i));
    }
  }
  return out;
}

}  // namespace dialect_audit
