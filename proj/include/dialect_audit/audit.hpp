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

// End-to-end benchmark: score both corpora, persist the raw score tables,
// and assemble the disparity report (group means, ratios, box plots,
// histograms and FPR curves) as one JSON document.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/corpus.hpp"
#include "dialect_audit/detail/csv.hpp"
#include "dialect_audit/detail/io.hpp"
#include "dialect_audit/detail/text.hpp"
#include "dialect_audit/metrics.hpp"
#include "dialect_audit/scorer.hpp"
#include "dialect_audit/version.hpp"

namespace dialect_audit {

// --- score tables ----------------------------------------------------------

inline constexpr int kScoreTableSchemaVersion = 1;
inline constexpr std::string_view kScoreTableMagic = "#dialect-audit-score-table";
inline constexpr std::string_view kScoreTableHeader =
    "text,p_aa,p_white,toxicity,severe_toxicity,obscene,threat,insult,"
    "identity_attack";

struct ScoreTable {
  DialectGroup group = DialectGroup::kAae;
  std::string scorer_backend;
  std::string scorer_digest;
  std::vector<ScoredPost> rows;

  std::vector<double> label_column(Label l) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.scores[l]);
    return out;
  }

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

inline ScoreTable score_corpus(const DialectCorpus& corpus,
                               const Scorer& scorer) {
  std::vector<std::string> texts;
  texts.reserve(corpus.posts.size());
  for (const auto& p : corpus.posts) texts.push_back(p.text);
  const auto scores = scorer.score_batch(texts);
  ScoreTable t;
  t.group = corpus.group;
  t.scorer_backend = scorer.backend();
  t.scorer_digest = scorer.config_digest();
  t.rows.reserve(corpus.posts.size());
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    t.rows.push_back({corpus.posts[i], scores[i]});
  }
  return t;
}

inline std::string score_table_csv(const ScoreTable& t) {
  std::string out;
  out += kScoreTableMagic;
  out += " schema_version=" + std::to_string(kScoreTableSchemaVersion);
  out += " group=" + std::string(to_string(t.group));
  out += " backend=" + t.scorer_backend;
  out += " scorer_digest=" + t.scorer_digest + "\n";
  out += kScoreTableHeader;
  out += '\n';
  for (const auto& r : t.rows) {
    out += detail::csv_quote(r.post.text);
    out += ',' + detail::format_g17(r.post.p_aa);
    out += ',' + detail::format_g17(r.post.p_white);
    for (double v : r.scores.values) out += ',' + detail::format_g17(v);
    out += '\n';
  }
  return out;
}

inline void write_score_table(const ScoreTable& t,
                              const std::filesystem::path& path) {
  detail::write_file(path, score_table_csv(t));
}

inline ScoreTable parse_score_table(std::string_view data,
                                    const std::string& name) {
  const auto fail = [&](std::size_t line, const std::string& why) {
    return InputError(name + ":" + std::to_string(line) + ": " + why);
  };
  const std::size_t eol = data.find('\n');
  std::string_view preamble = data.substr(0, eol);
  if (!preamble.empty() && preamble.back() == '\r') preamble.remove_suffix(1);
  if (!preamble.starts_with(kScoreTableMagic)) {
    throw fail(1, "not a score table (missing '" + std::string(kScoreTableMagic) +
                      "' preamble)");
  }
  std::map<std::string, std::string, std::less<>> meta;
  for (auto tok : detail::split(preamble.substr(kScoreTableMagic.size()), ' ')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    meta.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  const std::string version = meta.count("schema_version") ? meta["schema_version"] : "";
  if (version != std::to_string(kScoreTableSchemaVersion)) {
    throw SchemaError(name + ": unsupported score table schema_version '" +
                          version + "' (expected " +
                          std::to_string(kScoreTableSchemaVersion) + ")",
                      version);
  }
  ScoreTable t;
  const auto group = parse_group(meta["group"]);
  if (!group) throw fail(1, "unknown group '" + meta["group"] + "'");
  t.group = *group;
  t.scorer_backend = meta["backend"];
  t.scorer_digest = meta["scorer_digest"];

  if (eol == std::string_view::npos) throw fail(2, "missing column header");
  detail::CsvReader reader(data.substr(eol + 1));
  const auto header = reader.next();
  std::string joined;
  if (header) {
    for (std::size_t i = 0; i < header->size(); ++i) {
      joined += (i ? "," : "") + (*header)[i];
    }
  }
  if (joined != kScoreTableHeader) {
    throw fail(2, "unexpected column header '" + joined + "'");
  }
  try {
    while (auto rec = reader.next()) {
      const std::size_t line = reader.line() + 1;
      if (rec->size() == 1 && (*rec)[0].empty()) continue;
      if (rec->size() != 9) {
        throw fail(line, "expected 9 fields, found " + std::to_string(rec->size()));
      }
      ScoredPost sp;
      sp.post.text = (*rec)[0];
      std::array<double, 8> nums{};
      for (std::size_t i = 0; i < 8; ++i) {
        const auto v = detail::parse_double((*rec)[i + 1]);
        if (!v || !is_probability(*v)) {
          throw fail(line, "field " + std::to_string(i + 2) +
                               " is not a probability: '" + (*rec)[i + 1] + "'");
        }
        nums[i] = *v;
      }
      sp.post.p_aa = nums[0];
      sp.post.p_white = nums[1];
      for (std::size_t l = 0; l < kNumLabels; ++l) sp.scores.values[l] = nums[l + 2];
      t.rows.push_back(std::move(sp));
    }
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw InputError(name + ": " + e.what());
  }
  return t;
}

inline ScoreTable read_score_table(const std::filesystem::path& path) {
  return parse_score_table(detail::read_file(path), path.string());
}

// --- report ----------------------------------------------------------------

inline constexpr int kReportSchemaVersion = 1;

struct ReportMetadata {
  nlohmann::json aae_manifest;  // null when unavailable
  nlohmann::json sae_manifest;
  std::string scorer_backend;
  std::string scorer_digest;
  std::optional<std::string> timestamp;
  std::string tool_version = std::string(kToolVersion);

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct DisparityReport {
  GroupMeans aae_means, sae_means;
  DisparityRatios ratios;
  BoxStats aae_box, sae_box;
  HistogramSeries aae_hist, sae_hist;
  FprCurve aae_fpr, sae_fpr;
  ReportMetadata metadata;

  friend bool operator==(const DisparityReport&, const DisparityReport&) = default;
};

struct AuditConfig {
  ThresholdGrid grid;
  std::size_t bin_count = 50;
  std::filesystem::path output_dir = "audit-out";
  ScorerConfig scorer;
  std::uint64_t seed = 0;
};

inline void validate(const AuditConfig& c) {
  if (!(c.grid.step > 0)) throw InputError("grid step must be > 0");
  if (!(c.grid.start < c.grid.stop)) throw InputError("grid start must be < stop");
  if (c.bin_count < 1) throw InputError("bin_count must be >= 1");
}

/// ISO-8601 UTC time from SOURCE_DATE_EPOCH, or nullopt when unset, so
/// repeated runs stay byte-identical unless a time is asked for.
inline std::optional<std::string> reproducible_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env) return std::nullopt;
  const auto secs = detail::parse_int(env);
  if (!secs) return std::nullopt;
  const std::time_t t = static_cast<std::time_t>(*secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

/// The metrics stage over two score tables. Pure: identical tables and
/// config give an identical report.
inline DisparityReport build_report(const ScoreTable& aae, const ScoreTable& sae,
                                    const AuditConfig& config,
                                    ReportMetadata metadata = {}) {
  validate(config);
  if (aae.group != DialectGroup::kAae || sae.group != DialectGroup::kSae) {
    throw InputError("build_report: expected an AAE table and an SAE table");
  }
  if (aae.rows.empty() || sae.rows.empty()) {
    throw InputError("build_report: score tables must be non-empty");
  }
  DisparityReport r;
  r.aae_means = group_means(aae.rows, DialectGroup::kAae);
  r.sae_means = group_means(sae.rows, DialectGroup::kSae);
  r.ratios = disparity_ratios(r.aae_means, r.sae_means);
  const auto aae_tox = aae.label_column(Label::kToxicity);
  const auto sae_tox = sae.label_column(Label::kToxicity);
  r.aae_box = box_stats(aae_tox);
  r.sae_box = box_stats(sae_tox);
  r.aae_hist = histogram(aae_tox, config.bin_count);
  r.sae_hist = histogram(sae_tox, config.bin_count);
  const auto grid = make_grid(config.grid);
  r.aae_fpr = fpr_curve(aae_tox, grid);
  r.sae_fpr = fpr_curve(sae_tox, grid);
  if (metadata.scorer_backend.empty()) metadata.scorer_backend = aae.scorer_backend;
  if (metadata.scorer_digest.empty()) metadata.scorer_digest = aae.scorer_digest;
  r.metadata = std::move(metadata);
  return r;
}

namespace detail {

inline nlohmann::ordered_json scores_json(const LabelScores& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto l : kAllLabels) j[std::string(label_name(l))] = s[l];
  return j;
}

inline LabelScores scores_from_json(const nlohmann::json& j) {
  LabelScores s;
  for (auto l : kAllLabels) s[l] = j.at(std::string(label_name(l))).get<double>();
  return s;
}

inline nlohmann::ordered_json box_json(const BoxStats& b) {
  return {{"min", b.min},
          {"q1", b.q1},
          {"median", b.median},
          {"q3", b.q3},
          {"max", b.max},
          {"lower_fence", b.lower_fence},
          {"upper_fence", b.upper_fence},
          {"outlier_count", b.outlier_count}};
}

inline BoxStats box_from_json(const nlohmann::json& j) {
  BoxStats b;
  b.min = j.at("min");
  b.q1 = j.at("q1");
  b.median = j.at("median");
  b.q3 = j.at("q3");
  b.max = j.at("max");
  b.lower_fence = j.at("lower_fence");
  b.upper_fence = j.at("upper_fence");
  b.outlier_count = j.at("outlier_count");
  return b;
}

inline nlohmann::ordered_json hist_json(const HistogramSeries& h) {
  return {{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

inline HistogramSeries hist_from_json(const nlohmann::json& j) {
  return {j.at("bin_edges").get<std::vector<double>>(),
          j.at("counts").get<std::vector<std::size_t>>()};
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const DisparityReport& r) {
  using nlohmann::ordered_json;
  if (r.aae_fpr.thresholds != r.sae_fpr.thresholds) {
    throw InputError("report FPR curves must share one threshold grid");
  }
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["labels"] = kLabelNames;
  j["means"] = {
      {"AAE", {{"count", r.aae_means.count}, {"scores", detail::scores_json(r.aae_means.mean)}}},
      {"SAE", {{"count", r.sae_means.count}, {"scores", detail::scores_json(r.sae_means.mean)}}}};
  ordered_json ratios = ordered_json::object();
  for (auto l : kAllLabels) {
    const auto& v = r.ratios[l];
    ratios[std::string(label_name(l))] = {
        {"defined", v.has_value()},
        {"value", v ? ordered_json(*v) : ordered_json(nullptr)}};
  }
  j["ratios"] = ratios;
  j["box"] = {{"label", "toxicity"},
              {"AAE", detail::box_json(r.aae_box)},
              {"SAE", detail::box_json(r.sae_box)}};
  j["histogram"] = {{"label", "toxicity"},
                    {"AAE", detail::hist_json(r.aae_hist)},
                    {"SAE", detail::hist_json(r.sae_hist)}};
  j["fpr"] = {{"label", "toxicity"},
              {"thresholds", r.aae_fpr.thresholds},
              {"AAE", r.aae_fpr.fpr},
              {"SAE", r.sae_fpr.fpr}};
  const auto& m = r.metadata;
  j["metadata"] = {
      {"tool_version", m.tool_version},
      {"timestamp", m.timestamp ? ordered_json(*m.timestamp) : ordered_json(nullptr)},
      {"scorer_backend", m.scorer_backend},
      {"scorer_digest", m.scorer_digest},
      {"aae_manifest", m.aae_manifest},
      {"sae_manifest", m.sae_manifest}};
  return j;
}

inline std::string report_text(const DisparityReport& r) {
  return report_json(r).dump(2) + "\n";
}

inline void write_report(const DisparityReport& r,
                         const std::filesystem::path& path) {
  detail::write_file(path, report_text(r));
}

inline DisparityReport parse_report(std::string_view text, const std::string& name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(name + ": malformed report JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) {
    throw SchemaError(name + ": report has no schema_version", "");
  }
  const auto& ver = j.at("schema_version");
  if (!ver.is_number_integer() || ver.get<int>() != kReportSchemaVersion) {
    throw SchemaError(name + ": unsupported report schema_version " + ver.dump() +
                          " (expected " + std::to_string(kReportSchemaVersion) + ")",
                      ver.dump());
  }
  try {
    DisparityReport r;
    r.aae_means.group = DialectGroup::kAae;
    r.aae_means.count = j.at("means").at("AAE").at("count");
    r.aae_means.mean = detail::scores_from_json(j.at("means").at("AAE").at("scores"));
    r.sae_means.group = DialectGroup::kSae;
    r.sae_means.count = j.at("means").at("SAE").at("count");
    r.sae_means.mean = detail::scores_from_json(j.at("means").at("SAE").at("scores"));
    for (auto l : kAllLabels) {
      const auto& e = j.at("ratios").at(std::string(label_name(l)));
      if (e.at("defined").get<bool>()) {
        r.ratios.ratio[static_cast<std::size_t>(l)] = e.at("value").get<double>();
      }
    }
    r.aae_box = detail::box_from_json(j.at("box").at("AAE"));
    r.sae_box = detail::box_from_json(j.at("box").at("SAE"));
    r.aae_hist = detail::hist_from_json(j.at("histogram").at("AAE"));
    r.sae_hist = detail::hist_from_json(j.at("histogram").at("SAE"));
    const auto thresholds = j.at("fpr").at("thresholds").get<std::vector<double>>();
    r.aae_fpr = {thresholds, j.at("fpr").at("AAE").get<std::vector<double>>()};
    r.sae_fpr = {thresholds, j.at("fpr").at("SAE").get<std::vector<double>>()};
    const auto& m = j.at("metadata");
    r.metadata.tool_version = m.at("tool_version");
    if (!m.at("timestamp").is_null()) r.metadata.timestamp = m.at("timestamp");
    r.metadata.scorer_backend = m.at("scorer_backend");
    r.metadata.scorer_digest = m.at("scorer_digest");
    r.metadata.aae_manifest = m.at("aae_manifest");
    r.metadata.sae_manifest = m.at("sae_manifest");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(name + ": report is missing or mistypes a field: " + e.what());
  }
}

inline DisparityReport read_report(const std::filesystem::path& path) {
  return parse_report(detail::read_file(path), path.string());
}

/// Markdown table of per-label means and ratios. `published` optionally adds
/// a column of externally reported ratios (free text, e.g. "1.8x") so the
/// computed and quoted figures sit side by side.
inline std::string render_means_table(
    const DisparityReport& r,
    const std::map<Label, std::string>& published = {}) {
  std::string out = "| Label | AAE mean | SAE mean | AAE/SAE ratio |";
  out += published.empty() ? "\n|---|---|---|---|\n" : " Published |\n|---|---|---|---|---|\n";
  for (auto l : kAllLabels) {
    const auto& ratio = r.ratios[l];
    out += "| " + std::string(label_display_name(l)) + " | " +
           detail::format_fixed(r.aae_means.mean[l], 6) + " | " +
           detail::format_fixed(r.sae_means.mean[l], 6) + " | " +
           (ratio ? detail::format_fixed(*ratio, 3) : std::string("undefined")) +
           " |";
    if (!published.empty()) {
      auto it = published.find(l);
      out += " " + (it == published.end() ? std::string("-") : it->second) + " |";
    }
    out += '\n';
  }
  return out;
}

// --- orchestration -----------------------------------------------------------

struct AuditOutputs {
  std::filesystem::path aae_scores;
  std::filesystem::path sae_scores;
  std::filesystem::path report;
};

inline AuditOutputs audit_output_paths(const AuditConfig& c) {
  return {c.output_dir / "aae_scores.csv", c.output_dir / "sae_scores.csv",
          c.output_dir / "report.json"};
}

/// Scores both corpora (concurrently), persists the two score tables and the
/// report under config.output_dir. A scoring failure removes anything this
/// call wrote before rethrowing.
inline DisparityReport run_audit(const DialectCorpus& aae, const DialectCorpus& sae,
                                 const Scorer& scorer, const AuditConfig& config) {
  validate(config);
  if (aae.group != DialectGroup::kAae || sae.group != DialectGroup::kSae) {
    throw InputError("run_audit: expected an AAE corpus and an SAE corpus");
  }
  if (aae.posts.empty() || sae.posts.empty()) {
    throw InputError("run_audit: corpora must be non-empty");
  }
  const auto paths = audit_output_paths(config);
  std::vector<std::filesystem::path> written;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
  };
  try {
    auto sae_job = std::async(std::launch::async,
                              [&] { return score_corpus(sae, scorer); });
    ScoreTable aae_table;
    try {
      aae_table = score_corpus(aae, scorer);
    } catch (...) {
      sae_job.wait();
      throw;
    }
    const ScoreTable sae_table = sae_job.get();
    write_score_table(aae_table, paths.aae_scores);
    written.push_back(paths.aae_scores);
    write_score_table(sae_table, paths.sae_scores);
    written.push_back(paths.sae_scores);

    ReportMetadata meta;
    meta.aae_manifest = manifest_json(aae);
    meta.sae_manifest = manifest_json(sae);
    meta.scorer_backend = scorer.backend();
    meta.scorer_digest = scorer.config_digest();
    meta.timestamp = reproducible_timestamp();
    auto report = build_report(aae_table, sae_table, config, std::move(meta));
    write_report(report, paths.report);
    return report;
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace dialect_audit
