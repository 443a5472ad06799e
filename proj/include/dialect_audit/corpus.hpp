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

// Dialect corpus construction: TSV ingestion with posterior filtering,
// reproducible seeded sampling, JSON Lines persistence and the built-in
// minimal-pair list served to the UI.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/detail/io.hpp"
#include "dialect_audit/detail/random.hpp"
#include "dialect_audit/detail/text.hpp"
#include "dialect_audit/detail/utf8.hpp"
#include "dialect_audit/error.hpp"
#include "dialect_audit/labels.hpp"

namespace dialect_audit {

enum class DialectGroup { kAae, kSae };

constexpr std::string_view to_string(DialectGroup g) {
  return g == DialectGroup::kAae ? "AAE" : "SAE";
}

inline std::optional<DialectGroup> parse_group(std::string_view s) {
  if (s == "AAE" || s == "aae") return DialectGroup::kAae;
  if (s == "SAE" || s == "sae") return DialectGroup::kSae;
  return std::nullopt;
}

struct Post {
  std::string text;
  double p_aa = 0;
  double p_white = 0;

  friend bool operator==(const Post&, const Post&) = default;
};

inline double group_posterior(const Post& p, DialectGroup g) {
  return g == DialectGroup::kAae ? p.p_aa : p.p_white;
}

// Which TSV columns hold the three fields. Each column is addressed either by
// zero-based index or by header name; using any name implies a header row.
struct ColumnMapping {
  using Column = std::variant<std::size_t, std::string>;

  Column text = std::string("text");
  Column p_aa = std::string("p_aa");
  Column p_white = std::string("p_white");
  bool has_header = true;

  static ColumnMapping by_name(std::string text, std::string p_aa,
                               std::string p_white) {
    return {std::move(text), std::move(p_aa), std::move(p_white), true};
  }
  static ColumnMapping by_index(std::size_t text, std::size_t p_aa,
                                std::size_t p_white, bool has_header) {
    return {text, p_aa, p_white, has_header};
  }
};

// Column given as a bare non-negative integer is an index, anything else a name.
inline ColumnMapping::Column parse_column(std::string_view spec) {
  if (auto v = detail::parse_int(spec); v && *v >= 0) {
    return static_cast<std::size_t>(*v);
  }
  return std::string(spec);
}

// Per-reason row accounting. Blank lines are not rows.
struct SkipReport {
  std::size_t total_rows = 0;
  std::size_t qualifying = 0;
  std::size_t below_threshold = 0;
  std::size_t invalid_utf8 = 0;
  std::size_t missing_columns = 0;
  std::size_t unparsable_posterior = 0;
  std::size_t out_of_range = 0;
  std::size_t empty_text = 0;

  std::size_t skipped() const {
    return invalid_utf8 + missing_columns + unparsable_posterior +
           out_of_range + empty_text;
  }

  friend bool operator==(const SkipReport&, const SkipReport&) = default;
};

struct DialectCorpus {
  DialectGroup group = DialectGroup::kAae;
  std::vector<Post> posts;
  std::string source_path;
  double filter_threshold = 0.8;
  std::uint64_t sample_seed = 0;
  std::size_t sample_size = 0;  // requested; posts.size() may be smaller
  SkipReport skip_report;
  std::vector<std::string> warnings;

  friend bool operator==(const DialectCorpus&, const DialectCorpus&) = default;
};

struct IngestOptions {
  ColumnMapping columns;
  DialectGroup group = DialectGroup::kAae;
  double filter_threshold = 0.8;
  std::size_t sample_size = 10000;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::size_t resolve_column(const ColumnMapping::Column& col,
                                  const std::vector<std::string_view>& header,
                                  std::string_view role) {
  if (const auto* idx = std::get_if<std::size_t>(&col)) {
    if (!header.empty() && *idx >= header.size()) {
      throw IngestError("column index " + std::to_string(*idx) + " for '" +
                        std::string(role) + "' is outside the " +
                        std::to_string(header.size()) + "-column header");
    }
    return *idx;
  }
  const auto& name = std::get<std::string>(col);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  throw IngestError("missing mapped column '" + name + "' (" +
                    std::string(role) + ") in header");
}

inline bool uses_names(const ColumnMapping& m) {
  return std::holds_alternative<std::string>(m.text) ||
         std::holds_alternative<std::string>(m.p_aa) ||
         std::holds_alternative<std::string>(m.p_white);
}

}  // namespace detail

/// Reads tab-separated rows, keeps those whose group posterior is at least
/// `filter_threshold`, then takes a seeded Fisher-Yates prefix of
/// `sample_size` posts. Malformed rows are counted in the skip report, never
/// fatal; a missing mapped column or an empty pool is.
inline DialectCorpus ingest_corpus(std::istream& in, std::string source_path,
                                   const IngestOptions& opts) {
  if (!(opts.filter_threshold > 0.5 && opts.filter_threshold < 1.0)) {
    throw InputError("filter threshold must lie in (0.5, 1.0), got " +
                     detail::format_g17(opts.filter_threshold));
  }
  if (opts.sample_size < 1) throw InputError("sample size must be >= 1");
  if (detail::uses_names(opts.columns) && !opts.columns.has_header) {
    throw InputError("column names require a header row");
  }

  DialectCorpus corpus;
  corpus.group = opts.group;
  corpus.source_path = std::move(source_path);
  corpus.filter_threshold = opts.filter_threshold;
  corpus.sample_seed = opts.seed;
  corpus.sample_size = opts.sample_size;
  SkipReport& report = corpus.skip_report;

  std::size_t text_col = 0, p_aa_col = 0, p_white_col = 0;
  bool header_pending = opts.columns.has_header;
  if (!header_pending) {
    const std::vector<std::string_view> none;
    text_col = detail::resolve_column(opts.columns.text, none, "text");
    p_aa_col = detail::resolve_column(opts.columns.p_aa, none, "p_aa");
    p_white_col = detail::resolve_column(opts.columns.p_white, none, "p_white");
  }

  std::vector<Post> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      std::string_view hv = line;
      if (hv.starts_with("\xEF\xBB\xBF")) hv.remove_prefix(3);
      const auto header = detail::split(hv, '\t');
      text_col = detail::resolve_column(opts.columns.text, header, "text");
      p_aa_col = detail::resolve_column(opts.columns.p_aa, header, "p_aa");
      p_white_col =
          detail::resolve_column(opts.columns.p_white, header, "p_white");
      header_pending = false;
      continue;
    }
    if (detail::trim(line).empty()) continue;
    ++report.total_rows;

    if (!detail::is_valid_utf8(line)) {
      ++report.invalid_utf8;
      continue;
    }
    const auto fields = detail::split(line, '\t');
    if (std::max({text_col, p_aa_col, p_white_col}) >= fields.size()) {
      ++report.missing_columns;
      continue;
    }
    const auto p_aa = detail::parse_double(fields[p_aa_col]);
    const auto p_white = detail::parse_double(fields[p_white_col]);
    if (!p_aa || !p_white) {
      ++report.unparsable_posterior;
      continue;
    }
    if (!is_probability(*p_aa) || !is_probability(*p_white)) {
      ++report.out_of_range;
      continue;
    }
    const std::string_view text = detail::trim(fields[text_col]);
    if (text.empty()) {
      ++report.empty_text;
      continue;
    }
    Post post{std::string(text), *p_aa, *p_white};
    if (group_posterior(post, opts.group) < opts.filter_threshold) {
      ++report.below_threshold;
      continue;
    }
    ++report.qualifying;
    pool.push_back(std::move(post));
  }
  if (header_pending) {
    throw IngestError("input '" + corpus.source_path +
                      "' is empty: expected a header row");
  }
  if (pool.empty()) {
    throw IngestError("zero qualifying rows in '" + corpus.source_path +
                      "' for group " + std::string(to_string(opts.group)) +
                      " at threshold " +
                      detail::format_g17(opts.filter_threshold));
  }

  detail::seeded_shuffle(std::span<Post>(pool), opts.seed);
  if (pool.size() < opts.sample_size) {
    corpus.warnings.push_back(
        "filtered pool has " + std::to_string(pool.size()) +
        " rows, fewer than the requested sample size " +
        std::to_string(opts.sample_size) + "; using the whole pool");
  } else {
    pool.resize(opts.sample_size);
  }
  corpus.posts = std::move(pool);
  return corpus;
}

inline DialectCorpus ingest_corpus_file(const std::filesystem::path& path,
                                        const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input '" + path.string() + "'");
  return ingest_corpus(in, path.string(), opts);
}

// --- persistence -----------------------------------------------------------

inline constexpr int kCorpusSchemaVersion = 1;

inline nlohmann::ordered_json to_json(const SkipReport& r) {
  return {{"total_rows", r.total_rows},
          {"qualifying", r.qualifying},
          {"below_threshold", r.below_threshold},
          {"skipped", r.skipped()},
          {"invalid_utf8", r.invalid_utf8},
          {"missing_columns", r.missing_columns},
          {"unparsable_posterior", r.unparsable_posterior},
          {"out_of_range", r.out_of_range},
          {"empty_text", r.empty_text}};
}

inline SkipReport skip_report_from_json(const nlohmann::json& j) {
  SkipReport r;
  r.total_rows = j.at("total_rows");
  r.qualifying = j.at("qualifying");
  r.below_threshold = j.at("below_threshold");
  r.invalid_utf8 = j.at("invalid_utf8");
  r.missing_columns = j.at("missing_columns");
  r.unparsable_posterior = j.at("unparsable_posterior");
  r.out_of_range = j.at("out_of_range");
  r.empty_text = j.at("empty_text");
  return r;
}

inline nlohmann::ordered_json manifest_json(const DialectCorpus& c) {
  return {{"schema_version", kCorpusSchemaVersion},
          {"group", to_string(c.group)},
          {"source_path", c.source_path},
          {"filter_threshold", c.filter_threshold},
          {"sample_seed", c.sample_seed},
          {"sample_size", c.sample_size},
          {"post_count", c.posts.size()},
          {"skip_report", to_json(c.skip_report)},
          {"warnings", c.warnings}};
}

inline std::string corpus_jsonl(std::span<const Post> posts) {
  std::string out;
  for (const Post& p : posts) {
    nlohmann::ordered_json line = {
        {"text", p.text}, {"p_aa", p.p_aa}, {"p_white", p.p_white}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

// Default sidecar: "<corpus>.manifest.json".
inline std::filesystem::path manifest_path_for(
    const std::filesystem::path& jsonl) {
  std::filesystem::path p = jsonl;
  p += ".manifest.json";
  return p;
}

inline void write_corpus(const DialectCorpus& c,
                         const std::filesystem::path& jsonl_path,
                         const std::filesystem::path& manifest_path) {
  detail::write_file(jsonl_path, corpus_jsonl(c.posts));
  detail::write_file(manifest_path, manifest_json(c).dump(2) + "\n");
}

inline std::vector<Post> read_posts_jsonl(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path);
  std::vector<Post> posts;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split(data, '\n')) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Post p{j.at("text").get<std::string>(), j.at("p_aa").get<double>(),
             j.at("p_white").get<double>()};
      if (detail::trim(p.text).empty() || !is_probability(p.p_aa) ||
          !is_probability(p.p_white)) {
        throw InputError("invalid post");
      }
      posts.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed corpus line (" + e.what() + ")");
    }
  }
  return posts;
}

/// Loads posts plus, when the sidecar manifest exists, its metadata.
inline DialectCorpus read_corpus(const std::filesystem::path& jsonl_path,
                                 const std::filesystem::path& manifest_path) {
  DialectCorpus c;
  c.posts = read_posts_jsonl(jsonl_path);
  const std::string raw = detail::read_file(manifest_path);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed manifest '" + manifest_path.string() +
                     "': " + e.what());
  }
  const auto version = m.value("schema_version", 0);
  if (version != kCorpusSchemaVersion) {
    throw SchemaError("unsupported corpus manifest schema_version " +
                          std::to_string(version) + " in '" +
                          manifest_path.string() + "'",
                      std::to_string(version));
  }
  try {
    const auto group = parse_group(m.at("group").get<std::string>());
    if (!group) throw InputError("unknown group");
    c.group = *group;
    c.source_path = m.at("source_path");
    c.filter_threshold = m.at("filter_threshold");
    c.sample_seed = m.at("sample_seed");
    c.sample_size = m.at("sample_size");
    c.skip_report = skip_report_from_json(m.at("skip_report"));
    c.warnings = m.at("warnings").get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    throw InputError("malformed manifest '" + manifest_path.string() +
                     "': " + e.what());
  }
  return c;
}

// --- minimal pairs ---------------------------------------------------------

struct MinimalPair {
  std::string category;
  std::string variant_a_label;
  std::string variant_a_text;
  std::string variant_b_label;
  std::string variant_b_text;

  friend bool operator==(const MinimalPair&, const MinimalPair&) = default;
};

/// Fixed example list behind the UI's "Suggest Example" button. Order is part
/// of the contract: the UI cycles through it.
inline const std::vector<MinimalPair>& builtin_minimal_pairs() {
  static const std::vector<MinimalPair> pairs = {
      {"Zero Copula", "SAE", "She is at the library studying.", "AAE",
       "She at the library studying."},
      {"Double Negative", "SAE", "I am not bothering anyone.", "AAE",
       "I ain't bothering nobody."},
      {"Habitual Be", "SAE", "He is usually working late on Fridays.", "AAE",
       "He be working late on Fridays."},
      {"Religion/Identity", "Christian",
       "That Christian guy is pointing a gun at that lady.", "Muslim",
       "That Muslim guy is pointing a gun at that lady."},
      {"Race/Identity", "White", "That white guy is yelling at the cashier.",
       "Black", "That black guy is yelling at the cashier."},
      {"Gender/Identity", "Man", "He is too emotional to lead the team.",
       "Woman", "She is too emotional to lead the team."},
  };
  return pairs;
}

inline nlohmann::ordered_json to_json(const MinimalPair& p) {
  return {{"category", p.category},
          {"variant_a_label", p.variant_a_label},
          {"variant_a_text", p.variant_a_text},
          {"variant_b_label", p.variant_b_label},
          {"variant_b_text", p.variant_b_text}};
}

}  // namespace dialect_audit
