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

// dialect-audit command line: ingest, score, report, sweep, serve.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or input error.
// Logs go to stderr; data goes to files (or stdout where noted).

#include <charconv>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialect_audit/audit.hpp"
#include "dialect_audit/corpus.hpp"
#include "dialect_audit/metrics.hpp"
#include "dialect_audit/scorers.hpp"
#include "dialect_audit/service.hpp"
#include "dialect_audit/version.hpp"

namespace dialect_audit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

inline std::string format_shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// CSV with a threshold column and one FPR column per named curve.
inline std::string sweep_csv(const std::vector<double>& grid,
                             const std::vector<std::pair<std::string, FprCurve>>& curves) {
  std::string out = "threshold";
  for (const auto& [name, _] : curves) out += "," + name;
  out += '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += format_shortest(grid[i]);
    for (const auto& [_, c] : curves) out += "," + format_shortest(c.fpr[i]);
    out += '\n';
  }
  return out;
}

namespace detail {

struct GridFlags {
  double start = 0.0;
  double stop = 1.0;
  double step = 0.01;

  void add_to(CLI::App* app) {
    app->add_option("--grid-start", start, "First threshold")->capture_default_str();
    app->add_option("--grid-stop", stop, "Last threshold")->capture_default_str();
    app->add_option("--grid-step", step, "Threshold spacing")->capture_default_str();
  }
  ThresholdGrid grid() const { return {start, stop, step}; }
};

struct ScorerFlags {
  ScorerConfig config;

  void add_to(CLI::App* app) {
    app->add_option("--model", config.model_path,
                    "'reference' or a transformer checkpoint (directory or .safetensors)")
        ->capture_default_str();
    app->add_option("--tokenizer", config.tokenizer_path,
                    "vocab.txt (default: next to the model)");
    app->add_option("--max-tokens", config.max_tokens, "Truncation length in tokens")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--batch-size", config.batch_size, "Texts per scoring slice")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
};

inline void write_or_print(const std::string& path, const std::string& data,
                           std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
  } else {
    dialect_audit::detail::write_file(path, data);
  }
}

inline nlohmann::json optional_manifest(const std::string& path) {
  if (path.empty()) return nullptr;
  try {
    return nlohmann::json::parse(dialect_audit::detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed manifest '" + path + "': " + e.what());
  }
}

inline std::atomic<service::PredictionServer*> g_server{nullptr};

}  // namespace detail

/// Entry point shared by the binary and the in-process tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Dialectal bias audit for six-label toxicity classifiers",
               std::string(kToolName)};
  app.set_version_flag("--version",
                       std::string(R"({"name":")") + std::string(kToolName) +
                           R"(","version":")" + std::string(kToolVersion) + "\"}");
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every random choice (corpus sampling)")
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter and sample a TSV corpus into JSON Lines");
  std::string in_path, in_group, in_output, in_manifest;
  std::string col_text = "text", col_p_aa = "p_aa", col_p_white = "p_white";
  bool no_header = false;
  double in_threshold = 0.8;
  std::size_t in_sample = 10000;
  ingest->add_option("--input", in_path, "Tab-separated source file")->required();
  ingest->add_option("--group", in_group, "AAE or SAE")
      ->required()
      ->check(CLI::IsMember({"AAE", "SAE", "aae", "sae"}));
  ingest->add_option("--output", in_output, "Output JSON Lines path")->required();
  ingest->add_option("--manifest", in_manifest, "Manifest path (default: <output>.manifest.json)");
  ingest->add_option("--threshold", in_threshold, "Minimum group posterior, in (0.5, 1)")
      ->capture_default_str();
  ingest->add_option("--sample-size", in_sample, "Posts to keep")->capture_default_str();
  ingest->add_option("--text-col", col_text, "Text column (header name or 0-based index)")
      ->capture_default_str();
  ingest->add_option("--p-aa-col", col_p_aa, "AAE posterior column")->capture_default_str();
  ingest->add_option("--p-white-col", col_p_white, "White-aligned posterior column")
      ->capture_default_str();
  ingest->add_flag("--no-header", no_header, "Input has no header row (indices only)");

  // score
  auto* score = app.add_subcommand("score", "Score a corpus into a CSV score table");
  std::string sc_corpus, sc_manifest, sc_group, sc_output;
  detail::ScorerFlags sc_scorer;
  score->add_option("--corpus", sc_corpus, "Corpus JSON Lines")->required();
  score->add_option("--manifest", sc_manifest, "Corpus manifest (default: <corpus>.manifest.json)");
  score->add_option("--group", sc_group, "AAE or SAE (default: from the manifest)")
      ->check(CLI::IsMember({"AAE", "SAE", "aae", "sae"}));
  score->add_option("--output", sc_output, "Score table CSV path")->required();
  sc_scorer.add_to(score);

  // report
  auto* report = app.add_subcommand("report", "Build the disparity report from two score tables");
  std::string rp_aae, rp_sae, rp_output, rp_aae_manifest, rp_sae_manifest, rp_table;
  std::vector<std::string> rp_published;
  std::size_t rp_bins = 50;
  detail::GridFlags rp_grid;
  report->add_option("--aae", rp_aae, "AAE score table")->required();
  report->add_option("--sae", rp_sae, "SAE score table")->required();
  report->add_option("--output", rp_output, "Report JSON path")->required();
  report->add_option("--aae-manifest", rp_aae_manifest, "AAE corpus manifest to embed");
  report->add_option("--sae-manifest", rp_sae_manifest, "SAE corpus manifest to embed");
  report->add_option("--table", rp_table, "Also write a Markdown means table ('-' for stdout)");
  report->add_option("--published", rp_published,
                     "label=text: externally reported ratio shown next to the computed one");
  report->add_option("--bins", rp_bins, "Histogram bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rp_grid.add_to(report);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "FPR-vs-threshold curves for one or both groups");
  std::string sw_aae, sw_sae, sw_output, sw_label = "toxicity";
  detail::GridFlags sw_grid;
  sweep->add_option("--aae", sw_aae, "AAE score table");
  sweep->add_option("--sae", sw_sae, "SAE score table");
  sweep->add_option("--label", sw_label, "Label to threshold")->capture_default_str();
  sweep->add_option("--output", sw_output, "CSV path (default: stdout)");
  sw_grid.add_to(sweep);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the prediction API (and optional UI bundle)");
  service::ServiceOptions sv_opts;
  detail::ScorerFlags sv_scorer;
  std::string sv_static;
  serve->add_option("--host", sv_opts.bind_address, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_opts.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--max-text-chars", sv_opts.max_text_chars, "Longest accepted text")
      ->capture_default_str();
  serve->add_option("--cors", sv_opts.cors_allowlist, "Allowed origin (repeatable; default any)");
  serve->add_option("--static-dir", sv_static, "Built UI bundle to serve under /");
  sv_scorer.add_to(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      IngestOptions opts;
      opts.group = *parse_group(in_group);
      opts.filter_threshold = in_threshold;
      opts.sample_size = in_sample;
      opts.seed = seed;
      opts.columns.text = parse_column(col_text);
      opts.columns.p_aa = parse_column(col_p_aa);
      opts.columns.p_white = parse_column(col_p_white);
      opts.columns.has_header = !no_header;
      const auto corpus = ingest_corpus_file(in_path, opts);
      const std::filesystem::path manifest =
          in_manifest.empty() ? manifest_path_for(in_output) : std::filesystem::path(in_manifest);
      write_corpus(corpus, in_output, manifest);
      const auto& r = corpus.skip_report;
      err << "ingest: " << r.total_rows << " rows, " << r.qualifying << " qualifying, "
          << r.below_threshold << " below threshold, " << r.skipped() << " skipped; kept "
          << corpus.posts.size() << "\n";
      for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";
    } else if (*score) {
      const std::filesystem::path manifest =
          sc_manifest.empty() ? manifest_path_for(sc_corpus) : std::filesystem::path(sc_manifest);
      DialectCorpus corpus;
      if (std::filesystem::exists(manifest)) {
        corpus = read_corpus(sc_corpus, manifest);
      } else if (!sc_manifest.empty()) {
        throw InputError("manifest '" + sc_manifest + "' does not exist");
      } else {
        corpus.posts = read_posts_jsonl(sc_corpus);
        if (sc_group.empty()) {
          throw InputError("no manifest next to '" + sc_corpus + "'; pass --group");
        }
      }
      if (!sc_group.empty()) corpus.group = *parse_group(sc_group);
      if (corpus.posts.empty()) throw InputError("corpus '" + sc_corpus + "' is empty");
      const auto scorer = load_scorer(sc_scorer.config);
      write_score_table(score_corpus(corpus, *scorer), sc_output);
      err << "score: " << corpus.posts.size() << " posts scored with " << scorer->backend()
          << "\n";
    } else if (*report) {
      AuditConfig cfg;
      cfg.grid = rp_grid.grid();
      cfg.bin_count = rp_bins;
      std::map<Label, std::string> published;
      for (const auto& entry : rp_published) {
        const auto eq = entry.find('=');
        const auto label = eq == std::string::npos
                               ? std::nullopt
                               : parse_label(std::string_view(entry).substr(0, eq));
        if (!label) throw InputError("--published expects label=text, got '" + entry + "'");
        published[*label] = entry.substr(eq + 1);
      }
      ReportMetadata meta;
      meta.aae_manifest = detail::optional_manifest(rp_aae_manifest);
      meta.sae_manifest = detail::optional_manifest(rp_sae_manifest);
      meta.timestamp = reproducible_timestamp();
      const auto aae = read_score_table(rp_aae);
      const auto sae = read_score_table(rp_sae);
      const auto rep = build_report(aae, sae, cfg, std::move(meta));
      write_report(rep, rp_output);
      if (!rp_table.empty()) {
        detail::write_or_print(rp_table, render_means_table(rep, published), out);
      }
    } else if (*sweep) {
      if (sw_aae.empty() && sw_sae.empty()) {
        throw InputError("sweep needs --aae and/or --sae");
      }
      const auto label = parse_label(sw_label);
      if (!label) throw InputError("unknown label '" + sw_label + "'");
      const auto grid = make_grid(sw_grid.grid());
      std::vector<std::pair<std::string, FprCurve>> curves;
      for (const auto& [name, path] : {std::pair{"aae_fpr", sw_aae}, {"sae_fpr", sw_sae}}) {
        if (path.empty()) continue;
        const auto table = read_score_table(path);
        if (table.rows.empty()) throw InputError("score table '" + path + "' is empty");
        curves.emplace_back(name, fpr_curve(table.label_column(*label), grid));
      }
      detail::write_or_print(sw_output, sweep_csv(grid, curves), out);
    } else if (*serve) {
      if (!sv_static.empty()) sv_opts.static_dir = sv_static;
      const auto scorer = load_scorer(sv_scorer.config);
      service::PredictionServer server(*scorer, sv_opts);
      if (server.bind() < 0) {
        throw IoError("cannot bind " + sv_opts.bind_address + ":" +
                      std::to_string(sv_opts.port));
      }
      err << "serving " << scorer->backend() << " scorer on http://" << sv_opts.bind_address
          << ":" << server.port() << "\n";
      detail::g_server = &server;
      std::signal(SIGINT, [](int) {
        if (auto* s = detail::g_server.load()) s->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (auto* s = detail::g_server.load()) s->stop();
      });
      server.listen();
      detail::g_server = nullptr;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace dialect_audit::cli
