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

#include "dialect_audit/corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"

namespace dialect_audit {
namespace {

const std::filesystem::path kData = DIALECT_AUDIT_TEST_DATA;

IngestOptions aae_options(std::size_t n, std::uint64_t seed) {
  IngestOptions o;
  o.group = DialectGroup::kAae;
  o.sample_size = n;
  o.seed = seed;
  return o;
}

DialectCorpus ingest_string(const std::string& tsv, const IngestOptions& o) {
  std::istringstream in(tsv);
  return ingest_corpus(in, "inline", o);
}

TEST(Ingest, PublishedAaeRowIsRetained) {
  const auto c = ingest_string("text\tp_aa\tp_white\nI did not mean to say dat\t0.957143\t0.008571\n",
                               aae_options(10, 1));
  ASSERT_EQ(c.posts.size(), 1u);
  EXPECT_EQ(c.posts[0].text, "I did not mean to say dat");
  EXPECT_EQ(c.posts[0].p_aa, 0.957143);
  EXPECT_EQ(c.skip_report.qualifying, 1u);
}

TEST(Ingest, BelowThresholdRowIsSkipped) {
  const auto tsv = "text\tp_aa\tp_white\nmid\t0.5\t0.4\nhigh\t0.9\t0.05\n";
  const auto c = ingest_string(tsv, aae_options(10, 1));
  ASSERT_EQ(c.posts.size(), 1u);
  EXPECT_EQ(c.posts[0].text, "high");
  EXPECT_EQ(c.skip_report.below_threshold, 1u);
}

TEST(Ingest, FixtureSampleMatchesShuffleOracle) {
  const auto c = ingest_corpus_file(kData / "fixture_20.tsv", aae_options(5, 42));
  ASSERT_EQ(c.posts.size(), 5u);
  EXPECT_EQ(c.skip_report.total_rows, 20u);
  EXPECT_EQ(c.skip_report.qualifying, 7u);
  EXPECT_TRUE(c.warnings.empty());

  // Qualifying rows in file order, enumerated by hand from fixture_20.tsv.
  const std::vector<std::string> pool = {
      "Tuh, who mad me or ol boy?",
      "Man imissed a called from my bae hellla mad...",
      "Twink rude lol can't be calling ppl ugly that...",
      "I did not mean to say dat",
      "Smh",
      "She at the library studying",
      "he be workin all day fr"};
  const auto order = oracle::shuffled_indices(pool.size(), 42);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(c.posts[i].text, pool[order[i]]);

  // Frozen from the oracle above.
  const std::vector<std::string> frozen = {
      "Man imissed a called from my bae hellla mad...", "Smh",
      "I did not mean to say dat", "She at the library studying",
      "Tuh, who mad me or ol boy?"};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(c.posts[i].text, frozen[i]);

  const auto again = ingest_corpus_file(kData / "fixture_20.tsv", aae_options(5, 42));
  EXPECT_EQ(c, again);
}

TEST(Ingest, SaeGroupUsesWhitePosterior) {
  IngestOptions o = aae_options(100, 3);
  o.group = DialectGroup::kSae;
  const auto c = ingest_corpus_file(kData / "fixture_20.tsv", o);
  EXPECT_EQ(c.posts.size(), 7u);
  for (const auto& p : c.posts) EXPECT_GE(p.p_white, 0.8);
  ASSERT_EQ(c.warnings.size(), 1u);  // pool smaller than requested
}

TEST(Ingest, MissingMappedColumnNamesIt) {
  IngestOptions o = aae_options(5, 1);
  o.columns.p_aa = std::string("AA");
  try {
    ingest_corpus_file(kData / "fixture_20.tsv", o);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("'AA'"), std::string::npos) << e.what();
  }
}

TEST(Ingest, EmptyPoolIsAnError) {
  IngestOptions o = aae_options(5, 1);
  o.filter_threshold = 0.99;
  try {
    ingest_corpus_file(kData / "fixture_20.tsv", o);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("zero qualifying rows"), std::string::npos);
  }
}

TEST(Ingest, RejectsThresholdOutsideOpenInterval) {
  for (double t : {0.5, 1.0, 0.2}) {
    IngestOptions o = aae_options(5, 1);
    o.filter_threshold = t;
    EXPECT_THROW(ingest_string("text\tp_aa\tp_white\n", o), InputError) << t;
  }
}

TEST(Ingest, IndexMappingWithoutHeader) {
  IngestOptions o = aae_options(5, 1);
  o.columns = ColumnMapping::by_index(2, 0, 1, false);
  const auto c = ingest_string("0.9\t0.1\thello there\n0.1\t0.9\tbye\n", o);
  ASSERT_EQ(c.posts.size(), 1u);
  EXPECT_EQ(c.posts[0].text, "hello there");
}

TEST(Ingest, MalformedRowsAreCountedBySkipReason) {
  const std::string tsv =
      "text\tp_aa\tp_white\n"
      "ok one\t0.9\t0.05\n"
      "   \t0.9\t0.05\n"               // empty text
      "bad num\tabc\t0.05\n"           // unparsable
      "too big\t1.2\t0.05\n"           // out of range
      "short row\t0.9\n"               // missing column
      "bad \xff\xfe utf\t0.9\t0.05\n"  // invalid UTF-8
      "low\t0.3\t0.6\n"
      "\n";
  const auto c = ingest_string(tsv, aae_options(5, 1));
  const auto& r = c.skip_report;
  EXPECT_EQ(r.total_rows, 7u);
  EXPECT_EQ(r.qualifying, 1u);
  EXPECT_EQ(r.empty_text, 1u);
  EXPECT_EQ(r.unparsable_posterior, 1u);
  EXPECT_EQ(r.out_of_range, 1u);
  EXPECT_EQ(r.missing_columns, 1u);
  EXPECT_EQ(r.invalid_utf8, 1u);
  EXPECT_EQ(r.below_threshold, 1u);
  EXPECT_EQ(r.qualifying + r.skipped() + r.below_threshold, r.total_rows);
}

TEST(Ingest, TextIsTrimmedButOtherwiseUntouched) {
  const auto c = ingest_string("text\tp_aa\tp_white\n  Hello   World!!  \t0.9\t0.0\n",
                               aae_options(5, 1));
  EXPECT_EQ(c.posts.at(0).text, "Hello   World!!");
}

// Random fixtures: filter soundness, count conservation, determinism and
// seed sensitivity.
std::string random_tsv(std::mt19937_64& gen, std::size_t rows) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string out = "id\ttext\tp_aa\tp_white\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = u(gen);
    std::string pa = std::to_string(a);
    std::string text = "post " + std::to_string(i);
    switch (gen() % 12) {
      case 0: pa = "nan?"; break;
      case 1: pa = "1.7"; break;
      case 2: text = " "; break;
      default: break;
    }
    out += std::to_string(i) + "\t" + text + "\t" + pa + "\t" + std::to_string((1 - a) * u(gen)) + "\n";
  }
  return out;
}

TEST(IngestProperties, FilterSoundnessAndConservation) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string tsv = random_tsv(gen, 60);
    for (auto group : {DialectGroup::kAae, DialectGroup::kSae}) {
      IngestOptions o = aae_options(10, trial);
      o.group = group;
      o.filter_threshold = 0.6;
      DialectCorpus c;
      try {
        c = ingest_string(tsv, o);
      } catch (const IngestError&) {
        continue;  // empty pool
      }
      for (const auto& p : c.posts) EXPECT_GE(group_posterior(p, group), 0.6);
      const auto& r = c.skip_report;
      EXPECT_EQ(r.qualifying + r.skipped() + r.below_threshold, r.total_rows);
      EXPECT_EQ(r.total_rows, 60u);
      EXPECT_EQ(c, ingest_string(tsv, o));
    }
  }
}

TEST(IngestProperties, DifferentSeedsGiveDifferentSelections) {
  std::mt19937_64 gen(77);
  int differing = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string tsv = "text\tp_aa\tp_white\n";
    for (int i = 0; i < 30; ++i) tsv += "row " + std::to_string(i) + "\t0.9\t0.01\n";
    const auto a = ingest_string(tsv, aae_options(10, gen()));
    const auto b = ingest_string(tsv, aae_options(10, gen()));
    if (a.posts != b.posts) ++differing;
  }
  EXPECT_GE(differing, 1);
  EXPECT_GE(differing, 95);
}

TEST(CorpusPersistence, JsonLinesAndManifestRoundTrip) {
  const auto c = ingest_corpus_file(kData / "fixture_20.tsv", aae_options(5, 42));
  const auto dir = std::filesystem::temp_directory_path() / "dialect_audit_corpus_rt";
  std::filesystem::create_directories(dir);
  write_corpus(c, dir / "aae.jsonl", dir / "aae.jsonl.manifest.json");
  const auto back = read_corpus(dir / "aae.jsonl", dir / "aae.jsonl.manifest.json");
  EXPECT_EQ(back, c);
  const auto manifest = nlohmann::json::parse(detail::read_file(dir / "aae.jsonl.manifest.json"));
  EXPECT_EQ(manifest["group"], "AAE");
  EXPECT_EQ(manifest["sample_seed"], 42u);
  EXPECT_EQ(manifest["skip_report"]["total_rows"], 20u);
  std::filesystem::remove_all(dir);
}

TEST(CorpusPersistence, UnknownManifestVersionIsSchemaError) {
  const auto dir = std::filesystem::temp_directory_path() / "dialect_audit_corpus_ver";
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "c.jsonl", R"({"text":"a","p_aa":0.9,"p_white":0.1})" "\n");
  detail::write_file(dir / "m.json", R"({"schema_version": 9})");
  EXPECT_THROW(read_corpus(dir / "c.jsonl", dir / "m.json"), SchemaError);
  std::filesystem::remove_all(dir);
}

TEST(MinimalPairs, ContainsMandatedPairs) {
  const auto& pairs = builtin_minimal_pairs();
  const auto has = [&](std::string_view a, std::string_view b) {
    return std::any_of(pairs.begin(), pairs.end(), [&](const MinimalPair& p) {
      return p.variant_a_text == a && p.variant_b_text == b;
    });
  };
  EXPECT_TRUE(has("She is at the library studying.", "She at the library studying."));
  EXPECT_TRUE(has("I am not bothering anyone.", "I ain't bothering nobody."));
  EXPECT_TRUE(has("That Christian guy is pointing a gun at that lady.",
                  "That Muslim guy is pointing a gun at that lady."));
}

TEST(MinimalPairs, StructurallyValid) {
  for (const auto& p : builtin_minimal_pairs()) {
    EXPECT_FALSE(detail::trim(p.variant_a_text).empty());
    EXPECT_FALSE(detail::trim(p.variant_b_text).empty());
    EXPECT_NE(p.variant_a_label, p.variant_b_label);
    EXPECT_FALSE(p.category.empty());
  }
  EXPECT_GE(builtin_minimal_pairs().size(), 3u);
}

}  // namespace
}  // namespace dialect_audit
