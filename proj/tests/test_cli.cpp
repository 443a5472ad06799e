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

#include "dialect_audit/cli.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace dialect_audit::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kData = DIALECT_AUDIT_TEST_DATA;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dialect-audit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary through the shell; returns its exit status.
int run_binary(const std::string& args, std::string* stdout_text = nullptr) {
  const std::string cmd = std::string(DIALECT_AUDIT_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  std::string text;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) text.append(buf, n);
  const int status = pclose(p);
  if (stdout_text) *stdout_text = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dialect_audit_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // ingest -> score -> report -> sweep over fixture_200 into `prefix`.
  void pipeline(const std::string& prefix) {
    fs::create_directories(dir_ / prefix);
    const auto f = [&](const char* n) { return p(prefix + "/" + n); };
    const std::string in = (kData / "fixture_200.tsv").string();
    ASSERT_EQ(run_cli({"--seed", "7", "ingest", "--input", in, "--group", "AAE", "--output",
                       f("aae.jsonl"), "--sample-size", "40"}).code, 0);
    ASSERT_EQ(run_cli({"--seed", "7", "ingest", "--input", in, "--group", "SAE", "--output",
                       f("sae.jsonl"), "--sample-size", "40"}).code, 0);
    ASSERT_EQ(run_cli({"score", "--corpus", f("aae.jsonl"), "--output", f("aae.csv")}).code, 0);
    ASSERT_EQ(run_cli({"score", "--corpus", f("sae.jsonl"), "--output", f("sae.csv")}).code, 0);
    ASSERT_EQ(run_cli({"report", "--aae", f("aae.csv"), "--sae", f("sae.csv"), "--output",
                       f("report.json"), "--aae-manifest", f("aae.jsonl.manifest.json"),
                       "--sae-manifest", f("sae.jsonl.manifest.json"), "--table",
                       f("means.md")}).code, 0);
    ASSERT_EQ(run_cli({"sweep", "--aae", f("aae.csv"), "--sae", f("sae.csv"), "--output",
                       f("sweep.csv")}).code, 0);
  }

  fs::path dir_;
};

TEST(Cli, VersionIsJson) {
  const auto r = run_cli({"--version"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["name"], "dialect-audit");
  EXPECT_EQ(j["version"], std::string(kToolVersion));
}

TEST(Cli, HelpListsSubcommands) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"ingest", "score", "report", "sweep", "serve"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"ingest", "--input", "x"}).code, 2);
  EXPECT_EQ(run_cli({"ingest", "--input", "/no/such/file.tsv", "--group", "AAE", "--output",
                     "/tmp/x.jsonl"}).code, 2);
  EXPECT_EQ(run_cli({"ingest", "--input", (kData / "fixture_20.tsv").string(), "--group", "XYZ",
                     "--output", "/tmp/x.jsonl"}).code, 2);
}

TEST_F(CliTest, IngestWritesSampleAndManifest) {
  const auto r = run_cli({"--seed", "42", "ingest", "--input", (kData / "fixture_20.tsv").string(),
                          "--group", "AAE", "--output", p("aae.jsonl"), "--sample-size", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto posts = read_posts_jsonl(p("aae.jsonl"));
  ASSERT_EQ(posts.size(), 5u);
  EXPECT_EQ(posts[0].text, "Man imissed a called from my bae hellla mad...");
  const auto m = nlohmann::json::parse(dialect_audit::detail::read_file(p("aae.jsonl.manifest.json")));
  EXPECT_EQ(m["sample_seed"], 42u);
  EXPECT_NE(r.err.find("7 qualifying"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, ScoreProducesOneRowPerPost) {
  const auto r = run_cli({"ingest", "--input", (kData / "fixture_20.tsv").string(), "--group",
                          "SAE", "--output", p("sae.jsonl"), "--sample-size", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run_cli({"score", "--corpus", p("sae.jsonl"), "--output", p("sae.csv")}).code, 0);
  const auto t = read_score_table(p("sae.csv"));
  const auto posts = read_posts_jsonl(p("sae.jsonl"));
  ASSERT_EQ(t.rows.size(), posts.size());
  const ReferenceScorer s;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    EXPECT_EQ(t.rows[i].post, posts[i]);
    EXPECT_EQ(t.rows[i].scores, s.score(posts[i].text));
  }
}

TEST_F(CliTest, ScoreEmptyCorpusExitsTwo) {
  dialect_audit::detail::write_file(p("empty.jsonl"), "");
  EXPECT_EQ(run_cli({"score", "--corpus", p("empty.jsonl"), "--group", "AAE", "--output",
                     p("out.csv")}).code, 2);
  EXPECT_FALSE(fs::exists(p("out.csv")));
}

TEST_F(CliTest, ScoreMissingModelExitsTwoAndNamesPath) {
  dialect_audit::detail::write_file(p("c.jsonl"), R"({"text":"hi","p_aa":0.9,"p_white":0.0})" "\n");
  const auto r = run_cli({"score", "--corpus", p("c.jsonl"), "--group", "AAE", "--output",
                          p("out.csv"), "--model", "/no/model/here"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/no/model/here"), std::string::npos) << r.err;
}

ScoreTable table_of(DialectGroup g, const std::vector<double>& tox) {
  ScoreTable t;
  t.group = g;
  t.scorer_backend = "reference";
  for (double v : tox) {
    ScoredPost sp;
    sp.post = {"t", 0.9, 0.05};
    sp.scores.values = {v, 0, 0, 0, 0, 0};
    t.rows.push_back(sp);
  }
  return t;
}

TEST_F(CliTest, SweepDirectCount) {
  write_score_table(table_of(DialectGroup::kAae, {0.2, 0.6, 0.9}), p("a.csv"));
  const auto r = run_cli({"sweep", "--aae", p("a.csv"), "--grid-start", "0", "--grid-stop", "1",
                          "--grid-step", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "threshold,aae_fpr\n0,1\n0.5,0.6666666666666666\n1,0\n");
}

TEST_F(CliTest, SweepDefaultGridHas101Rows) {
  write_score_table(table_of(DialectGroup::kAae, {0.2, 0.6, 0.9}), p("a.csv"));
  write_score_table(table_of(DialectGroup::kSae, {0.1}), p("s.csv"));
  const auto r = run_cli({"sweep", "--aae", p("a.csv"), "--sae", p("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 102);
  EXPECT_TRUE(r.out.starts_with("threshold,aae_fpr,sae_fpr\n0,1,1\n0.01,"));
  EXPECT_TRUE(r.out.ends_with("\n1,0,0\n"));
}

TEST_F(CliTest, SweepDominatingCorpusGivesDominatingCurve) {
  // Each AAE score is an SAE score shifted up, so AAE stochastically dominates.
  std::vector<double> sae, aae;
  for (int i = 0; i < 200; ++i) {
    const double s = (i * 37 % 200) / 250.0;
    sae.push_back(s);
    aae.push_back(std::min(1.0, s + 0.1 + (i % 3) * 0.05));
  }
  write_score_table(table_of(DialectGroup::kAae, aae), p("a.csv"));
  write_score_table(table_of(DialectGroup::kSae, sae), p("s.csv"));
  const auto r = run_cli({"sweep", "--aae", p("a.csv"), "--sae", p("s.csv")});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = dialect_audit::detail::split(line, ',');
    EXPECT_GE(*dialect_audit::detail::parse_double(f[1]), *dialect_audit::detail::parse_double(f[2])) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 101);
}

TEST_F(CliTest, SweepNeedsATable) {
  EXPECT_EQ(run_cli({"sweep"}).code, 2);
  EXPECT_EQ(run_cli({"sweep", "--aae", p("missing.csv")}).code, 2);
}

TEST_F(CliTest, ReportRendersPublishedColumn) {
  auto shaped = [](DialectGroup g, const std::array<double, 6>& means) {
    ScoreTable t;
    t.group = g;
    ScoredPost sp;
    sp.post = {"t", 0.9, 0.05};
    sp.scores.values = means;
    t.rows.push_back(sp);
    return t;
  };
  write_score_table(shaped(DialectGroup::kAae,
                           {0.279225, 0.030577, 0.186225, 0.007578, 0.117351, 0.045805}),
                    p("a.csv"));
  write_score_table(shaped(DialectGroup::kSae,
                           {0.148181, 0.008457, 0.076791, 0.005651, 0.042885, 0.005237}),
                    p("s.csv"));
  const auto r = run_cli({"report", "--aae", p("a.csv"), "--sae", p("s.csv"), "--output",
                          p("r.json"), "--table", "-", "--published", "toxicity=1.8x",
                          "--published", "identity_attack=8.8x"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| 1.884 | 1.8x |"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("| 8.746 | 8.8x |"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(dialect_audit::detail::read_file(p("r.json")));
  EXPECT_NEAR(j["ratios"]["toxicity"]["value"].get<double>(), 1.884, 0.001);
  EXPECT_EQ(run_cli({"report", "--aae", p("a.csv"), "--sae", p("s.csv"), "--output", p("r2.json"),
                     "--published", "nonsense"}).code, 2);
}

TEST_F(CliTest, ReportOnIdenticalTablesGivesUnitRatios) {
  write_score_table(table_of(DialectGroup::kAae, {0.3, 0.4}), p("a.csv"));
  write_score_table(table_of(DialectGroup::kSae, {0.3, 0.4}), p("s.csv"));
  ASSERT_EQ(run_cli({"report", "--aae", p("a.csv"), "--sae", p("s.csv"), "--output",
                     p("r.json")}).code, 0);
  const auto j = nlohmann::json::parse(dialect_audit::detail::read_file(p("r.json")));
  EXPECT_EQ(j["ratios"]["toxicity"]["value"].get<double>(), 1.0);
}

TEST_F(CliTest, PipelineIsIdempotentAndFast) {
  const auto t0 = std::chrono::steady_clock::now();
  pipeline("one");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 5.0);
  pipeline("two");
  for (const char* f : {"aae.jsonl", "aae.jsonl.manifest.json", "sae.jsonl", "aae.csv", "sae.csv",
                        "report.json", "means.md", "sweep.csv"}) {
    EXPECT_EQ(dialect_audit::detail::read_file(dir_ / "one" / f), dialect_audit::detail::read_file(dir_ / "two" / f)) << f;
  }
  const auto rep = read_report(p("one/report.json"));
  EXPECT_EQ(rep.metadata.aae_manifest["skip_report"]["total_rows"], 200u);
  EXPECT_FALSE(rep.metadata.timestamp);
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsFlagsWin) {
  dialect_audit::detail::write_file(p("cfg.toml"), "seed = 42\n[ingest]\nsample-size = 3\n");
  auto r = run_cli({"--config", p("cfg.toml"), "ingest", "--input",
                    (kData / "fixture_20.tsv").string(), "--group", "AAE", "--output", p("a.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_posts_jsonl(p("a.jsonl")).size(), 3u);
  r = run_cli({"--config", p("cfg.toml"), "ingest", "--input", (kData / "fixture_20.tsv").string(),
               "--group", "AAE", "--output", p("b.jsonl"), "--sample-size", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto posts = read_posts_jsonl(p("b.jsonl"));
  ASSERT_EQ(posts.size(), 5u);
  EXPECT_EQ(posts[0].text, "Man imissed a called from my bae hellla mad...");
}

TEST_F(CliTest, BinaryExitCodes) {
  std::string out;
  EXPECT_EQ(run_binary("--version", &out), 0);
  EXPECT_NE(out.find("\"version\""), std::string::npos);
  EXPECT_EQ(run_binary(""), 2);
  EXPECT_EQ(run_binary("ingest --input /no/such.tsv --group AAE --output " + p("x.jsonl")), 2);
  write_score_table(table_of(DialectGroup::kAae, {0.2, 0.6, 0.9}), p("a.csv"));
  EXPECT_EQ(run_binary("sweep --aae " + p("a.csv") + " --grid-step 0.5", &out), 0);
  EXPECT_EQ(out, "threshold,aae_fpr\n0,1\n0.5,0.6666666666666666\n1,0\n");
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
  write_score_table(table_of(DialectGroup::kAae, {0.2}), p("a.csv"));
  fs::create_directories(p("out.csv") + "/keep");
  EXPECT_EQ(run_binary("sweep --aae " + p("a.csv") + " --output " + p("out.csv")), 2);
}

// Stream buffer that rejects every write.
struct BrokenBuf : std::streambuf {
  int overflow(int) override { return traits_type::eof(); }
};

TEST_F(CliTest, InternalFailureExitsOne) {
  write_score_table(table_of(DialectGroup::kAae, {0.2}), p("a.csv"));
  BrokenBuf buf;
  std::ostream broken(&buf);
  broken.exceptions(std::ios::badbit);
  std::ostringstream err;
  const std::string a = p("a.csv");
  const char* argv[] = {"dialect-audit", "sweep", "--aae", a.c_str()};
  EXPECT_EQ(run(4, argv, broken, err), 1);
  EXPECT_NE(err.str().find("internal error"), std::string::npos) << err.str();
}

TEST_F(CliTest, ServeAnswersHealth) {
  const std::string log = p("serve.log");
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    if (!std::freopen(log.c_str(), "w", stderr)) _exit(126);
    execl(DIALECT_AUDIT_CLI, DIALECT_AUDIT_CLI, "serve", "--port", "0", static_cast<char*>(nullptr));
    _exit(127);
  }
  int port = 0;
  for (int i = 0; i < 100 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    const auto text = fs::exists(log) ? dialect_audit::detail::read_file(log) : std::string();
    const auto at = text.rfind(':');
    if (text.find("serving") != std::string::npos && at != std::string::npos) {
      port = std::atoi(text.c_str() + at + 1);
    }
  }
  ASSERT_GT(port, 0);
  httplib::Client c("127.0.0.1", port);
  const auto res = c.Get("/api/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["backend"], "reference");
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0) << status;
}

}  // namespace
}  // namespace dialect_audit::cli
