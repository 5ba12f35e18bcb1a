#include <gtest/gtest.h>

#include <set>

#include "decorate/errors.hpp"
#include "decorate/pipeline.hpp"
#include "decorate/samplers.hpp"
#include "support/cli_runner.hpp"

namespace decorate {
namespace {

using fixtures::CliResult;
using fixtures::read_file;
using fixtures::run_cli;
using fixtures::TempDir;
using fixtures::write_file;

std::vector<nlohmann::json> read_lines(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::string p(const TempDir& d, const char* name) { return (d / name).string(); }

TEST(Pipeline, FullRunIsDeterministicAcrossDirectories) {
  TempDir a, b;
  fixtures::PipelineOptions o;
  const auto ra = fixtures::run_full_pipeline(a.path(), o);
  ASSERT_EQ(ra.code, 0) << ra.err;
  o.jobs = 1;  // parallelism must not change results
  const auto rb = fixtures::run_full_pipeline(b.path(), o);
  ASSERT_EQ(rb.code, 0) << rb.err;
  for (const char* f : {"schedule.jsonl", "comparisons.jsonl", "tags.jsonl", "edits.jsonl", "ratings.jsonl", "sample.jsonl"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;

  const auto manifest = load_sample_manifest(a / "sample.jsonl");
  EXPECT_EQ(manifest.strategy, "agg_tag_edit");
  EXPECT_FALSE(manifest.entries.empty());
  std::set<std::string> ids;
  for (const auto& e : manifest.entries) EXPECT_TRUE(ids.insert(e.id).second);
  EXPECT_TRUE(std::filesystem::exists(a / "sample.jsonl.summary.txt"));
  EXPECT_TRUE(std::filesystem::exists(a / "ratings.jsonl.report.json"));
  EXPECT_EQ(read_sidecar(a / "sample.jsonl")->stage, "sample");

  // Ratings cover every document on every criterion and form the 0..100 ramp.
  const auto ratings = read_lines(a / "ratings.jsonl");
  EXPECT_EQ(ratings.size(), 60u);

  // Compare records remember which side was shown first.
  std::set<std::string> orders;
  for (const auto& r : read_lines(a / "comparisons.jsonl")) orders.insert(r.at("presented_order").get<std::string>());
  EXPECT_EQ(orders, (std::set<std::string>{"AB", "BA"}));
}

TEST(Pipeline, StatsWritesJsonCsvAndTable) {
  TempDir d;
  ASSERT_EQ(fixtures::run_full_pipeline(d.path(), {}).code, 0);
  const auto r = run_cli({"stats", "--annotations", p(d, "ratings.jsonl"), "--annotations", p(d, "tags.jsonl"),
                          "--corpus", p(d, "corpus.jsonl"), "--out", p(d, "stats.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = nlohmann::json::parse(read_file(d / "stats.json"));
  EXPECT_EQ(stats["sources"].size(), 5u);
  EXPECT_TRUE(std::filesystem::exists(d / "stats.csv"));
  EXPECT_NE(r.out.find("web"), std::string::npos);
}

TEST(Pipeline, ResumeReproducesUninterruptedRun) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 40, 3);
  ASSERT_EQ(run_cli({"schedule", "--corpus", p(d, "corpus.jsonl"), "--out", p(d, "s.jsonl")}).code, 0);
  const std::vector<std::string> base = {"annotate", "--corpus", p(d, "corpus.jsonl"), "--schedule", p(d, "s.jsonl"),
                                         "--backend", "mock", "--task", "compare"};
  auto full = base;
  full.insert(full.end(), {"--out", p(d, "full.jsonl")});
  ASSERT_EQ(run_cli(full).code, 0);

  auto part = base;
  part.insert(part.end(), {"--out", p(d, "part.jsonl"), "--limit", "50"});
  ASSERT_EQ(run_cli(part).code, 0);
  EXPECT_EQ(read_lines(d / "part.jsonl").size(), 50u);
  EXPECT_FALSE(read_sidecar(d / "part.jsonl").has_value());

  // Simulate a crash that cut the last line in half.
  auto text = read_file(d / "part.jsonl");
  text.resize(text.size() - 20);
  write_file(d / "part.jsonl", text);

  part.resize(part.size() - 2);
  ASSERT_EQ(run_cli(part).code, 0);
  EXPECT_EQ(read_file(d / "part.jsonl"), read_file(d / "full.jsonl"));
  std::set<std::string> ids;
  for (const auto& r : read_lines(d / "part.jsonl")) EXPECT_TRUE(ids.insert(r.at("request_id").get<std::string>()).second);
  EXPECT_EQ(read_sidecar(d / "part.jsonl")->stage, "annotate:compare");
}

TEST(Pipeline, EditSkipsDocumentsOutsideLengthWindow) {
  TempDir d;
  std::string long_text;
  for (int i = 0; i < 60; ++i) long_text += "word" + std::to_string(i) + (i % 10 == 9 ? ". " : " ");
  write_file(d / "c.jsonl", nlohmann::json{{"id", "short"}, {"text", "only ten tokens in this short text right here ok"}}.dump() +
                                "\n" + nlohmann::json{{"id", "long"}, {"text", long_text}}.dump() + "\n");
  const auto r = run_cli({"annotate", "--corpus", p(d, "c.jsonl"), "--backend", "mock", "--task", "edit", "--out", p(d, "e.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(d / "e.jsonl");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["id"], "short");
  EXPECT_EQ(lines[0]["skipped"], "length");
  EXPECT_EQ(lines[1]["id"], "long");
  EXPECT_EQ(lines[1]["edited_token_count"], 60);
}

TEST(Pipeline, SummarizeTask) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 5, 2);
  ASSERT_EQ(run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--task", "summarize", "--out", p(d, "s.jsonl")}).code, 0);
  const auto lines = read_lines(d / "s.jsonl");
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_FALSE(lines[0]["summary"].get<std::string>().empty());
}

TEST(Pipeline, StageChecks) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 20, 4);
  ASSERT_EQ(run_cli({"schedule", "--corpus", p(d, "corpus.jsonl"), "--out", p(d, "s.jsonl")}).code, 0);
  // A schedule is not a comparison file.
  const auto wrong = run_cli({"fit", "--comparisons", p(d, "s.jsonl"), "--out", p(d, "r.jsonl")});
  EXPECT_EQ(wrong.code, 2);
  EXPECT_NE(wrong.err.find("StageNotReady"), std::string::npos);
  // Missing upstream artifact.
  const auto missing = run_cli({"fit", "--comparisons", p(d, "nope.jsonl"), "--out", p(d, "r.jsonl")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("StageNotReady"), std::string::npos);
  // Edited after the sidecar was written.
  write_file(d / "s.jsonl", read_file(d / "s.jsonl") + "\n");
  const auto tampered = run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--schedule", p(d, "s.jsonl"), "--task",
                                 "compare", "--out", p(d, "c.jsonl")});
  EXPECT_EQ(tampered.code, 2);
  EXPECT_NE(tampered.err.find("StageNotReady"), std::string::npos);
}

TEST(Pipeline, ScheduleRejectsOtherCorpus) {
  TempDir d;
  fixtures::write_pipeline_corpus(d / "one", 20, 4);
  fixtures::write_pipeline_corpus(d / "two", 20, 5);
  ASSERT_EQ(run_cli({"schedule", "--corpus", (d / "one" / "corpus.jsonl").string(), "--out", p(d, "s.jsonl")}).code, 0);
  const auto r = run_cli({"annotate", "--corpus", (d / "two" / "corpus.jsonl").string(), "--schedule", p(d, "s.jsonl"),
                          "--task", "compare", "--out", p(d, "c.jsonl")});
  EXPECT_EQ(r.code, 2);
}

TEST(Pipeline, ExitCodes) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 20, 6);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"schedule", "--corpus", p(d, "corpus.jsonl"), "--pairs-per-doc", "0", "--out", p(d, "s.jsonl")}).code, 1);
  EXPECT_EQ(run_cli({"schedule", "--corpus", p(d, "absent.jsonl"), "--out", p(d, "s.jsonl")}).code, 2);
  EXPECT_EQ(run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--task", "compare", "--out", p(d, "c.jsonl")}).code, 1);

  ::unsetenv("DECORATE_API_BASE");
  EXPECT_EQ(run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--backend", "remote", "--task", "tag", "--out",
                     p(d, "t.jsonl")})
                .code,
            1);
  // A backend that cannot be reached.
  ::setenv("DECORATE_API_BASE", "http://127.0.0.1:1/v1", 1);
  ::setenv("DECORATE_MODEL", "m", 1);
  ::setenv("DECORATE_MAX_RETRIES", "0", 1);
  const auto unreachable = run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--backend", "remote", "--task", "tag",
                                    "--out", p(d, "t.jsonl")});
  EXPECT_EQ(unreachable.code, 3) << unreachable.err;
  ::unsetenv("DECORATE_API_BASE");
  ::unsetenv("DECORATE_MODEL");
  ::unsetenv("DECORATE_MAX_RETRIES");
}

TEST(Pipeline, FitReportsNonConvergence) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 20, 6);
  ASSERT_EQ(run_cli({"schedule", "--corpus", p(d, "corpus.jsonl"), "--out", p(d, "s.jsonl")}).code, 0);
  ASSERT_EQ(run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--schedule", p(d, "s.jsonl"), "--task", "compare",
                     "--mock-latents", p(d, "latents.jsonl"), "--out", p(d, "c.jsonl")})
                .code,
            0);
  const auto r = run_cli({"fit", "--comparisons", p(d, "c.jsonl"), "--out", p(d, "r.jsonl"), "--max-iter", "2"});
  EXPECT_EQ(r.code, 4);
  const auto report = nlohmann::json::parse(read_file(d / "r.jsonl.report.json"));
  ASSERT_EQ(report.size(), 8u);
  EXPECT_FALSE(report[0]["converged"].get<bool>());
  EXPECT_TRUE(std::filesystem::exists(d / "r.jsonl"));
}

TEST(Pipeline, FitWithoutComparisons) {
  TempDir d;
  write_file(d / "empty.jsonl", "");
  const auto r = run_cli({"fit", "--comparisons", p(d, "empty.jsonl"), "--out", p(d, "r.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NoComparisons"), std::string::npos);
}

TEST(Pipeline, StatsEmptySource) {
  TempDir d;
  fixtures::write_pipeline_corpus(d.path(), 10, 6);
  ASSERT_EQ(run_cli({"annotate", "--corpus", p(d, "corpus.jsonl"), "--task", "tag", "--out", p(d, "t.jsonl")}).code, 0);
  // Tags but no ratings.
  const auto r = run_cli({"stats", "--annotations", p(d, "t.jsonl"), "--corpus", p(d, "corpus.jsonl"), "--out", p(d, "o.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("EmptySource"), std::string::npos);
}

TEST(Pipeline, SkipMalformedCorpusLines) {
  TempDir d;
  write_file(d / "c.jsonl", R"({"id":"a","text":"x y"})" "\n" "{broken\n" R"({"id":"b","text":"z"})" "\n" R"({"id":"c","text":"w"})" "\n");
  EXPECT_EQ(run_cli({"schedule", "--corpus", p(d, "c.jsonl"), "--out", p(d, "s.jsonl")}).code, 2);
  const auto r = run_cli({"--skip-malformed", "schedule", "--corpus", p(d, "c.jsonl"), "--out", p(d, "s.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_schedule(d / "s.jsonl").for_criterion(Criterion::Scarcity).size(), 3u);
}

TEST(Pipeline, SampleMissingEditsNeedsAllowPartial) {
  TempDir d;
  fixtures::PipelineOptions o;
  ASSERT_EQ(fixtures::run_full_pipeline(d.path(), o).code, 0);
  write_file(d / "strict.json", R"({"strategy": "agg_edit", "target_tokens": 1500})");
  const std::vector<std::string> args = {"--config", p(d, "strict.json"), "sample", "--annotations", p(d, "ratings.jsonl"),
                                         "--annotations", p(d, "edits.jsonl"), "--corpus", p(d, "corpus.jsonl"), "--out",
                                         p(d, "strict.jsonl")};
  const auto strict = run_cli(args);
  EXPECT_EQ(strict.code, 2);
  EXPECT_NE(strict.err.find("MissingEditedText"), std::string::npos);
  auto partial = args;
  partial.insert(partial.begin(), "--allow-partial");
  EXPECT_EQ(run_cli(partial).code, 0);
}

}  // namespace
}  // namespace decorate
