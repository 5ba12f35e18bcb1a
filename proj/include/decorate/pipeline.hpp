#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decorate/annotator.hpp"
#include "decorate/rating.hpp"

namespace decorate {

// Exit codes of the command line tool.
enum class ExitCode : int { Ok = 0, Usage = 1, Data = 2, Backend = 3, NonConvergence = 4 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
  std::optional<std::filesystem::path> config;
  bool skip_malformed = false;
  bool allow_partial = false;
  std::ostream* log = nullptr;  // warnings; std::cerr when null
};

// ---------------------------------------------------------------------------
// Stage sidecars
//
// Every artifact <out> gets <out>.meta.json recording the stage that wrote
// it, a fingerprint of the command configuration, the artifact's own digest
// and the digests of its inputs by role.

struct StageMeta {
  std::string stage;
  std::string config_fingerprint;
  std::string output_sha256;
  std::map<std::string, std::string> inputs;  // role -> sha256
};

std::filesystem::path sidecar_path(const std::filesystem::path& artifact);
void write_sidecar(const std::filesystem::path& artifact, StageMeta meta);
std::optional<StageMeta> read_sidecar(const std::filesystem::path& artifact);

// Throws StageNotReady when the sidecar names another stage, the artifact
// changed since it was written, or a recorded input role disagrees with
// `inputs`. A missing sidecar only logs a warning.
void require_stage(const std::filesystem::path& artifact, const std::vector<std::string>& accepted_stages,
                   const std::map<std::string, std::string>& inputs, std::ostream& log);

// ---------------------------------------------------------------------------
// Schedules on disk

nlohmann::json schedule_header_json(const PairSchedule& schedule, const std::string& corpus_fingerprint);
void save_schedule(const PairSchedule& schedule, const std::string& corpus_fingerprint,
                   const std::filesystem::path& path);
PairSchedule load_schedule(const std::filesystem::path& path);

// Request id of one comparison, e.g. "EducationalValue:doc1:doc7".
std::string comparison_request_id(Criterion criterion, const std::string& doc_a, const std::string& doc_b);

// Mock latents file: one {"id": ..., "latent": {criterion: value}} per line.
std::map<std::string, std::array<double, kCriterionCount>> load_mock_latents(const std::filesystem::path& path);
void save_mock_latents(const std::map<std::string, std::array<double, kCriterionCount>>& latents,
                       const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Commands. Each throws decorate::Error on failure and returns the exit code
// for outcomes that are not errors.

struct ScheduleArgs {
  std::filesystem::path corpus;
  std::uint32_t pairs_per_doc = 4;
  std::filesystem::path out;
};
ExitCode cmd_schedule(const GlobalOptions& global, const ScheduleArgs& args);

enum class AnnotateTask { Compare, Tag, Edit, Summarize };
std::optional<AnnotateTask> parse_annotate_task(std::string_view name);

struct AnnotateArgs {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> schedule;  // required for compare
  std::string backend = "mock";
  AnnotateTask task = AnnotateTask::Compare;
  std::filesystem::path out;
  std::optional<std::filesystem::path> mock_latents;
  std::optional<std::filesystem::path> taxonomy;
  // Stop after this many new requests, leaving the artifact incomplete.
  std::optional<std::size_t> limit;
};

// Output lines follow the request order, so an interrupted and resumed run
// writes the same bytes as an uninterrupted one.
ExitCode cmd_annotate(const GlobalOptions& global, const AnnotateArgs& args);

struct FitArgs {
  std::vector<std::filesystem::path> comparisons;
  std::filesystem::path out;
  std::optional<std::filesystem::path> report;  // defaults to <out>.report.json
  BtOptions options;
};
ExitCode cmd_fit(const GlobalOptions& global, const FitArgs& args);

struct SampleArgs {
  std::vector<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> corpus;
  std::filesystem::path out;
};
// The strategy config comes from GlobalOptions::config; --seed overrides its seed.
ExitCode cmd_sample(const GlobalOptions& global, const SampleArgs& args);

struct StatsArgs {
  std::vector<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> taxonomy;
  std::filesystem::path out;  // JSON; CSV is written next to it
};
ExitCode cmd_stats(const GlobalOptions& global, const StatsArgs& args, std::ostream& out);

// Parses argv and dispatches; errors are reported on err and mapped to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decorate
