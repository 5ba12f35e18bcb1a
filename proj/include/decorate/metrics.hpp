#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"
#include "decorate/taxonomy.hpp"

namespace decorate {

// ---------------------------------------------------------------------------
// Tag accuracy

// Hierarchical: a level-k hit requires levels 1..k to match.
struct TagAccuracyReport {
  std::uint64_t n = 0;
  std::array<std::uint64_t, 3> hits{};
  double level1_acc = 0.0;
  double level2_acc = 0.0;
  double level3_acc = 0.0;

  // Associative merge of shard-local reports.
  void merge(const TagAccuracyReport& other);
};

// Throws IdMismatch (different id sets) and InvalidArgument (empty).
TagAccuracyReport tag_accuracy(const std::map<std::string, TagPath>& predictions,
                               const std::map<std::string, TagPath>& gold);

nlohmann::json to_json(const TagAccuracyReport& report);
std::string to_text_table(const TagAccuracyReport& report);

// ---------------------------------------------------------------------------
// Edit preferences

enum class Verdict { Win, Lose, Tie };

std::optional<Verdict> parse_verdict(std::string_view text);

struct PreferenceTally {
  std::uint64_t win = 0;
  std::uint64_t lose = 0;
  std::uint64_t tie = 0;

  std::uint64_t n() const { return win + lose + tie; }
  double win_rate() const;
  double lose_rate() const;
  double tie_rate() const;
};

struct PreferenceReport {
  std::map<std::string, PreferenceTally> metrics;
};

// The six standard preference metrics.
const std::array<std::string_view, 6>& standard_preference_metrics();
bool is_standard_preference_metric(std::string_view name);

struct PreferenceJudgment {
  std::string metric;
  Verdict verdict = Verdict::Tie;
};

// Throws InvalidArgument when empty.
PreferenceReport aggregate_preferences(std::span<const PreferenceJudgment> judgments);

nlohmann::json to_json(const PreferenceReport& report);
std::string to_text_table(const PreferenceReport& report);

// ---------------------------------------------------------------------------
// Dataset summary

struct SourceSummary {
  std::string source;
  std::uint64_t documents = 0;
  std::uint64_t tokens = 0;
  double token_share = 0.0;
  std::array<double, kCriterionCount> mean_rating{};
  double level1_cross_entropy = 0.0;
};

struct DatasetSummary {
  std::vector<SourceSummary> sources;  // sorted by source name
  std::uint64_t total_tokens = 0;
};

// Groups by Document::source. Means and cross-entropy use the rated and
// tagged documents of each source. Throws EmptySource.
DatasetSummary dataset_summary(std::span<const AnnotatedDocument> annotations, const TagTaxonomy& taxonomy);

std::string to_csv(const DatasetSummary& summary);
nlohmann::json to_json(const DatasetSummary& summary);
std::string to_text_table(const DatasetSummary& summary);

// ---------------------------------------------------------------------------
// Perplexity histograms

using TextScorer = std::function<double(std::string_view)>;

struct PerplexityReport {
  std::vector<double> boundaries;      // strictly increasing
  std::vector<std::uint64_t> original; // boundaries.size() + 1 bins
  std::vector<std::uint64_t> edited;
};

// Bin k holds values in [boundaries[k-1], boundaries[k]). Throws
// InvalidArgument and ScorerFailure (non-finite or non-positive score, or a
// scorer exception) naming the document.
PerplexityReport perplexity_report(std::span<const AnnotatedDocument> docs, const TextScorer& scorer,
                                   std::span<const double> boundaries);

std::size_t histogram_bin(double value, std::span<const double> boundaries);

nlohmann::json to_json(const PerplexityReport& report);

}  // namespace decorate
