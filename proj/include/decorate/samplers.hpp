#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"
#include "decorate/taxonomy.hpp"

namespace decorate {

using CriterionWeights = std::map<Criterion, double>;
using WeightMap = std::map<std::string, double>;

// 0.2 on the first four criteria, 0.05 on the rest.
CriterionWeights default_criterion_profile();

inline constexpr double kDefaultKeepFraction = 45.0 / 58.5;
inline constexpr double kDefaultEditedFraction = 1.0 / 3.0;

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  std::string id;
  double weight = 0.0;
  std::optional<Criterion> phase;
  bool edited = false;
  std::uint64_t tokens = 0;                  // original text
  std::optional<std::uint64_t> edited_tokens;

  std::uint64_t effective_tokens() const { return edited && edited_tokens ? *edited_tokens : tokens; }
  bool operator==(const ManifestEntry&) const = default;
};

struct SampleManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::uint64_t total_tokens = 0;
  std::string strategy;

  void recompute_total();
  bool operator==(const SampleManifest&) const = default;
};

// Header line followed by one line per entry.
std::string manifest_to_jsonl(const SampleManifest& manifest);
SampleManifest manifest_from_jsonl(std::string_view text);
void save_sample_manifest(const SampleManifest& manifest, const std::filesystem::path& path);
SampleManifest load_sample_manifest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Rating-based weights

// exp((score - lambda) / tau). Throws NonPositiveTau.
double separate_weight(double score, double lambda, double tau);

struct SeparateConfig {
  CriterionWeights criterion_weights = default_criterion_profile();
  double lambda = 50.0;
  double tau = 50.0;
  std::uint64_t target_tokens = 0;

  // Throws InvalidArgument (weights negative or not summing to 1) and NonPositiveTau.
  void validate() const;
};

// Criterion phases in descending weight, ties in canonical order; zero
// weights are skipped.
std::vector<std::pair<Criterion, double>> phase_order(const CriterionWeights& weights);

// Phase-wise selection. Each phase draws from the documents not yet taken,
// with probability proportional to separate_weight of that criterion's score
// (times extra_weight[id] when given), until the phase budget is reached.
// Throws MissingRatings, BudgetInfeasible, IdMismatch.
SampleManifest sample_separate(std::span<const AnnotatedDocument> corpus, const SeparateConfig& config,
                               std::uint64_t seed, const WeightMap* extra_weight = nullptr);

struct CriterionStats {
  double mu = 0.0;
  double sigma = 0.0;
};

inline constexpr double kSigmaFloor = 1e-9;

// Population mean and standard deviation (floored). Throws TooFewDocuments
// and MissingRatings.
CriterionStats compute_mu_sigma(std::span<const AnnotatedDocument> corpus, Criterion criterion);

struct AggregateConfig {
  CriterionWeights k = default_criterion_profile();
  std::map<Criterion, double> mu;
  std::map<Criterion, double> sigma;
  std::uint64_t target_tokens = 0;

  // Fills mu and sigma for every criterion from the corpus.
  void fit_stats(std::span<const AnnotatedDocument> corpus);
};

// sum_t k_t exp((score_t - mu_t) / sigma_t) over criteria with k_t != 0.
// Throws MissingStats and InvalidArgument (sigma <= 0).
double aggregate_weight(const RatingVector& ratings, const AggregateConfig& config);

// Throws MissingRatings.
WeightMap aggregate_weights(std::span<const AnnotatedDocument> corpus, const AggregateConfig& config);

// ---------------------------------------------------------------------------
// Tag-based weights

struct TagSamplerConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.5;
  std::uint64_t target_tokens = 0;
  // Multipliers keyed by joined tag prefix at any level; every matching
  // prefix of a path applies.
  std::map<std::string, double> overrides;

  // Throws InvalidArgument.
  void validate() const;
};

// Product of the three per-level factors (count^exponent normalized over the
// siblings that occur in the counts), times matching overrides. Throws
// ZeroCountPath.
double tag_weight(const TagPath& path, const TagCounts& counts, const TagSamplerConfig& config);

// Per-document weight tag_weight(path) / count(path), so that the mass of a
// leaf path is tag_weight(path). Throws MissingTags.
WeightMap tag_document_weights(std::span<const AnnotatedDocument> corpus, const TagSamplerConfig& config);

// Elementwise product. Throws IdMismatch.
WeightMap combine_weights(const WeightMap& a, const WeightMap& b);

// ---------------------------------------------------------------------------
// Selection

// Weighted sampling without replacement through exponential keys, stopping
// once the selected tokens reach the target. Throws BudgetInfeasible and
// NonPositiveWeight.
SampleManifest sample_weighted(std::span<const AnnotatedDocument> corpus, const WeightMap& weights,
                               std::uint64_t target_tokens, std::uint64_t seed);

// Random thinning to at most keep_fraction of the manifest tokens, keeping
// the order of surviving entries. Throws InvalidArgument.
SampleManifest oversample_then_truncate(const SampleManifest& manifest, double keep_fraction, std::uint64_t seed);

// Flags floor(fraction * n) seeded-random entries as edited. Throws
// MissingEditedText listing the ids without an edit unless allow_partial,
// which restricts the choice to entries that have one.
SampleManifest mix_edited(const SampleManifest& manifest, std::span<const AnnotatedDocument> annotations,
                          double fraction, std::uint64_t seed, bool allow_partial = false);

// ---------------------------------------------------------------------------
// Strategies

enum class Strategy { Separate, Aggregate, Tag, AggTag, SepTag, AggEdit, AggTagEdit };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct StrategyConfig {
  Strategy strategy = Strategy::Aggregate;
  double lambda = 50.0;
  double tau = 50.0;
  CriterionWeights weights = default_criterion_profile();  // separate phases
  CriterionWeights k = default_criterion_profile();        // aggregate
  std::map<Criterion, double> mu;                          // optional overrides
  std::map<Criterion, double> sigma;
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.5;
  std::map<std::string, double> overrides;
  std::uint64_t target_tokens = 0;
  double keep_fraction = kDefaultKeepFraction;
  double edited_fraction = kDefaultEditedFraction;
  std::uint64_t seed = 0;
  bool allow_partial = false;

  bool uses_ratings() const;
  bool uses_tags() const;
  bool uses_edits() const;
};

// Unknown keys are rejected. Criterion maps accept ids or labels;
// edited_fraction accepts a number or a "p/q" string. Throws InvalidArgument.
StrategyConfig strategy_config_from_json(const nlohmann::json& j);
nlohmann::json strategy_config_to_json(const StrategyConfig& config);
// SHA-256 over the canonical JSON form.
std::string config_fingerprint(const StrategyConfig& config);

// Sample target_tokens, thin by keep_fraction, then mix in edits for the
// *_edit strategies.
SampleManifest run_strategy(std::span<const AnnotatedDocument> corpus, const StrategyConfig& config);

// Tokens per phase, per first-level tag and per source.
std::string manifest_summary(const SampleManifest& manifest, std::span<const AnnotatedDocument> corpus);

}  // namespace decorate
