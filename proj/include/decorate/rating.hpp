#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"

namespace decorate {

struct BtOptions {
  double prior = 0.1;  // virtual wins and losses per document against the reference opponent
  double tol = 1e-8;   // on max |change in log-strength| per iteration
  int max_iter = 10000;
  bool record_trace = false;
};

struct BtFit {
  Criterion criterion = Criterion::EducationalValue;
  std::map<std::string, double> strengths;  // log-strengths, mean 0
  int iterations = 0;
  double final_delta = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;  // per iteration when requested

  // Model probability that doc a beats doc b.
  double win_probability(const std::string& a, const std::string& b) const;
};

// Regularized Bradley-Terry fit by minorization-maximization.
//
// Each document plays `prior` virtual wins and `prior` virtual losses against
// a fixed reference opponent of strength 1, which keeps the maximizer finite
// and unique even for all-win documents or disconnected graphs. Records must
// all carry the same criterion. Throws NoComparisons and InvalidArgument.
// A fit that hits max_iter is returned with converged = false.
BtFit fit_bradley_terry(std::span<const ComparisonRecord> comparisons, const BtOptions& options = {});

// The regularized objective for given log-strengths (before centering).
double bt_log_likelihood(std::span<const ComparisonRecord> comparisons, const std::map<std::string, double>& log_strengths,
                         double prior);

nlohmann::json fit_report_json(const BtFit& fit);

struct NormalizationResult {
  std::map<std::string, double> scores;
  std::string tie_break = "by id, ascending";
};

// Ranks ascending by (strength, id) and maps rank r to 100 r / (n - 1). A
// single document scores 50.
NormalizationResult normalize_scores(const BtFit& fit);
NormalizationResult normalize_scores(const std::map<std::string, double>& strengths);

// Average ranks starting at 1.
std::vector<double> fractional_ranks(std::span<const double> values);

// Pearson correlation of fractional ranks. Throws LengthMismatch and
// DegenerateInput (fewer than 2 values, non-finite values or constant ranks).
double spearman(std::span<const double> x, std::span<const double> y);

using CorrelationMatrix = std::array<std::array<double, kCriterionCount>, kCriterionCount>;

// Entry (s, t) is the Spearman correlation between criteria s and t across
// the given documents. Throws TooFewDocuments below 2 vectors.
CorrelationMatrix criterion_correlation_matrix(std::span<const RatingVector> ratings);

}  // namespace decorate
