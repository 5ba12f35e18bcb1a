#include "decorate/rating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "decorate/errors.hpp"

namespace decorate {

namespace {

struct PairCounts {
  std::size_t i = 0;
  std::size_t j = 0;
  double wins_i = 0.0;  // i beat j
  double wins_j = 0.0;  // j beat i
};

struct Aggregated {
  std::vector<std::string> ids;  // sorted
  std::vector<PairCounts> pairs;
  std::vector<double> wins;
};

Aggregated aggregate(std::span<const ComparisonRecord> comparisons) {
  if (comparisons.empty()) raise(Errc::NoComparisons, "no comparison records to fit");
  const auto criterion = comparisons.front().criterion;
  Aggregated agg;
  for (const auto& r : comparisons) {
    validate(r);
    if (r.criterion != criterion) raise(Errc::InvalidArgument, "comparisons mix criteria");
    agg.ids.push_back(r.doc_a);
    agg.ids.push_back(r.doc_b);
  }
  std::sort(agg.ids.begin(), agg.ids.end());
  agg.ids.erase(std::unique(agg.ids.begin(), agg.ids.end()), agg.ids.end());

  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t k = 0; k < agg.ids.size(); ++k) index.emplace(agg.ids[k], k);

  std::map<std::pair<std::size_t, std::size_t>, PairCounts> by_pair;
  agg.wins.assign(agg.ids.size(), 0.0);
  for (const auto& r : comparisons) {
    const auto w = index.at(r.winner_id());
    const auto l = index.at(r.loser_id());
    const auto key = std::minmax(w, l);
    auto& pc = by_pair[key];
    pc.i = key.first;
    pc.j = key.second;
    (w == pc.i ? pc.wins_i : pc.wins_j) += 1.0;
    agg.wins[w] += 1.0;
  }
  agg.pairs.reserve(by_pair.size());
  for (const auto& [_, pc] : by_pair) agg.pairs.push_back(pc);
  return agg;
}

double objective(const Aggregated& agg, const std::vector<double>& pi, double prior) {
  double ll = 0.0;
  for (const auto& p : agg.pairs) {
    const double denom = std::log(pi[p.i] + pi[p.j]);
    ll += p.wins_i * (std::log(pi[p.i]) - denom) + p.wins_j * (std::log(pi[p.j]) - denom);
  }
  if (prior > 0.0) {
    for (double s : pi) ll += prior * (std::log(s) - 2.0 * std::log(s + 1.0));
  }
  return ll;
}

}  // namespace

double BtFit::win_probability(const std::string& a, const std::string& b) const {
  const double ta = strengths.at(a);
  const double tb = strengths.at(b);
  return 1.0 / (1.0 + std::exp(tb - ta));
}

BtFit fit_bradley_terry(std::span<const ComparisonRecord> comparisons, const BtOptions& options) {
  if (!(options.prior >= 0.0) || !std::isfinite(options.prior)) raise(Errc::InvalidArgument, "prior must be >= 0");
  if (!(options.tol > 0.0)) raise(Errc::InvalidArgument, "tol must be > 0");
  if (options.max_iter < 1) raise(Errc::InvalidArgument, "max_iter must be >= 1");

  const auto agg = aggregate(comparisons);
  const std::size_t n = agg.ids.size();
  const double p = options.prior;
  if (p == 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      if (agg.wins[k] == 0.0) raise(Errc::DegenerateInput, "'" + agg.ids[k] + "' never wins and no prior is set");
    }
  }

  BtFit fit;
  fit.criterion = comparisons.front().criterion;
  std::vector<double> pi(n, 1.0);
  std::vector<double> denom(n);
  if (options.record_trace) fit.log_likelihood_trace.push_back(objective(agg, pi, p));

  double delta = 0.0;
  int iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    for (std::size_t k = 0; k < n; ++k) denom[k] = 2.0 * p / (pi[k] + 1.0);
    for (const auto& pc : agg.pairs) {
      const double share = (pc.wins_i + pc.wins_j) / (pi[pc.i] + pi[pc.j]);
      denom[pc.i] += share;
      denom[pc.j] += share;
    }
    std::vector<double> next(n);
    for (std::size_t k = 0; k < n; ++k) next[k] = (agg.wins[k] + p) / denom[k];
    if (p == 0.0) {
      // No reference opponent: pin the geometric mean to 1.
      double mean_log = 0.0;
      for (double s : next) mean_log += std::log(s);
      mean_log /= static_cast<double>(n);
      for (double& s : next) s /= std::exp(mean_log);
    }
    delta = 0.0;
    for (std::size_t k = 0; k < n; ++k) delta = std::max(delta, std::abs(std::log(next[k]) - std::log(pi[k])));
    pi = std::move(next);
    if (options.record_trace) fit.log_likelihood_trace.push_back(objective(agg, pi, p));
    if (delta < options.tol) break;
  }

  fit.iterations = iter;
  fit.final_delta = delta;
  fit.converged = delta < options.tol;
  fit.log_likelihood = objective(agg, pi, p);

  double mean_log = 0.0;
  for (double s : pi) mean_log += std::log(s);
  mean_log /= static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) fit.strengths.emplace(agg.ids[k], std::log(pi[k]) - mean_log);
  return fit;
}

double bt_log_likelihood(std::span<const ComparisonRecord> comparisons, const std::map<std::string, double>& log_strengths,
                         double prior) {
  const auto agg = aggregate(comparisons);
  std::vector<double> pi(agg.ids.size());
  for (std::size_t k = 0; k < agg.ids.size(); ++k) {
    auto it = log_strengths.find(agg.ids[k]);
    if (it == log_strengths.end()) raise(Errc::InvalidArgument, "no strength for '" + agg.ids[k] + "'");
    pi[k] = std::exp(it->second);
  }
  return objective(agg, pi, prior);
}

nlohmann::json fit_report_json(const BtFit& fit) {
  return {{"criterion", std::string(criterion_id(fit.criterion))},
          {"iterations", fit.iterations},
          {"final_delta", fit.final_delta},
          {"log_likelihood", fit.log_likelihood}};
}

NormalizationResult normalize_scores(const std::map<std::string, double>& strengths) {
  std::vector<std::pair<double, const std::string*>> order;
  order.reserve(strengths.size());
  for (const auto& [id, s] : strengths) order.emplace_back(s, &id);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return *a.second < *b.second;
  });
  NormalizationResult out;
  const std::size_t n = order.size();
  for (std::size_t r = 0; r < n; ++r) {
    const double score = n == 1 ? 50.0 : 100.0 * static_cast<double>(r) / static_cast<double>(n - 1);
    out.scores.emplace(*order[r].second, score);
  }
  return out;
}

NormalizationResult normalize_scores(const BtFit& fit) { return normalize_scores(fit.strengths); }

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    raise(Errc::LengthMismatch, "spearman inputs differ in length: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
  }
  if (x.size() < 2) raise(Errc::DegenerateInput, "spearman needs at least 2 values");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    raise(Errc::DegenerateInput, "spearman inputs must be finite");
  }
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // mean of fractional ranks is exact
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    const double dx = rx[k] - mean;
    const double dy = ry[k] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) raise(Errc::DegenerateInput, "spearman input has constant ranks");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix criterion_correlation_matrix(std::span<const RatingVector> ratings) {
  if (ratings.size() < 2) raise(Errc::TooFewDocuments, "correlation matrix needs at least 2 rated documents");
  std::array<std::vector<double>, kCriterionCount> columns;
  for (auto& c : columns) c.reserve(ratings.size());
  for (const auto& r : ratings)
    for (std::size_t t = 0; t < kCriterionCount; ++t) columns[t].push_back(r.values()[t]);

  CorrelationMatrix m{};
  for (std::size_t s = 0; s < kCriterionCount; ++s) {
    m[s][s] = 1.0;
    for (std::size_t t = s + 1; t < kCriterionCount; ++t) {
      m[s][t] = m[t][s] = spearman(columns[s], columns[t]);
    }
  }
  return m;
}

}  // namespace decorate
