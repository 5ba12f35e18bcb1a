#include "decorate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "decorate/errors.hpp"

namespace decorate {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Aligned columns; the first column is left-aligned, the rest right-aligned.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << r[c];
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// Tag accuracy

void TagAccuracyReport::merge(const TagAccuracyReport& other) {
  n += other.n;
  for (std::size_t k = 0; k < 3; ++k) hits[k] += other.hits[k];
  level1_acc = ratio(hits[0], n);
  level2_acc = ratio(hits[1], n);
  level3_acc = ratio(hits[2], n);
}

TagAccuracyReport tag_accuracy(const std::map<std::string, TagPath>& predictions,
                               const std::map<std::string, TagPath>& gold) {
  if (gold.empty()) raise(Errc::InvalidArgument, "tag accuracy needs at least one item");
  if (predictions.size() != gold.size()) raise(Errc::IdMismatch, "predictions and gold cover different ids");
  TagAccuracyReport report;
  auto p = predictions.begin();
  for (const auto& [id, g] : gold) {
    if (p->first != id) raise(Errc::IdMismatch, "id '" + id + "' is missing from the predictions");
    const auto& pred = p->second;
    ++p;
    ++report.n;
    if (pred.level1 != g.level1) continue;
    ++report.hits[0];
    if (pred.level2 != g.level2) continue;
    ++report.hits[1];
    if (pred.level3 != g.level3) continue;
    ++report.hits[2];
  }
  report.merge({});
  return report;
}

nlohmann::json to_json(const TagAccuracyReport& r) {
  return {{"n", r.n},
          {"hits", {{"level1", r.hits[0]}, {"level2", r.hits[1]}, {"level3", r.hits[2]}}},
          {"level1_acc", r.level1_acc},
          {"level2_acc", r.level2_acc},
          {"level3_acc", r.level3_acc}};
}

std::string to_text_table(const TagAccuracyReport& r) {
  return render_table({{"level", "hits", "n", "accuracy"},
                       {"1", std::to_string(r.hits[0]), std::to_string(r.n), fixed(100.0 * r.level1_acc, 1)},
                       {"2", std::to_string(r.hits[1]), std::to_string(r.n), fixed(100.0 * r.level2_acc, 1)},
                       {"3", std::to_string(r.hits[2]), std::to_string(r.n), fixed(100.0 * r.level3_acc, 1)}});
}

// ---------------------------------------------------------------------------
// Edit preferences

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "win") return Verdict::Win;
  if (text == "lose") return Verdict::Lose;
  if (text == "tie") return Verdict::Tie;
  return std::nullopt;
}

double PreferenceTally::win_rate() const { return ratio(win, n()); }
double PreferenceTally::lose_rate() const { return ratio(lose, n()); }
double PreferenceTally::tie_rate() const { return ratio(tie, n()); }

const std::array<std::string_view, 6>& standard_preference_metrics() {
  static constexpr std::array<std::string_view, 6> names = {
      "Enhanced Clarity",  "Text Fluency",          "Term Precision",
      "Logical Coherence", "Information Precision", "Information Completeness",
  };
  return names;
}

bool is_standard_preference_metric(std::string_view name) {
  const auto& names = standard_preference_metrics();
  return std::find(names.begin(), names.end(), name) != names.end();
}

PreferenceReport aggregate_preferences(std::span<const PreferenceJudgment> judgments) {
  if (judgments.empty()) raise(Errc::InvalidArgument, "no preference judgments");
  PreferenceReport report;
  for (const auto& j : judgments) {
    auto& t = report.metrics[j.metric];
    switch (j.verdict) {
      case Verdict::Win: ++t.win; break;
      case Verdict::Lose: ++t.lose; break;
      case Verdict::Tie: ++t.tie; break;
    }
  }
  return report;
}

nlohmann::json to_json(const PreferenceReport& report) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, t] : report.metrics) {
    j[name] = {{"n", t.n()},          {"win", t.win},           {"lose", t.lose},          {"tie", t.tie},
               {"win_rate", t.win_rate()}, {"lose_rate", t.lose_rate()}, {"tie_rate", t.tie_rate()}};
  }
  return j;
}

std::string to_text_table(const PreferenceReport& report) {
  std::vector<std::vector<std::string>> rows{{"metric", "n", "win", "lose", "tie"}};
  for (const auto& [name, t] : report.metrics) {
    rows.push_back({name, std::to_string(t.n()), fixed(t.win_rate(), 3), fixed(t.lose_rate(), 3),
                    fixed(t.tie_rate(), 3)});
  }
  return render_table(rows);
}

// ---------------------------------------------------------------------------
// Dataset summary

DatasetSummary dataset_summary(std::span<const AnnotatedDocument> annotations, const TagTaxonomy& taxonomy) {
  if (annotations.empty()) raise(Errc::EmptySource, "no annotated documents");
  std::map<std::string, std::vector<const AnnotatedDocument*>> by_source;
  for (const auto& a : annotations) by_source[a.doc.source].push_back(&a);

  DatasetSummary summary;
  for (const auto& a : annotations) summary.total_tokens += a.doc.token_count;

  for (const auto& [source, docs] : by_source) {
    SourceSummary s;
    s.source = source;
    s.documents = docs.size();
    std::uint64_t rated = 0;
    TagCounts counts;
    for (const auto* a : docs) {
      s.tokens += a->doc.token_count;
      if (a->ratings) {
        ++rated;
        for (std::size_t t = 0; t < kCriterionCount; ++t) s.mean_rating[t] += a->ratings->values()[t];
      }
      if (a->tags) {
        taxonomy.validate(*a->tags);
        counts.add(*a->tags);
      }
    }
    const std::string label = source.empty() ? "(unnamed)" : source;
    if (rated == 0 || counts.total == 0) {
      raise(Errc::EmptySource, "source '" + label + "' has no rated and tagged documents");
    }
    for (auto& m : s.mean_rating) m /= static_cast<double>(rated);
    s.level1_cross_entropy = tag_cross_entropy(tag_distribution(counts, 1), taxonomy, 1);
    s.token_share = ratio(s.tokens, summary.total_tokens);
    summary.sources.push_back(std::move(s));
  }
  return summary;
}

std::string to_csv(const DatasetSummary& summary) {
  std::ostringstream out;
  out << "source,documents,tokens,token_share";
  for (auto c : canonical_criterion_order()) out << ",mean_" << criterion_id(c);
  out << ",level1_cross_entropy\n";
  out << std::setprecision(10);
  for (const auto& s : summary.sources) {
    out << csv_field(s.source) << ',' << s.documents << ',' << s.tokens << ',' << s.token_share;
    for (double m : s.mean_rating) out << ',' << m;
    out << ',' << s.level1_cross_entropy << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const DatasetSummary& summary) {
  auto sources = nlohmann::json::array();
  for (const auto& s : summary.sources) {
    nlohmann::json means = nlohmann::json::object();
    for (auto c : canonical_criterion_order()) means[std::string(criterion_id(c))] = s.mean_rating[criterion_index(c)];
    sources.push_back({{"source", s.source},
                       {"documents", s.documents},
                       {"tokens", s.tokens},
                       {"token_share", s.token_share},
                       {"mean_rating", means},
                       {"level1_cross_entropy", s.level1_cross_entropy}});
  }
  return {{"total_tokens", summary.total_tokens}, {"sources", sources}};
}

std::string to_text_table(const DatasetSummary& summary) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"source", "docs", "tokens", "share"};
  for (auto c : canonical_criterion_order()) header.emplace_back(criterion_id(c));
  header.emplace_back("tag_xent");
  rows.push_back(std::move(header));
  for (const auto& s : summary.sources) {
    std::vector<std::string> r{s.source.empty() ? "(unnamed)" : s.source, std::to_string(s.documents),
                               std::to_string(s.tokens), fixed(s.token_share, 4)};
    for (double m : s.mean_rating) r.push_back(fixed(m, 2));
    r.push_back(fixed(s.level1_cross_entropy, 4));
    rows.push_back(std::move(r));
  }
  return render_table(rows);
}

// ---------------------------------------------------------------------------
// Perplexity histograms

std::size_t histogram_bin(double value, std::span<const double> boundaries) {
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), value) - boundaries.begin());
}

PerplexityReport perplexity_report(std::span<const AnnotatedDocument> docs, const TextScorer& scorer,
                                   std::span<const double> boundaries) {
  if (!scorer) raise(Errc::InvalidArgument, "no scorer given");
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    if (!std::isfinite(boundaries[k]) || (k > 0 && !(boundaries[k] > boundaries[k - 1]))) {
      raise(Errc::InvalidArgument, "bucket boundaries must be finite and strictly increasing");
    }
  }
  PerplexityReport report;
  report.boundaries.assign(boundaries.begin(), boundaries.end());
  report.original.assign(boundaries.size() + 1, 0);
  report.edited.assign(boundaries.size() + 1, 0);

  const auto score = [&](std::string_view text, const std::string& id, const char* which) {
    double v = 0.0;
    try {
      v = scorer(text);
    } catch (const std::exception& e) {
      raise(Errc::ScorerFailure, "scorer failed on " + std::string(which) + " text of '" + id + "': " + e.what());
    }
    if (!std::isfinite(v) || !(v > 0.0)) {
      raise(Errc::ScorerFailure, "scorer returned " + std::to_string(v) + " for " + which + " text of '" + id + "'");
    }
    return v;
  };

  for (const auto& a : docs) {
    ++report.original[histogram_bin(score(a.doc.text, a.doc.id, "original"), boundaries)];
    if (a.edited_text) ++report.edited[histogram_bin(score(*a.edited_text, a.doc.id, "edited"), boundaries)];
  }
  return report;
}

nlohmann::json to_json(const PerplexityReport& report) {
  return {{"boundaries", report.boundaries}, {"original", report.original}, {"edited", report.edited}};
}

}  // namespace decorate
