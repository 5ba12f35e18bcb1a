#include "decorate/core_types.hpp"

#include <cmath>

#include "decorate/errors.hpp"

namespace decorate {

namespace {

struct CriterionNames {
  std::string_view id;
  std::string_view label;
};

constexpr std::array<CriterionNames, kCriterionCount> kNames{{
    {"EducationalValue", "Educational Value"},
    {"Expertise", "Expertise"},
    {"FactAndTrivia", "Fact and Trivia"},
    {"ReasoningLevel", "Reasoning Level"},
    {"Scarcity", "Scarcity"},
    {"StructuralFormat", "Structural Format"},
    {"StoryLikeness", "Story-likeness"},
    {"Subjectivity", "Subjectivity"},
}};

}  // namespace

const std::array<Criterion, kCriterionCount>& canonical_criterion_order() {
  static constexpr std::array<Criterion, kCriterionCount> kOrder{
      Criterion::EducationalValue, Criterion::Expertise,        Criterion::FactAndTrivia,
      Criterion::ReasoningLevel,   Criterion::Scarcity,         Criterion::StructuralFormat,
      Criterion::StoryLikeness,    Criterion::Subjectivity,
  };
  return kOrder;
}

std::string_view criterion_id(Criterion c) { return kNames[criterion_index(c)].id; }

std::string_view criterion_label(Criterion c) { return kNames[criterion_index(c)].label; }

std::optional<Criterion> parse_criterion(std::string_view text) {
  for (Criterion c : canonical_criterion_order()) {
    if (text == criterion_id(c) || text == criterion_label(c)) return c;
  }
  return std::nullopt;
}

RatingVector RatingVector::from_array(const std::array<double, kCriterionCount>& scores) {
  for (Criterion c : canonical_criterion_order()) {
    const double v = scores[criterion_index(c)];
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
      raise(Errc::InvalidArgument, "rating for " + std::string(criterion_id(c)) + " outside [0,100]");
    }
  }
  RatingVector out;
  out.scores_ = scores;
  return out;
}

RatingVector RatingVector::from_map(const std::map<Criterion, double>& scores) {
  std::array<double, kCriterionCount> values{};
  for (Criterion c : canonical_criterion_order()) {
    auto it = scores.find(c);
    if (it == scores.end()) {
      raise(Errc::InvalidArgument, "rating vector missing criterion " + std::string(criterion_id(c)));
    }
    values[criterion_index(c)] = it->second;
  }
  return from_array(values);
}

void validate(const ComparisonRecord& record) {
  if (record.doc_a.empty() || record.doc_b.empty()) {
    raise(Errc::InvalidArgument, "comparison record with empty document id");
  }
  if (record.doc_a == record.doc_b) {
    raise(Errc::InvalidArgument, "comparison of document '" + record.doc_a + "' with itself");
  }
}

std::string join_tag_prefix(const TagPath& path, int level) {
  std::string out = path.level1;
  if (level >= 2) {
    out += kTagSeparator;
    out += path.level2;
  }
  if (level >= 3) {
    out += kTagSeparator;
    out += path.level3;
  }
  return out;
}

void validate(const AnnotatedDocument& annotated) {
  if (annotated.edited_text.has_value() != annotated.edited_token_count.has_value()) {
    raise(Errc::InvalidArgument,
          "document '" + annotated.doc.id + "': edited_token_count must accompany edited text");
  }
}

}  // namespace decorate
