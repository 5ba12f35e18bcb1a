#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace decorate {

// The eight rating criteria. Enumerator order is the canonical order used for
// deterministic tie-breaking everywhere in the library.
enum class Criterion : std::uint8_t {
  EducationalValue,
  Expertise,
  FactAndTrivia,
  ReasoningLevel,
  Scarcity,
  StructuralFormat,
  StoryLikeness,
  Subjectivity,
};

inline constexpr std::size_t kCriterionCount = 8;

const std::array<Criterion, kCriterionCount>& canonical_criterion_order();

constexpr std::size_t criterion_index(Criterion c) { return static_cast<std::size_t>(c); }

// Identifier used in JSON records, e.g. "EducationalValue".
std::string_view criterion_id(Criterion c);
// Human-readable label, e.g. "Educational Value".
std::string_view criterion_label(Criterion c);
// Accepts either the identifier or the label.
std::optional<Criterion> parse_criterion(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  std::string source;
  std::uint64_t token_count = 0;
  std::map<std::string, std::string> metadata;

  bool operator==(const Document&) const = default;
};

// Scores on the uniform 0-100 scale for all eight criteria.
class RatingVector {
 public:
  // Throws InvalidArgument on a missing criterion or a score outside [0,100].
  static RatingVector from_map(const std::map<Criterion, double>& scores);
  static RatingVector from_array(const std::array<double, kCriterionCount>& scores);

  double operator[](Criterion c) const { return scores_[criterion_index(c)]; }
  const std::array<double, kCriterionCount>& values() const { return scores_; }

  bool operator==(const RatingVector&) const = default;

 private:
  RatingVector() = default;
  std::array<double, kCriterionCount> scores_{};
};

enum class Winner : std::uint8_t { A, B };

struct ComparisonRecord {
  Criterion criterion = Criterion::EducationalValue;
  std::string doc_a;
  std::string doc_b;
  Winner winner = Winner::A;
  std::string judge;
  std::optional<std::string> rationale;

  const std::string& winner_id() const { return winner == Winner::A ? doc_a : doc_b; }
  const std::string& loser_id() const { return winner == Winner::A ? doc_b : doc_a; }

  bool operator==(const ComparisonRecord&) const = default;
};

// Throws InvalidArgument when doc_a == doc_b or either id is empty.
void validate(const ComparisonRecord& record);

struct TagPath {
  std::string level1;
  std::string level2;
  std::string level3;

  auto operator<=>(const TagPath&) const = default;
  bool operator==(const TagPath&) const = default;
};

// Separator used when a tag prefix is written as a single string key,
// e.g. "Sports > Team Sports".
inline constexpr std::string_view kTagSeparator = " > ";

std::string join_tag_prefix(const TagPath& path, int level);

struct AnnotatedDocument {
  Document doc;
  std::optional<RatingVector> ratings;
  std::optional<TagPath> tags;
  std::optional<std::string> edited_text;
  std::optional<std::uint64_t> edited_token_count;

  bool operator==(const AnnotatedDocument&) const = default;
};

// Throws InvalidArgument unless edited_token_count is present exactly when
// edited_text is.
void validate(const AnnotatedDocument& annotated);

}  // namespace decorate
