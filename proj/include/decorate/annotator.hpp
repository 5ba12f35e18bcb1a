#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "decorate/core_types.hpp"
#include "decorate/taxonomy.hpp"

namespace decorate {

struct CompareResult {
  Winner winner = Winner::A;
  std::string rationale;
};

struct TagChoice {
  std::string tag;
  std::string explanation;
};

struct SubTagChoice {
  std::string level2;
  std::string level3;
  std::string explanation;
};

// A teacher that judges pairs, assigns tags, summarizes and rewrites text.
// Implementations must tolerate concurrent calls.
//
// Backends return what the judge said; the free functions below validate
// replies against the taxonomy and the gateway contracts.
class AnnotatorBackend {
 public:
  virtual ~AnnotatorBackend() = default;

  virtual std::string judge() const = 0;

  virtual CompareResult compare_texts(Criterion criterion, std::string_view text_1, std::string_view text_2) = 0;
  virtual TagChoice first_level_tag(std::string_view text, const TagTaxonomy& taxonomy) = 0;
  virtual SubTagChoice sub_level_tags(std::string_view text, const TaxonomyNode& level1) = 0;
  virtual std::string summarize_text(std::string_view text) = 0;
  virtual std::string edit_text(std::string_view text) = 0;
};

// ---------------------------------------------------------------------------
// Gateway operations

// Throws InvalidArgument when either text is empty.
CompareResult compare(AnnotatorBackend& backend, Criterion criterion, std::string_view text_a,
                      std::string_view text_b);

struct PresentedComparison {
  Winner winner = Winner::A;  // in terms of (text_a, text_b), after un-swapping
  std::string rationale;
  bool swapped = false;       // text_b was shown as "Text 1"
};

// Shows the pair in a seeded random order and maps the parsed choice back.
// The order depends only on (seed, criterion, request_key).
PresentedComparison compare_randomized(AnnotatorBackend& backend, Criterion criterion, std::string_view text_a,
                                       std::string_view text_b, std::uint64_t seed, std::string_view request_key);

// Throws UnknownTag when the reply names a tag outside the first level.
TagChoice assign_first_level_tag(AnnotatorBackend& backend, std::string_view text, const TagTaxonomy& taxonomy);

// Throws UnknownTag for names absent under level1 and PathMismatch when the
// third-level tag belongs to a different second-level branch.
SubTagChoice assign_sub_tags(AnnotatorBackend& backend, std::string_view text, std::string_view level1,
                             const TagTaxonomy& taxonomy);

// Both steps; returns a path that validates against the taxonomy.
TagPath assign_tag_path(AnnotatorBackend& backend, std::string_view text, const TagTaxonomy& taxonomy);

// Throws InvalidArgument on empty text and EmptyReply on an empty summary.
std::string summarize(AnnotatorBackend& backend, std::string_view text);

// Throws InvalidArgument on empty text and EmptyReply on an empty rewrite.
std::string edit(AnnotatorBackend& backend, std::string_view text);

// Token-length window for documents sent to editing.
inline constexpr std::uint64_t kMinEditTokens = 50;
inline constexpr std::uint64_t kMaxEditTokens = 2048;

constexpr bool eligible_for_editing(std::uint64_t token_count) {
  return token_count >= kMinEditTokens && token_count <= kMaxEditTokens;
}

// ---------------------------------------------------------------------------
// Pair scheduling

struct PairSchedule {
  // Canonical criterion order; each list holds unordered pairs (a, b).
  std::array<std::vector<std::pair<std::string, std::string>>, kCriterionCount> pairs;
  std::uint32_t pairs_per_doc = 1;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>>& for_criterion(Criterion c) const {
    return pairs[criterion_index(c)];
  }
  std::size_t total_pairs() const;

  bool operator==(const PairSchedule&) const = default;
};

// Per criterion: a seeded random ring over all documents (connectivity), then
// seeded random chords until every document takes part in pairs_per_doc pairs
// on average, capped at the complete graph. Throws TooFewDocuments and
// InvalidArgument (pairs_per_doc == 0 or duplicate ids).
PairSchedule schedule_pairs(const std::vector<std::string>& doc_ids, std::uint32_t pairs_per_doc,
                            std::uint64_t seed);

// ---------------------------------------------------------------------------
// Deterministic mock

struct MockConfig {
  // Latent quality per criterion, keyed by document text. Texts not listed
  // get a latent derived from a hash of the text.
  std::unordered_map<std::string, std::array<double, kCriterionCount>> latent_by_text;
  // (keyword, first-level tag). Keywords are matched as whole lowercase word
  // sequences; the tag with most hits wins, ties go to taxonomy order.
  std::vector<std::pair<std::string, std::string>> first_level_keywords;
  std::string judge = "mock";
  std::size_t summary_tokens = 100;

  // first_level_keywords populated with the bundled keyword table.
  static MockConfig with_default_keywords();
};

const std::vector<std::pair<std::string, std::string>>& default_first_level_keywords();

// Pure function of its inputs and config.
//
// compare: higher latent wins, ties go to text 1.
// tags: keyword table for the first level; stem overlap with tag names for
//   the second and third levels; hash of the text when nothing matches.
// summarize: first summary_tokens whitespace tokens.
// edit: reverses sentence order and swaps a fixed set of word pairs. The map
//   is an involution on whitespace-normalized text.
class MockBackend final : public AnnotatorBackend {
 public:
  explicit MockBackend(MockConfig config = MockConfig::with_default_keywords());

  std::string judge() const override { return config_.judge; }

  CompareResult compare_texts(Criterion criterion, std::string_view text_1, std::string_view text_2) override;
  TagChoice first_level_tag(std::string_view text, const TagTaxonomy& taxonomy) override;
  SubTagChoice sub_level_tags(std::string_view text, const TaxonomyNode& level1) override;
  std::string summarize_text(std::string_view text) override;
  std::string edit_text(std::string_view text) override;

  double latent(Criterion criterion, std::string_view text) const;

 private:
  MockConfig config_;
  std::vector<std::pair<std::vector<std::string>, std::string>> keyword_words_;
};

// The mock editing transform, exposed for tests.
std::string mock_edit_transform(std::string_view text);

}  // namespace decorate
