#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"

namespace decorate {

struct TaxonomyNode {
  std::string name;
  std::vector<TaxonomyNode> children;

  bool operator==(const TaxonomyNode&) const = default;
};

// Immutable three-level tag tree.
//
// Tags below the first level are only unique among siblings, so a tag at
// level 2 or 3 is identified by its joined prefix ("L1 > L2 > L3").
class TagTaxonomy {
 public:
  // Validates depth, non-empty subtrees and sibling uniqueness. Throws
  // WrongDepth or DuplicateSibling.
  explicit TagTaxonomy(std::vector<TaxonomyNode> roots);

  const std::vector<TaxonomyNode>& roots() const { return roots_; }

  // Number of tags at levels 1, 2 and 3.
  std::array<std::size_t, 3> level_counts() const;

  bool has_level1(std::string_view level1) const;
  // nullptr when absent.
  const TaxonomyNode* find_level1(std::string_view level1) const;
  const TaxonomyNode* find_level2(std::string_view level1, std::string_view level2) const;

  bool contains(const TagPath& path) const;
  // Throws InvalidTagPath naming the first level that fails to resolve.
  void validate(const TagPath& path) const;

  // Joined keys of every tag at the given level, in tree order.
  std::vector<std::string> tag_keys(int level) const;
  std::vector<TagPath> leaf_paths() const;

  bool operator==(const TagTaxonomy& other) const { return roots_ == other.roots_; }

 private:
  std::vector<TaxonomyNode> roots_;
  std::unordered_map<std::string, std::size_t> level1_index_;
};

// The 21 first-level categories, in canonical order.
const std::array<std::string_view, 21>& default_first_level_tags();

// Parses the root-list JSON schema. Throws SchemaError, WrongDepth,
// DuplicateSibling.
TagTaxonomy taxonomy_from_json(const nlohmann::json& j);
nlohmann::json taxonomy_to_json(const TagTaxonomy& taxonomy);

TagTaxonomy load_taxonomy(const std::filesystem::path& path);
void save_taxonomy(const TagTaxonomy& taxonomy, const std::filesystem::path& path);

// Bundled taxonomy: the 21 first-level categories with a small curated set of
// second- and third-level tags.
const TagTaxonomy& default_taxonomy();

// Instance counts at every node of the tree.
struct TagCounts {
  std::map<std::string, std::uint64_t> level1;
  std::map<std::pair<std::string, std::string>, std::uint64_t> level2;
  std::map<TagPath, std::uint64_t> level3;
  std::uint64_t total = 0;
  std::uint64_t untagged = 0;

  void add(const TagPath& path, std::uint64_t n = 1);
  // Associative merge of shard-local counts.
  void merge(const TagCounts& other);

  std::uint64_t count(std::string_view level1) const;
  std::uint64_t count(std::string_view level1, std::string_view level2) const;
  std::uint64_t count(const TagPath& path) const;

  // True when every parent equals the sum of its children and total equals
  // the level-1 sum.
  bool consistent() const;

  bool operator==(const TagCounts&) const = default;
};

// Throws InvalidTagPath naming the offending document.
TagCounts count_tags(std::span<const AnnotatedDocument> annotations, const TagTaxonomy& taxonomy);

// Proportions keyed by joined tag prefix. Throws EmptyCounts.
std::map<std::string, double> tag_distribution(const TagCounts& counts, int level);

inline constexpr double kDefaultCrossEntropyEpsilon = 1e-9;

// H(u, q) = -sum_a u(a) ln max(q(a), epsilon), with u uniform over every tag of
// the taxonomy at the given level. Throws InvalidDistribution.
double tag_cross_entropy(const std::map<std::string, double>& observed, const TagTaxonomy& taxonomy,
                         int level, double epsilon = kDefaultCrossEntropyEpsilon);

}  // namespace decorate
