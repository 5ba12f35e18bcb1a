#include "decorate/taxonomy.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "decorate/assets.hpp"
#include "decorate/errors.hpp"

namespace decorate {

namespace {

using nlohmann::json;

void check_siblings(const std::vector<TaxonomyNode>& nodes, const std::string& parent) {
  std::set<std::string_view> seen;
  for (const auto& node : nodes) {
    if (node.name.empty()) raise(Errc::SchemaError, "empty tag name under '" + parent + "'");
    if (!seen.insert(node.name).second) {
      raise(Errc::DuplicateSibling, "'" + node.name + "' appears twice under '" + parent + "'");
    }
  }
}

TaxonomyNode node_from_json(const json& j, int depth, const std::string& parent) {
  if (!j.is_object()) raise(Errc::SchemaError, "tag node under '" + parent + "' is not an object");
  auto name = j.find("name");
  if (name == j.end() || !name->is_string()) {
    raise(Errc::SchemaError, "tag node under '" + parent + "' lacks a string \"name\"");
  }
  TaxonomyNode node{name->get<std::string>(), {}};
  auto children = j.find("children");
  const bool has_children = children != j.end() && !children->is_null();
  if (has_children && !children->is_array()) {
    raise(Errc::SchemaError, "\"children\" of '" + node.name + "' is not a list");
  }
  if (depth < 3) {
    if (!has_children || children->empty()) {
      raise(Errc::WrongDepth, "level-" + std::to_string(depth) + " tag '" + node.name + "' has no children");
    }
    for (const auto& child : *children) node.children.push_back(node_from_json(child, depth + 1, node.name));
  } else if (has_children && !children->empty()) {
    raise(Errc::WrongDepth, "level-3 tag '" + node.name + "' has children");
  }
  return node;
}

json node_to_json(const TaxonomyNode& node, int depth) {
  json j{{"name", node.name}};
  if (depth < 3) {
    json children = json::array();
    for (const auto& c : node.children) children.push_back(node_to_json(c, depth + 1));
    j["children"] = std::move(children);
  }
  return j;
}

const TaxonomyNode* find_child(const TaxonomyNode& parent, std::string_view name) {
  for (const auto& c : parent.children) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TagTaxonomy::TagTaxonomy(std::vector<TaxonomyNode> roots) : roots_(std::move(roots)) {
  if (roots_.empty()) raise(Errc::WrongDepth, "taxonomy has no first-level tags");
  check_siblings(roots_, "<root>");
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    const auto& l1 = roots_[i];
    if (l1.children.empty()) raise(Errc::WrongDepth, "level-1 tag '" + l1.name + "' has no children");
    check_siblings(l1.children, l1.name);
    for (const auto& l2 : l1.children) {
      if (l2.children.empty()) raise(Errc::WrongDepth, "level-2 tag '" + l2.name + "' has no children");
      check_siblings(l2.children, l2.name);
      for (const auto& l3 : l2.children) {
        if (!l3.children.empty()) raise(Errc::WrongDepth, "level-3 tag '" + l3.name + "' has children");
      }
    }
    level1_index_.emplace(l1.name, i);
  }
}

std::array<std::size_t, 3> TagTaxonomy::level_counts() const {
  std::array<std::size_t, 3> out{roots_.size(), 0, 0};
  for (const auto& l1 : roots_) {
    out[1] += l1.children.size();
    for (const auto& l2 : l1.children) out[2] += l2.children.size();
  }
  return out;
}

bool TagTaxonomy::has_level1(std::string_view level1) const { return find_level1(level1) != nullptr; }

const TaxonomyNode* TagTaxonomy::find_level1(std::string_view level1) const {
  auto it = level1_index_.find(std::string(level1));
  return it == level1_index_.end() ? nullptr : &roots_[it->second];
}

const TaxonomyNode* TagTaxonomy::find_level2(std::string_view level1, std::string_view level2) const {
  const auto* l1 = find_level1(level1);
  return l1 ? find_child(*l1, level2) : nullptr;
}

bool TagTaxonomy::contains(const TagPath& path) const {
  const auto* l2 = find_level2(path.level1, path.level2);
  return l2 != nullptr && find_child(*l2, path.level3) != nullptr;
}

void TagTaxonomy::validate(const TagPath& path) const {
  const auto* l1 = find_level1(path.level1);
  if (l1 == nullptr) raise(Errc::InvalidTagPath, "unknown first-level tag '" + path.level1 + "'");
  const auto* l2 = find_child(*l1, path.level2);
  if (l2 == nullptr) {
    raise(Errc::InvalidTagPath, "'" + path.level2 + "' is not a child of '" + path.level1 + "'");
  }
  if (find_child(*l2, path.level3) == nullptr) {
    raise(Errc::InvalidTagPath, "'" + path.level3 + "' is not a child of '" + path.level2 + "'");
  }
}

std::vector<std::string> TagTaxonomy::tag_keys(int level) const {
  if (level < 1 || level > 3) raise(Errc::InvalidArgument, "tag level must be 1, 2 or 3");
  std::vector<std::string> keys;
  for (const auto& l1 : roots_) {
    if (level == 1) {
      keys.push_back(l1.name);
      continue;
    }
    for (const auto& l2 : l1.children) {
      if (level == 2) {
        keys.push_back(join_tag_prefix({l1.name, l2.name, {}}, 2));
        continue;
      }
      for (const auto& l3 : l2.children) keys.push_back(join_tag_prefix({l1.name, l2.name, l3.name}, 3));
    }
  }
  return keys;
}

std::vector<TagPath> TagTaxonomy::leaf_paths() const {
  std::vector<TagPath> out;
  for (const auto& l1 : roots_) {
    for (const auto& l2 : l1.children) {
      for (const auto& l3 : l2.children) out.push_back({l1.name, l2.name, l3.name});
    }
  }
  return out;
}

const std::array<std::string_view, 21>& default_first_level_tags() {
  static constexpr std::array<std::string_view, 21> kTags{
      "Natural Sciences",        "Humanities and Social Sciences", "Industrial Manufacturing",
      "Medical and Health",      "Agriculture and Forestry",       "Energy and Mining",
      "Finance and Real Estate", "Education",                      "Transportation",
      "Technology and Internet", "Law",                            "Military",
      "Travel and Tourism",      "Entertainment",                  "Arts and Culture",
      "Emotional Psychology",    "Fashion and Beauty",             "Sports",
      "Home and Lifestyle",      "Public Administration",          "Social Events",
  };
  return kTags;
}

TagTaxonomy taxonomy_from_json(const json& j) {
  if (!j.is_array()) raise(Errc::SchemaError, "taxonomy must be a list of first-level tags");
  std::vector<TaxonomyNode> roots;
  roots.reserve(j.size());
  for (const auto& item : j) roots.push_back(node_from_json(item, 1, "<root>"));
  return TagTaxonomy(std::move(roots));
}

json taxonomy_to_json(const TagTaxonomy& taxonomy) {
  json out = json::array();
  for (const auto& root : taxonomy.roots()) out.push_back(node_to_json(root, 1));
  return out;
}

TagTaxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoFailure, "cannot read taxonomy " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    raise(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return taxonomy_from_json(j);
}

void save_taxonomy(const TagTaxonomy& taxonomy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + path.string());
  out << taxonomy_to_json(taxonomy).dump(2) << "\n";
}

const TagTaxonomy& default_taxonomy() {
  static const TagTaxonomy kTaxonomy = taxonomy_from_json(json::parse(assets::embedded("default_taxonomy.json")));
  return kTaxonomy;
}

// ---------------------------------------------------------------------------

void TagCounts::add(const TagPath& path, std::uint64_t n) {
  level1[path.level1] += n;
  level2[{path.level1, path.level2}] += n;
  level3[path] += n;
  total += n;
}

void TagCounts::merge(const TagCounts& other) {
  for (const auto& [k, v] : other.level1) level1[k] += v;
  for (const auto& [k, v] : other.level2) level2[k] += v;
  for (const auto& [k, v] : other.level3) level3[k] += v;
  total += other.total;
  untagged += other.untagged;
}

std::uint64_t TagCounts::count(std::string_view l1) const {
  auto it = level1.find(std::string(l1));
  return it == level1.end() ? 0 : it->second;
}

std::uint64_t TagCounts::count(std::string_view l1, std::string_view l2) const {
  auto it = level2.find({std::string(l1), std::string(l2)});
  return it == level2.end() ? 0 : it->second;
}

std::uint64_t TagCounts::count(const TagPath& path) const {
  auto it = level3.find(path);
  return it == level3.end() ? 0 : it->second;
}

bool TagCounts::consistent() const {
  std::map<std::string, std::uint64_t> sum1;
  std::map<std::pair<std::string, std::string>, std::uint64_t> sum2;
  for (const auto& [path, n] : level3) sum2[{path.level1, path.level2}] += n;
  for (const auto& [key, n] : level2) sum1[key.first] += n;
  std::uint64_t grand = 0;
  for (const auto& [_, n] : level1) grand += n;
  auto drop_zeros = [](auto m) {
    std::erase_if(m, [](const auto& kv) { return kv.second == 0; });
    return m;
  };
  return drop_zeros(sum2) == drop_zeros(level2) && drop_zeros(sum1) == drop_zeros(level1) && grand == total;
}

TagCounts count_tags(std::span<const AnnotatedDocument> annotations, const TagTaxonomy& taxonomy) {
  TagCounts counts;
  for (const auto& a : annotations) {
    if (!a.tags) {
      ++counts.untagged;
      continue;
    }
    try {
      taxonomy.validate(*a.tags);
    } catch (const Error& e) {
      raise(Errc::InvalidTagPath, "document '" + a.doc.id + "': " + e.detail());
    }
    counts.add(*a.tags);
  }
  return counts;
}

std::map<std::string, double> tag_distribution(const TagCounts& counts, int level) {
  if (level < 1 || level > 3) raise(Errc::InvalidArgument, "tag level must be 1, 2 or 3");
  if (counts.total == 0) raise(Errc::EmptyCounts, "no tagged documents");
  std::map<std::string, std::uint64_t> raw;
  if (level == 1) {
    for (const auto& [k, n] : counts.level1) raw[k] += n;
  } else if (level == 2) {
    for (const auto& [k, n] : counts.level2) raw[join_tag_prefix({k.first, k.second, {}}, 2)] += n;
  } else {
    for (const auto& [k, n] : counts.level3) raw[join_tag_prefix(k, 3)] += n;
  }
  std::map<std::string, double> out;
  const double total = static_cast<double>(counts.total);
  for (const auto& [k, n] : raw) {
    if (n > 0) out[k] = static_cast<double>(n) / total;
  }
  return out;
}

double tag_cross_entropy(const std::map<std::string, double>& observed, const TagTaxonomy& taxonomy, int level,
                         double epsilon) {
  if (!(epsilon > 0.0)) raise(Errc::InvalidArgument, "epsilon must be positive");
  const auto keys = taxonomy.tag_keys(level);
  std::set<std::string_view> known(keys.begin(), keys.end());
  double mass = 0.0;
  for (const auto& [tag, p] : observed) {
    if (!std::isfinite(p) || p < 0.0) raise(Errc::InvalidDistribution, "probability of '" + tag + "' is invalid");
    if (!known.contains(tag)) raise(Errc::InvalidDistribution, "'" + tag + "' is not a taxonomy tag at this level");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) raise(Errc::InvalidDistribution, "probabilities sum to " + std::to_string(mass));
  double h = 0.0;
  for (const auto& key : keys) {
    auto it = observed.find(key);
    const double q = it == observed.end() ? 0.0 : it->second;
    h -= std::log(std::max(q, epsilon));
  }
  return h / static_cast<double>(keys.size());
}

}  // namespace decorate
