#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"
#include "decorate/random.hpp"
#include "decorate/taxonomy.hpp"

namespace fixtures {

using decorate::AnnotatedDocument;
using decorate::ComparisonRecord;
using decorate::Criterion;

// (winner, loser, times)
using Outcomes = std::vector<std::tuple<std::string, std::string, int>>;

inline std::vector<ComparisonRecord> comparisons(const Outcomes& outcomes, Criterion c = Criterion::EducationalValue) {
  std::vector<ComparisonRecord> out;
  for (const auto& [w, l, times] : outcomes) {
    for (int k = 0; k < times; ++k) {
      // Alternate presentation so both label positions occur.
      if (k % 2 == 0) {
        out.push_back({c, w, l, decorate::Winner::A, "fixture", std::nullopt});
      } else {
        out.push_back({c, l, w, decorate::Winner::B, "fixture", std::nullopt});
      }
    }
  }
  return out;
}

struct BtFixture {
  std::string name;
  std::vector<std::string> ids;
  Outcomes outcomes;
};

// Small comparison sets with a closed-form-free but searchable optimum.
inline std::vector<BtFixture> small_bt_fixtures() {
  return {
      {"two_3_1", {"a", "b"}, {{"a", "b", 3}, {"b", "a", 1}}},
      {"two_5_5", {"a", "b"}, {{"a", "b", 5}, {"b", "a", 5}}},
      {"two_all_wins", {"a", "b"}, {{"a", "b", 10}}},
      {"two_7_2", {"a", "b"}, {{"a", "b", 7}, {"b", "a", 2}}},
      {"two_single", {"a", "b"}, {{"b", "a", 1}}},
      {"three_chain", {"a", "b", "c"}, {{"a", "b", 4}, {"b", "a", 1}, {"b", "c", 3}, {"c", "b", 2}}},
      {"three_cycle", {"a", "b", "c"}, {{"a", "b", 2}, {"b", "c", 2}, {"c", "a", 2}}},
      {"three_dominant", {"a", "b", "c"}, {{"a", "b", 5}, {"a", "c", 5}, {"b", "c", 1}, {"c", "b", 3}}},
      {"three_unbalanced", {"a", "b", "c"}, {{"a", "b", 9}, {"b", "a", 1}, {"c", "a", 1}, {"a", "c", 1}, {"c", "b", 6}}},
  };
}

inline double normal(decorate::SplitMix64& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct SyntheticBt {
  std::map<std::string, double> true_strength;
  std::vector<ComparisonRecord> records;
};

// Random pairs with outcomes drawn from Bradley-Terry probabilities.
inline SyntheticBt synthetic_bt(std::size_t n_docs, std::size_t comparisons_per_doc, std::uint64_t seed,
                                double spread = 1.5) {
  decorate::SplitMix64 rng(seed);
  SyntheticBt out;
  std::vector<std::string> ids;
  std::vector<double> theta;
  for (std::size_t i = 0; i < n_docs; ++i) {
    ids.push_back("doc" + std::to_string(i));
    theta.push_back(spread * normal(rng));
    out.true_strength[ids.back()] = theta.back();
  }
  const std::size_t total = n_docs * comparisons_per_doc / 2;
  for (std::size_t k = 0; k < total; ++k) {
    const auto i = rng.below(n_docs);
    auto j = rng.below(n_docs - 1);
    if (j >= i) ++j;
    const double p = 1.0 / (1.0 + std::exp(theta[j] - theta[i]));
    const auto winner = rng.uniform() < p ? decorate::Winner::A : decorate::Winner::B;
    out.records.push_back({Criterion::EducationalValue, ids[i], ids[j], winner, "synthetic", std::nullopt});
  }
  return out;
}

inline decorate::RatingVector random_ratings(decorate::SplitMix64& rng, bool integer_scores = false) {
  std::array<double, decorate::kCriterionCount> v{};
  for (auto& x : v) x = integer_scores ? static_cast<double>(rng.below(101)) : 100.0 * rng.uniform();
  return decorate::RatingVector::from_array(v);
}

inline AnnotatedDocument make_doc(const std::string& id, std::uint64_t tokens, const std::string& source = {}) {
  AnnotatedDocument a;
  a.doc.id = id;
  a.doc.token_count = tokens;
  a.doc.source = source;
  a.doc.text = "text of " + id;
  return a;
}

inline std::vector<AnnotatedDocument> rated_corpus(std::size_t n, std::uint64_t seed, std::uint64_t tokens = 100) {
  decorate::SplitMix64 rng(seed);
  std::vector<AnnotatedDocument> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = make_doc("doc" + std::to_string(i), tokens);
    a.ratings = random_ratings(rng);
    out.push_back(std::move(a));
  }
  return out;
}

// 3 x 2 x 2 tree.
inline decorate::TagTaxonomy small_taxonomy() {
  using decorate::TaxonomyNode;
  std::vector<TaxonomyNode> roots;
  for (const char* l1 : {"Alpha", "Beta", "Gamma"}) {
    TaxonomyNode r{l1, {}};
    for (const char* l2 : {"One", "Two"}) {
      TaxonomyNode m{l2, {}};
      for (const char* l3 : {"X", "Y"}) m.children.push_back({l3, {}});
      r.children.push_back(std::move(m));
    }
    roots.push_back(std::move(r));
  }
  return decorate::TagTaxonomy(std::move(roots));
}

// Skewed leaf counts over small_taxonomy(), about 600 documents.
inline std::vector<AnnotatedDocument> skewed_tag_corpus() {
  const std::vector<std::pair<decorate::TagPath, int>> leaves = {
      {{"Alpha", "One", "X"}, 180}, {{"Alpha", "One", "Y"}, 60}, {{"Alpha", "Two", "X"}, 40},
      {{"Alpha", "Two", "Y"}, 20},  {{"Beta", "One", "X"}, 90},  {{"Beta", "One", "Y"}, 30},
      {{"Beta", "Two", "X"}, 60},   {{"Beta", "Two", "Y"}, 15},  {{"Gamma", "One", "X"}, 50},
      {{"Gamma", "One", "Y"}, 25},  {{"Gamma", "Two", "X"}, 20}, {{"Gamma", "Two", "Y"}, 10},
  };
  std::vector<AnnotatedDocument> out;
  int id = 0;
  for (const auto& [path, count] : leaves) {
    for (int k = 0; k < count; ++k) {
      auto a = make_doc("t" + std::to_string(id++), 10);
      a.tags = path;
      out.push_back(std::move(a));
    }
  }
  return out;
}

inline std::string leaf_key(const decorate::TagPath& p) { return decorate::join_tag_prefix(p, 3); }

// Corpus plus mock latents on disk for end-to-end runs.
inline void write_pipeline_corpus(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed) {
  static const char* kWords[] = {"cancer",   "patient", "school",  "football", "software", "court",   "hotel",
                                 "painting", "army",    "crop",    "oil",      "bank",     "movie",   "fashion",
                                 "wedding",  "recipe",  "railway", "museum",   "makeup",   "anxiety", "the",
                                 "and",      "of",      "data",    "study",    "report",   "big",     "help"};
  constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);
  static const char* kSources[] = {"web", "books", "wiki", "code", "papers"};
  decorate::SplitMix64 rng(seed);
  std::filesystem::create_directories(dir);
  std::ofstream corpus(dir / "corpus.jsonl");
  std::ofstream latents(dir / "latents.jsonl");
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = "doc" + std::to_string(i);
    const auto sentences = 2 + rng.below(8);
    std::string text;
    for (std::uint64_t s = 0; s < sentences; ++s) {
      const auto words = 4 + rng.below(14);
      for (std::uint64_t w = 0; w < words; ++w) {
        if (!text.empty()) text += ' ';
        text += kWords[rng.below(kWordCount)];
      }
      text += '.';
    }
    nlohmann::json doc = {{"id", id}, {"text", text}, {"source", kSources[rng.below(5)]}};
    corpus << doc.dump() << '\n';
    nlohmann::json latent = nlohmann::json::object();
    for (auto c : decorate::canonical_criterion_order()) latent[std::string(decorate::criterion_id(c))] = rng.uniform();
    latents << nlohmann::json{{"id", id}, {"latent", latent}}.dump() << '\n';
  }
}

}  // namespace fixtures
