#include <gtest/gtest.h>

#include <cmath>

#include "decorate/errors.hpp"
#include "decorate/metrics.hpp"
#include "decorate/random.hpp"
#include "support/fixtures.hpp"

namespace decorate {
namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

// 1000 items: the first l1 share level 1 with gold, the first l2 also level 2,
// the first l3 the whole path. Misses alter the lowest wrong level only.
std::pair<std::map<std::string, TagPath>, std::map<std::string, TagPath>> accuracy_fixture(int n, int l1, int l2, int l3) {
  std::map<std::string, TagPath> pred, gold;
  for (int i = 0; i < n; ++i) {
    const auto id = "i" + std::to_string(i);
    TagPath g{"Sports", "Team Sports", "Football"};
    TagPath p = g;
    if (i >= l3) p.level3 = "Basketball";
    if (i >= l2) p.level2 = "Individual Sports";
    // A level-1 miss keeps lower names equal, which must still count as misses.
    if (i >= l1) p.level1 = "Entertainment";
    gold[id] = g;
    pred[id] = p;
  }
  return {pred, gold};
}

TEST(TagAccuracy, HierarchicalFixtureRates) {
  const auto [pred, gold] = accuracy_fixture(1000, 921, 756, 623);
  const auto r = tag_accuracy(pred, gold);
  EXPECT_EQ(r.n, 1000u);
  EXPECT_EQ(r.hits, (std::array<std::uint64_t, 3>{921, 756, 623}));
  EXPECT_DOUBLE_EQ(r.level1_acc, 0.921);
  EXPECT_DOUBLE_EQ(r.level2_acc, 0.756);
  EXPECT_DOUBLE_EQ(r.level3_acc, 0.623);
  EXPECT_NE(to_text_table(r).find("92.1"), std::string::npos);
  EXPECT_EQ(to_json(r)["level3_acc"], 0.623);
}

TEST(TagAccuracy, IdentityAndLowerLevelRequiresParent) {
  const auto [pred, gold] = accuracy_fixture(10, 10, 10, 10);
  const auto r = tag_accuracy(pred, gold);
  EXPECT_EQ(r.level1_acc, 1.0);
  EXPECT_EQ(r.level3_acc, 1.0);

  std::map<std::string, TagPath> g{{"x", {"A", "B", "C"}}}, p{{"x", {"Z", "B", "C"}}};
  const auto miss = tag_accuracy(p, g);
  EXPECT_EQ(miss.hits, (std::array<std::uint64_t, 3>{0, 0, 0}));
  EXPECT_EQ(code_of([&] { tag_accuracy(p, {{"y", {"A", "B", "C"}}}); }), Errc::IdMismatch);
  EXPECT_EQ(code_of([] { tag_accuracy({}, {}); }), Errc::InvalidArgument);
}

TEST(TagAccuracy, OrderedLevelsMonotoneAndMergeable) {
  SplitMix64 rng(6);
  const std::vector<std::string> names{"A", "B"};
  std::map<std::string, TagPath> pred, gold;
  TagAccuracyReport merged;
  for (int i = 0; i < 400; ++i) {
    const auto id = "r" + std::to_string(i);
    gold[id] = {names[rng.below(2)], names[rng.below(2)], names[rng.below(2)]};
    pred[id] = {names[rng.below(2)], names[rng.below(2)], names[rng.below(2)]};
    if (i % 100 == 99) {
      std::map<std::string, TagPath> sp, sg;
      for (int k = i - 99; k <= i; ++k) {
        const auto key = "r" + std::to_string(k);
        sp[key] = pred[key];
        sg[key] = gold[key];
      }
      merged.merge(tag_accuracy(sp, sg));
    }
  }
  const auto r = tag_accuracy(pred, gold);
  EXPECT_LE(r.level3_acc, r.level2_acc);
  EXPECT_LE(r.level2_acc, r.level1_acc);
  EXPECT_EQ(merged.hits, r.hits);
  EXPECT_DOUBLE_EQ(merged.level2_acc, r.level2_acc);

  // Adding a fully correct item never lowers any level's accuracy.
  auto more_pred = pred, more_gold = gold;
  more_pred["extra"] = more_gold["extra"] = TagPath{"A", "A", "A"};
  const auto after = tag_accuracy(more_pred, more_gold);
  EXPECT_GE(after.level1_acc, r.level1_acc);
  EXPECT_GE(after.level2_acc, r.level2_acc);
  EXPECT_GE(after.level3_acc, r.level3_acc);
}

TEST(Preferences, TalliesAndRates) {
  std::vector<PreferenceJudgment> j = {{"Text Fluency", Verdict::Win}, {"Text Fluency", Verdict::Win},
                                       {"Text Fluency", Verdict::Win}, {"Text Fluency", Verdict::Lose},
                                       {"Text Fluency", Verdict::Tie}, {"Term Precision", Verdict::Tie}};
  const auto r = aggregate_preferences(j);
  ASSERT_EQ(r.metrics.size(), 2u);
  const auto& f = r.metrics.at("Text Fluency");
  EXPECT_EQ(f.n(), 5u);
  EXPECT_DOUBLE_EQ(f.win_rate(), 0.6);
  EXPECT_DOUBLE_EQ(f.lose_rate(), 0.2);
  EXPECT_DOUBLE_EQ(f.tie_rate(), 0.2);
  EXPECT_EQ(r.metrics.at("Term Precision").tie_rate(), 1.0);
  EXPECT_NEAR(f.win_rate() + f.lose_rate() + f.tie_rate(), 1.0, 1e-12);
  EXPECT_EQ(to_json(r)["Text Fluency"]["win"], 3);
  EXPECT_NE(to_text_table(r).find("Term Precision"), std::string::npos);
  EXPECT_EQ(code_of([] { aggregate_preferences({}); }), Errc::InvalidArgument);
}

TEST(Preferences, StandardMetricNamesAndVerdicts) {
  for (auto name : {"Enhanced Clarity", "Text Fluency", "Term Precision", "Logical Coherence", "Information Precision",
                    "Information Completeness"})
    EXPECT_TRUE(is_standard_preference_metric(name));
  EXPECT_FALSE(is_standard_preference_metric("Vibes"));
  EXPECT_EQ(parse_verdict("win"), Verdict::Win);
  EXPECT_EQ(parse_verdict("tie"), Verdict::Tie);
  EXPECT_FALSE(parse_verdict("draw").has_value());
}

AnnotatedDocument summary_doc(const std::string& id, const std::string& source, std::uint64_t tokens,
                              const std::array<double, kCriterionCount>& scores, const TagPath& tags) {
  auto a = fixtures::make_doc(id, tokens, source);
  a.ratings = RatingVector::from_array(scores);
  a.tags = tags;
  return a;
}

TEST(DatasetSummary, MeansSharesAndCrossEntropy) {
  const auto& t = default_taxonomy();
  std::vector<AnnotatedDocument> docs;
  std::array<double, kCriterionCount> seventy{};
  seventy.fill(70);
  // Uniform first-level tags in one source, one tag in the other.
  int i = 0;
  for (const auto& root : t.roots()) {
    const TagPath p{root.name, root.children[0].name, root.children[0].children[0].name};
    docs.push_back(summary_doc("u" + std::to_string(i++), "uniform", 10, seventy, p));
  }
  const TagPath law{"Law", t.find_level1("Law")->children[0].name, t.find_level1("Law")->children[0].children[0].name};
  std::array<double, kCriterionCount> a{}, b{};
  for (std::size_t k = 0; k < kCriterionCount; ++k) {
    a[k] = 10.0 * static_cast<double>(k);
    b[k] = 100.0 - static_cast<double>(k);
  }
  docs.push_back(summary_doc("n0", "narrow", 30, a, law));
  docs.push_back(summary_doc("n1", "narrow", 60, b, law));

  const auto s = dataset_summary(docs, t);
  ASSERT_EQ(s.sources.size(), 2u);
  EXPECT_EQ(s.total_tokens, 21u * 10u + 90u);
  const auto& narrow = s.sources[0];
  const auto& uniform = s.sources[1];
  EXPECT_EQ(narrow.source, "narrow");
  for (std::size_t k = 0; k < kCriterionCount; ++k) {
    EXPECT_DOUBLE_EQ(uniform.mean_rating[k], 70.0);
    EXPECT_DOUBLE_EQ(narrow.mean_rating[k], (a[k] + b[k]) / 2.0);
  }
  EXPECT_NEAR(uniform.level1_cross_entropy, std::log(21.0), 1e-9);
  // One tag with mass 1, twenty at the epsilon floor.
  EXPECT_NEAR(narrow.level1_cross_entropy, -20.0 / 21.0 * std::log(1e-9), 1e-9);
  EXPECT_NEAR(narrow.token_share, 90.0 / 300.0, 1e-15);

  const auto csv = to_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("source,documents,tokens,token_share"), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(to_json(s)["sources"].size(), 2u);
  EXPECT_NE(to_text_table(s).find("uniform"), std::string::npos);
}

TEST(DatasetSummary, CompositionShares) {
  // Source sizes in the proportions 32 : 29 : 20 : 10 : 9.
  const std::vector<std::pair<std::string, std::uint64_t>> sizes = {
      {"s1", 320}, {"s2", 290}, {"s3", 200}, {"s4", 100}, {"s5", 90}};
  SplitMix64 rng(2);
  const auto& t = default_taxonomy();
  std::vector<AnnotatedDocument> docs;
  int id = 0;
  for (const auto& [src, tokens] : sizes) {
    for (std::uint64_t k = 0; k < tokens / 10; ++k) {
      auto a = fixtures::make_doc("c" + std::to_string(id++), 10, src);
      a.ratings = fixtures::random_ratings(rng);
      a.tags = t.leaf_paths()[rng.below(t.leaf_paths().size())];
      docs.push_back(std::move(a));
    }
  }
  const auto s = dataset_summary(docs, t);
  const std::vector<double> expected{0.32, 0.29, 0.20, 0.10, 0.09};
  double total = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(s.sources[k].token_share, expected[k], 1e-12);
    total += s.sources[k].token_share;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(DatasetSummary, EmptySource) {
  auto a = fixtures::make_doc("x", 5, "bare");
  EXPECT_EQ(code_of([&] { dataset_summary(std::vector<AnnotatedDocument>{a}, default_taxonomy()); }), Errc::EmptySource);
  EXPECT_EQ(code_of([] { dataset_summary({}, default_taxonomy()); }), Errc::EmptySource);
}

std::uint64_t words(std::string_view text) {
  std::uint64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

TEST(Perplexity, HistogramsAndScorerFailures) {
  std::vector<AnnotatedDocument> docs;
  for (int i = 0; i < 20; ++i) {
    auto a = fixtures::make_doc("p" + std::to_string(i), 0);
    a.doc.text = std::string(static_cast<std::size_t>(2 * i + 1), 'w');
    for (int k = 0; k < i; ++k) a.doc.text += " w";
    if (i % 2 == 0) {
      a.edited_text = "short text";
      a.edited_token_count = 2;
    }
    docs.push_back(std::move(a));
  }
  const std::vector<double> bounds{3, 8, 15};

  const auto constant = perplexity_report(docs, [](std::string_view) { return 5.0; }, bounds);
  EXPECT_EQ(constant.original, (std::vector<std::uint64_t>{0, 20, 0, 0}));
  EXPECT_EQ(constant.edited, (std::vector<std::uint64_t>{0, 10, 0, 0}));

  const auto length = perplexity_report(docs, [](std::string_view t) { return static_cast<double>(words(t)); }, bounds);
  std::vector<std::uint64_t> expected(4, 0);
  for (int i = 0; i < 20; ++i) ++expected[histogram_bin(1.0 + i, bounds)];
  EXPECT_EQ(length.original, expected);
  // Every edit has two words, so all edited mass sits in the lowest bin.
  EXPECT_EQ(length.edited, (std::vector<std::uint64_t>{10, 0, 0, 0}));
  EXPECT_EQ(to_json(length)["original"].size(), 4u);

  EXPECT_EQ(histogram_bin(2.9, bounds), 0u);
  EXPECT_EQ(histogram_bin(3.0, bounds), 1u);
  EXPECT_EQ(histogram_bin(100, bounds), 3u);

  try {
    perplexity_report(docs, [](std::string_view t) { return t.size() > 30 ? -1.0 : 1.0; }, bounds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ScorerFailure);
    EXPECT_NE(std::string(e.what()).find("p"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { perplexity_report(docs, [](std::string_view) -> double { throw std::runtime_error("down"); }, bounds); }),
            Errc::ScorerFailure);
  const std::vector<double> unsorted{5, 1};
  EXPECT_EQ(code_of([&] { perplexity_report(docs, [](std::string_view) { return 1.0; }, unsorted); }), Errc::InvalidArgument);
}

}  // namespace
}  // namespace decorate
