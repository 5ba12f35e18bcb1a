#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "decorate/annotator.hpp"
#include "decorate/errors.hpp"
#include "support/oracles.hpp"

namespace decorate {
namespace {

// Returns canned replies without validation.
class ScriptedBackend final : public AnnotatorBackend {
 public:
  std::string judge() const override { return "scripted"; }
  CompareResult compare_texts(Criterion, std::string_view t1, std::string_view) override {
    // Prefers whichever text is "good" regardless of position.
    return {t1 == "good" ? Winner::A : Winner::B, "r"};
  }
  TagChoice first_level_tag(std::string_view, const TagTaxonomy&) override { return {level1, "e"}; }
  SubTagChoice sub_level_tags(std::string_view, const TaxonomyNode&) override { return {level2, level3, "e"}; }
  std::string summarize_text(std::string_view) override { return reply; }
  std::string edit_text(std::string_view) override { return reply; }

  std::string level1, level2, level3, reply;
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

const char* kMedicalText =
    "Photodynamic diagnosis lets clinicians spot bladder cancer under violet light. A catheter carries a "
    "fluorescent agent into the bladder, and the diagnostic procedure then reveals tumour tissue.";

TEST(MockCompare, HigherLatentWinsTiesGoToFirst) {
  MockConfig cfg;
  std::array<double, kCriterionCount> hi{}, lo{};
  hi.fill(0.9);
  lo.fill(0.1);
  cfg.latent_by_text = {{"a", hi}, {"b", lo}, {"c", lo}};
  MockBackend mock(cfg);
  EXPECT_EQ(compare(mock, Criterion::Scarcity, "a", "b").winner, Winner::A);
  EXPECT_EQ(compare(mock, Criterion::Scarcity, "b", "a").winner, Winner::B);
  EXPECT_EQ(compare(mock, Criterion::Scarcity, "b", "c").winner, Winner::A);
  EXPECT_EQ(code_of([&] { compare(mock, Criterion::Scarcity, "", "b"); }), Errc::InvalidArgument);
}

TEST(MockCompare, PureFunctionOfInputs) {
  MockBackend m1, m2;
  for (int i = 0; i < 50; ++i) {
    const auto a = "text " + std::to_string(i);
    const auto b = "other " + std::to_string(i * 7);
    EXPECT_EQ(m1.compare_texts(Criterion::Expertise, a, b).winner, m2.compare_texts(Criterion::Expertise, a, b).winner);
    EXPECT_EQ(m1.latent(Criterion::Expertise, a), m2.latent(Criterion::Expertise, a));
  }
}

TEST(RandomizedCompare, LabelBlindAndSeeded) {
  ScriptedBackend backend;
  int swapped = 0;
  for (int k = 0; k < 200; ++k) {
    const auto key = "req" + std::to_string(k);
    const auto ab = compare_randomized(backend, Criterion::Expertise, "good", "bad", 7, key);
    const auto ba = compare_randomized(backend, Criterion::Expertise, "bad", "good", 7, key);
    EXPECT_EQ(ab.winner, Winner::A);
    EXPECT_EQ(ba.winner, Winner::B);
    EXPECT_EQ(ab.swapped, compare_randomized(backend, Criterion::Expertise, "x", "y", 7, key).swapped);
    swapped += ab.swapped;
  }
  // Both orders occur at roughly even rates.
  EXPECT_GT(swapped, 70);
  EXPECT_LT(swapped, 130);
}

TEST(MockTags, KeywordRoutesMedicalText) {
  MockBackend mock;
  const auto& t = default_taxonomy();
  const auto first = assign_first_level_tag(mock, "Screening for bladder cancer", t);
  EXPECT_EQ(first.tag, "Medical and Health");
  EXPECT_EQ(assign_first_level_tag(mock, "Screening for bladder cancer", t).tag, first.tag);

  const auto sub = assign_sub_tags(mock, kMedicalText, "Medical and Health", t);
  EXPECT_EQ(sub.level2, "Medical Procedures");
  EXPECT_EQ(sub.level3, "Diagnostic Procedures");
  EXPECT_EQ(assign_tag_path(mock, kMedicalText, t),
            (TagPath{"Medical and Health", "Medical Procedures", "Diagnostic Procedures"}));
}

TEST(MockTags, EveryPathValidatesOnArbitraryText) {
  MockBackend mock;
  const auto& t = default_taxonomy();
  for (int i = 0; i < 300; ++i) {
    const auto text = "arbitrary words number " + std::to_string(i * 31) + " zeta";
    EXPECT_NO_THROW(t.validate(assign_tag_path(mock, text, t)));
  }
}

TEST(MockTags, SinglePathSubtreeReturnsThatPath) {
  TagTaxonomy tiny({{"Only", {{"Branch", {{"Leaf", {}}}}}}});
  MockBackend mock;
  EXPECT_EQ(assign_tag_path(mock, "nothing matches here", tiny), (TagPath{"Only", "Branch", "Leaf"}));
}

TEST(GatewayTags, RejectsOutOfTaxonomyReplies) {
  ScriptedBackend b;
  const auto& t = default_taxonomy();
  b.level1 = "Astrology";
  EXPECT_EQ(code_of([&] { assign_first_level_tag(b, "x", t); }), Errc::UnknownTag);
  b.level2 = "Medical Procedures";
  b.level3 = "Epidemiology";  // lives under Public Health
  EXPECT_EQ(code_of([&] { assign_sub_tags(b, "x", "Medical and Health", t); }), Errc::PathMismatch);
  b.level3 = "Nonexistent";
  EXPECT_EQ(code_of([&] { assign_sub_tags(b, "x", "Medical and Health", t); }), Errc::UnknownTag);
  b.level2 = "Team Sports";
  b.level3 = "Diagnostic Procedures";
  EXPECT_EQ(code_of([&] { assign_sub_tags(b, "x", "Medical and Health", t); }), Errc::UnknownTag);
}

TEST(Summarize, MockTruncatesToHundredTokens) {
  MockBackend mock;
  EXPECT_EQ(summarize(mock, "one two three"), "one two three");
  std::ostringstream long_text;
  for (int i = 0; i < 500; ++i) long_text << "w" << i << ' ';
  const auto s = summarize(mock, long_text.str());
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  EXPECT_EQ(n, 100u);
  ScriptedBackend empty;
  EXPECT_EQ(code_of([&] { summarize(empty, "text"); }), Errc::EmptyReply);
  EXPECT_EQ(code_of([&] { summarize(mock, ""); }), Errc::InvalidArgument);
}

TEST(Edit, MockTransformIsDeterministicInvolution) {
  const std::string text = "We use big tools. Quick help is important! Does it show many results?";
  const auto once = mock_edit_transform(text);
  EXPECT_EQ(once, "Does it display numerous results? Rapid assist is crucial! We employ large tools.");
  EXPECT_EQ(mock_edit_transform(once), text);
  MockBackend mock;
  EXPECT_EQ(edit(mock, text), once);
  ScriptedBackend empty;
  EXPECT_EQ(code_of([&] { edit(empty, "text"); }), Errc::EmptyReply);
}

TEST(Edit, LengthWindow) {
  EXPECT_FALSE(eligible_for_editing(49));
  EXPECT_TRUE(eligible_for_editing(50));
  EXPECT_TRUE(eligible_for_editing(2048));
  EXPECT_FALSE(eligible_for_editing(2049));
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("d" + std::to_string(i));
  return out;
}

TEST(Schedule, ConnectedSimpleAndSized) {
  const auto docs = ids(100);
  const auto s = schedule_pairs(docs, 4, 3);
  for (auto c : canonical_criterion_order()) {
    const auto& pairs = s.for_criterion(c);
    EXPECT_EQ(pairs.size(), 200u);
    std::set<std::pair<std::string, std::string>> seen;
    for (auto [a, b] : pairs) {
      EXPECT_NE(a, b);
      if (b < a) std::swap(a, b);
      EXPECT_TRUE(seen.insert({a, b}).second);
    }
    EXPECT_TRUE(oracle::connected(docs, pairs));
  }
  EXPECT_EQ(s.total_pairs(), 1600u);
  EXPECT_EQ(schedule_pairs(docs, 4, 3), s);
  EXPECT_NE(schedule_pairs(docs, 4, 4), s);
}

TEST(Schedule, PropertiesAcrossSizes) {
  for (std::size_t n : {2u, 3u, 5u, 9u, 17u, 40u}) {
    for (std::uint32_t ppd : {1u, 2u, 3u, 8u, 50u}) {
      const auto docs = ids(n);
      const auto s = schedule_pairs(docs, ppd, n * 100 + ppd);
      const auto& pairs = s.for_criterion(Criterion::Subjectivity);
      const std::size_t complete = n * (n - 1) / 2;
      EXPECT_LE(pairs.size(), complete);
      EXPECT_TRUE(oracle::connected(docs, pairs)) << n << " " << ppd;
      std::map<std::string, std::size_t> degree;
      for (const auto& [a, b] : pairs) {
        ++degree[a];
        ++degree[b];
      }
      EXPECT_EQ(degree.size(), n);
      if (pairs.size() < complete) {
        EXPECT_GE(2.0 * pairs.size() / n, ppd - 1e-9);
      }
    }
  }
}

TEST(Schedule, EdgeCases) {
  const auto two = schedule_pairs(ids(2), 5, 1);
  EXPECT_EQ(two.for_criterion(Criterion::Expertise).size(), 1u);
  EXPECT_EQ(code_of([] { schedule_pairs(ids(1), 2, 1); }), Errc::TooFewDocuments);
  EXPECT_EQ(code_of([] { schedule_pairs(ids(5), 0, 1); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { schedule_pairs({"a", "a", "b"}, 1, 1); }), Errc::InvalidArgument);
}

}  // namespace
}  // namespace decorate
