#include "decorate/annotator.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "decorate/errors.hpp"
#include "decorate/random.hpp"

namespace decorate {

namespace {

void require_text(std::string_view text, const char* what) {
  if (text.empty()) raise(Errc::InvalidArgument, std::string(what) + " must be non-empty");
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const auto start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

// Lowercase alphanumeric words; everything else separates.
std::vector<std::string> lower_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t count_sequence(const std::vector<std::string>& words, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > words.size()) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + needle.size() <= words.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) ++hits;
  }
  return hits;
}

constexpr std::size_t kStemLength = 6;

std::set<std::string> stems(std::string_view text) {
  std::set<std::string> out;
  for (auto& w : lower_words(text)) {
    if (w.size() < 4) continue;  // drops "and", "of" and similar
    out.insert(w.substr(0, kStemLength));
  }
  return out;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& s : a) n += b.count(s);
  return n;
}

std::uint64_t text_hash(std::string_view text, std::uint64_t salt) {
  return splitmix64(fnv1a64(text) ^ splitmix64(salt));
}

}  // namespace

// ---------------------------------------------------------------------------
// Gateway

CompareResult compare(AnnotatorBackend& backend, Criterion criterion, std::string_view text_a,
                      std::string_view text_b) {
  require_text(text_a, "text_a");
  require_text(text_b, "text_b");
  return backend.compare_texts(criterion, text_a, text_b);
}

PresentedComparison compare_randomized(AnnotatorBackend& backend, Criterion criterion, std::string_view text_a,
                                       std::string_view text_b, std::uint64_t seed, std::string_view request_key) {
  require_text(text_a, "text_a");
  require_text(text_b, "text_b");
  const bool swapped =
      keyed_uniform(derive_seed(seed, "presentation"), criterion_index(criterion), request_key) < 0.5;
  auto shown = swapped ? backend.compare_texts(criterion, text_b, text_a)
                       : backend.compare_texts(criterion, text_a, text_b);
  PresentedComparison out;
  out.swapped = swapped;
  out.rationale = std::move(shown.rationale);
  out.winner = swapped ? (shown.winner == Winner::A ? Winner::B : Winner::A) : shown.winner;
  return out;
}

TagChoice assign_first_level_tag(AnnotatorBackend& backend, std::string_view text, const TagTaxonomy& taxonomy) {
  require_text(text, "text");
  auto choice = backend.first_level_tag(text, taxonomy);
  if (!taxonomy.has_level1(choice.tag)) raise(Errc::UnknownTag, "first-level tag '" + choice.tag + "' is not in the taxonomy");
  return choice;
}

SubTagChoice assign_sub_tags(AnnotatorBackend& backend, std::string_view text, std::string_view level1,
                             const TagTaxonomy& taxonomy) {
  require_text(text, "text");
  const auto* root = taxonomy.find_level1(level1);
  if (root == nullptr) raise(Errc::UnknownTag, "first-level tag '" + std::string(level1) + "' is not in the taxonomy");
  auto choice = backend.sub_level_tags(text, *root);

  const auto* l2 = taxonomy.find_level2(level1, choice.level2);
  if (l2 == nullptr) {
    raise(Errc::UnknownTag, "second-level tag '" + choice.level2 + "' is not under '" + std::string(level1) + "'");
  }
  const auto is_l3 = [&](const TaxonomyNode& n) { return n.name == choice.level3; };
  if (std::any_of(l2->children.begin(), l2->children.end(), is_l3)) return choice;

  for (const auto& other : root->children) {
    if (std::any_of(other.children.begin(), other.children.end(), is_l3)) {
      raise(Errc::PathMismatch, "third-level tag '" + choice.level3 + "' belongs to '" + other.name + "', not '" +
                                    choice.level2 + "'");
    }
  }
  raise(Errc::UnknownTag, "third-level tag '" + choice.level3 + "' is not under '" + std::string(level1) + "'");
}

TagPath assign_tag_path(AnnotatorBackend& backend, std::string_view text, const TagTaxonomy& taxonomy) {
  auto first = assign_first_level_tag(backend, text, taxonomy);
  auto sub = assign_sub_tags(backend, text, first.tag, taxonomy);
  return TagPath{std::move(first.tag), std::move(sub.level2), std::move(sub.level3)};
}

std::string summarize(AnnotatorBackend& backend, std::string_view text) {
  require_text(text, "text");
  auto out = backend.summarize_text(text);
  if (out.empty()) raise(Errc::EmptyReply, "empty summary");
  return out;
}

std::string edit(AnnotatorBackend& backend, std::string_view text) {
  require_text(text, "text");
  auto out = backend.edit_text(text);
  if (out.empty()) raise(Errc::EmptyReply, "empty edited text");
  return out;
}

// ---------------------------------------------------------------------------
// Pair scheduling

std::size_t PairSchedule::total_pairs() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.size();
  return n;
}

namespace {

std::vector<std::pair<std::string, std::string>> schedule_one(const std::vector<std::string>& ids,
                                                              std::uint32_t pairs_per_doc, std::uint64_t seed) {
  const std::size_t n = ids.size();
  const std::size_t complete = n * (n - 1) / 2;
  const std::size_t target =
      std::min<std::size_t>(complete, std::max<std::size_t>(n == 2 ? 1 : n, (n * pairs_per_doc + 1) / 2));

  SplitMix64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(target);
  const auto add = [&](std::size_t a, std::size_t b) {
    const auto key = std::minmax(a, b);
    if (a == b || !seen.insert(key).second) return false;
    edges.emplace_back(a, b);
    return true;
  };

  const std::size_t ring = n == 2 ? 1 : n;
  for (std::size_t i = 0; i < ring; ++i) add(order[i], order[(i + 1) % n]);

  if (edges.size() < target) {
    if (2 * target > complete) {
      // Dense: enumerate the remaining pairs and take a seeded prefix.
      std::vector<std::pair<std::size_t, std::size_t>> rest;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (!seen.count({a, b})) rest.emplace_back(a, b);
      shuffle(rest, rng);
      for (const auto& [a, b] : rest) {
        if (edges.size() >= target) break;
        if (rng.below(2) == 0) add(a, b); else add(b, a);
      }
    } else {
      while (edges.size() < target) add(rng.below(n), rng.below(n));
    }
  }

  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(edges.size());
  for (const auto& [a, b] : edges) out.emplace_back(ids[a], ids[b]);
  return out;
}

}  // namespace

PairSchedule schedule_pairs(const std::vector<std::string>& doc_ids, std::uint32_t pairs_per_doc,
                            std::uint64_t seed) {
  if (doc_ids.size() < 2) raise(Errc::TooFewDocuments, "pair scheduling needs at least 2 documents");
  if (pairs_per_doc == 0) raise(Errc::InvalidArgument, "pairs_per_doc must be at least 1");
  std::unordered_set<std::string_view> unique;
  for (const auto& id : doc_ids) {
    if (!unique.insert(id).second) raise(Errc::InvalidArgument, "duplicate document id '" + id + "'");
  }
  PairSchedule schedule;
  schedule.pairs_per_doc = pairs_per_doc;
  schedule.seed = seed;
  for (auto c : canonical_criterion_order()) {
    schedule.pairs[criterion_index(c)] = schedule_one(doc_ids, pairs_per_doc, derive_seed(seed, "pairs", criterion_index(c)));
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Mock backend

const std::vector<std::pair<std::string, std::string>>& default_first_level_keywords() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"physics", "Natural Sciences"}, {"chemistry", "Natural Sciences"}, {"biology", "Natural Sciences"},
      {"molecule", "Natural Sciences"}, {"quantum", "Natural Sciences"}, {"equation", "Natural Sciences"},
      {"history", "Humanities and Social Sciences"}, {"philosophy", "Humanities and Social Sciences"},
      {"sociology", "Humanities and Social Sciences"}, {"linguistics", "Humanities and Social Sciences"},
      {"factory", "Industrial Manufacturing"}, {"manufacturing", "Industrial Manufacturing"},
      {"assembly line", "Industrial Manufacturing"}, {"machinery", "Industrial Manufacturing"},
      {"cancer", "Medical and Health"}, {"bladder cancer", "Medical and Health"}, {"patient", "Medical and Health"},
      {"diagnosis", "Medical and Health"}, {"disease", "Medical and Health"}, {"catheter", "Medical and Health"},
      {"tumours", "Medical and Health"}, {"tumors", "Medical and Health"}, {"urology", "Medical and Health"},
      {"crop", "Agriculture and Forestry"}, {"farm", "Agriculture and Forestry"}, {"forest", "Agriculture and Forestry"},
      {"harvest", "Agriculture and Forestry"}, {"livestock", "Agriculture and Forestry"},
      {"oil", "Energy and Mining"}, {"mining", "Energy and Mining"}, {"solar", "Energy and Mining"},
      {"coal", "Energy and Mining"}, {"electricity", "Energy and Mining"},
      {"mortgage", "Finance and Real Estate"}, {"stock", "Finance and Real Estate"},
      {"investment", "Finance and Real Estate"}, {"bank", "Finance and Real Estate"},
      {"real estate", "Finance and Real Estate"},
      {"school", "Education"}, {"students", "Education"}, {"teacher", "Education"}, {"curriculum", "Education"},
      {"university", "Education"},
      {"railway", "Transportation"}, {"traffic", "Transportation"}, {"airline", "Transportation"},
      {"shipping", "Transportation"}, {"vehicle", "Transportation"},
      {"software", "Technology and Internet"}, {"internet", "Technology and Internet"},
      {"computer", "Technology and Internet"}, {"website", "Technology and Internet"},
      {"algorithm", "Technology and Internet"},
      {"court", "Law"}, {"lawyer", "Law"}, {"statute", "Law"}, {"contract", "Law"}, {"legal", "Law"},
      {"army", "Military"}, {"soldiers", "Military"}, {"navy", "Military"}, {"weapons", "Military"},
      {"hotel", "Travel and Tourism"}, {"tourist", "Travel and Tourism"}, {"vacation", "Travel and Tourism"},
      {"itinerary", "Travel and Tourism"},
      {"movie", "Entertainment"}, {"celebrity", "Entertainment"}, {"video game", "Entertainment"},
      {"television", "Entertainment"},
      {"painting", "Arts and Culture"}, {"museum", "Arts and Culture"}, {"poetry", "Arts and Culture"},
      {"sculpture", "Arts and Culture"},
      {"anxiety", "Emotional Psychology"}, {"emotions", "Emotional Psychology"},
      {"relationship", "Emotional Psychology"}, {"depression", "Emotional Psychology"},
      {"fashion", "Fashion and Beauty"}, {"makeup", "Fashion and Beauty"}, {"clothing", "Fashion and Beauty"},
      {"skincare", "Fashion and Beauty"},
      {"football", "Sports"}, {"basketball", "Sports"}, {"tournament", "Sports"}, {"athletes", "Sports"},
      {"recipe", "Home and Lifestyle"}, {"kitchen", "Home and Lifestyle"}, {"gardening", "Home and Lifestyle"},
      {"furniture", "Home and Lifestyle"},
      {"government", "Public Administration"}, {"ministry", "Public Administration"},
      {"municipal", "Public Administration"}, {"policy", "Public Administration"},
      {"wedding", "Social Events"}, {"festival", "Social Events"}, {"party", "Social Events"},
      {"ceremony", "Social Events"},
  };
  return table;
}

MockConfig MockConfig::with_default_keywords() {
  MockConfig config;
  config.first_level_keywords = default_first_level_keywords();
  return config;
}

MockBackend::MockBackend(MockConfig config) : config_(std::move(config)) {
  keyword_words_.reserve(config_.first_level_keywords.size());
  for (const auto& [keyword, tag] : config_.first_level_keywords) keyword_words_.emplace_back(lower_words(keyword), tag);
}

double MockBackend::latent(Criterion criterion, std::string_view text) const {
  if (auto it = config_.latent_by_text.find(std::string(text)); it != config_.latent_by_text.end()) {
    return it->second[criterion_index(criterion)];
  }
  return to_open_unit(text_hash(text, 0x1a7e00 + criterion_index(criterion)));
}

CompareResult MockBackend::compare_texts(Criterion criterion, std::string_view text_1, std::string_view text_2) {
  const double a = latent(criterion, text_1);
  const double b = latent(criterion, text_2);
  CompareResult out;
  out.winner = b > a ? Winner::B : Winner::A;
  out.rationale = "mock latent comparison";
  return out;
}

TagChoice MockBackend::first_level_tag(std::string_view text, const TagTaxonomy& taxonomy) {
  const auto words = lower_words(text);
  std::map<std::string, std::size_t, std::less<>> hits;
  for (const auto& [needle, tag] : keyword_words_) {
    if (const auto n = count_sequence(words, needle); n > 0) hits[tag] += n;
  }
  const TaxonomyNode* best = nullptr;
  std::size_t best_hits = 0;
  for (const auto& root : taxonomy.roots()) {
    auto it = hits.find(root.name);
    if (it != hits.end() && it->second > best_hits) {
      best = &root;
      best_hits = it->second;
    }
  }
  if (best == nullptr) {
    const auto& roots = taxonomy.roots();
    best = &roots[text_hash(text, 0x7a6) % roots.size()];
    return {best->name, "mock: no keyword matched"};
  }
  return {best->name, "mock: keyword match"};
}

SubTagChoice MockBackend::sub_level_tags(std::string_view text, const TaxonomyNode& level1) {
  const auto text_stems = stems(text);
  const TaxonomyNode* best2 = nullptr;
  const TaxonomyNode* best3 = nullptr;
  std::size_t best_score = 0;
  for (const auto& l2 : level1.children) {
    const auto s2 = overlap(stems(l2.name), text_stems);
    for (const auto& l3 : l2.children) {
      const auto score = 2 * overlap(stems(l3.name), text_stems) + s2;
      if (score > best_score) {
        best_score = score;
        best2 = &l2;
        best3 = &l3;
      }
    }
  }
  if (best2 == nullptr) {
    std::vector<std::pair<const TaxonomyNode*, const TaxonomyNode*>> leaves;
    for (const auto& l2 : level1.children)
      for (const auto& l3 : l2.children) leaves.emplace_back(&l2, &l3);
    if (leaves.empty()) raise(Errc::UnknownTag, "'" + level1.name + "' has no sub-tags");
    const auto& [l2, l3] = leaves[text_hash(text, 0x5b7) % leaves.size()];
    return {l2->name, l3->name, "mock: no stem matched"};
  }
  return {best2->name, best3->name, "mock: stem match"};
}

std::string MockBackend::summarize_text(std::string_view text) {
  auto tokens = split_whitespace(text);
  if (tokens.size() > config_.summary_tokens) tokens.resize(config_.summary_tokens);
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string MockBackend::edit_text(std::string_view text) { return mock_edit_transform(text); }

namespace {

const std::unordered_map<std::string, std::string>& substitution_table() {
  static const auto table = [] {
    const std::pair<const char*, const char*> pairs[] = {
        {"big", "large"},     {"small", "little"},  {"begin", "start"},   {"show", "display"},
        {"help", "assist"},   {"use", "employ"},    {"quick", "rapid"},   {"often", "frequently"},
        {"important", "crucial"}, {"make", "create"}, {"find", "locate"}, {"easy", "simple"},
        {"get", "obtain"},    {"many", "numerous"}, {"about", "regarding"}, {"also", "additionally"},
    };
    std::unordered_map<std::string, std::string> m;
    for (const auto& [a, b] : pairs) {
      m.emplace(a, b);
      m.emplace(b, a);
    }
    return m;
  }();
  return table;
}

bool ends_sentence(const std::string& token) {
  const char last = token.back();
  return last == '.' || last == '!' || last == '?';
}

std::string substitute(const std::string& token) {
  std::size_t end = token.size();
  while (end > 0 && !std::isalpha(static_cast<unsigned char>(token[end - 1]))) --end;
  if (end == 0) return token;
  std::string core = token.substr(0, end);
  const std::string suffix = token.substr(end);

  std::string lower = core;
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const auto& table = substitution_table();
  auto it = table.find(lower);
  if (it == table.end()) return token;
  if (core == lower) return it->second + suffix;
  std::string cap = lower;
  cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
  if (core != cap) return token;  // other casings are left alone so the map stays an involution
  std::string swapped = it->second;
  swapped[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(swapped[0])));
  return swapped + suffix;
}

}  // namespace

std::string mock_edit_transform(std::string_view text) {
  const auto tokens = split_whitespace(text);
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> tail;
  for (const auto& t : tokens) {
    tail.push_back(substitute(t));
    if (ends_sentence(t)) {
      sentences.push_back(std::move(tail));
      tail.clear();
    }
  }
  std::reverse(sentences.begin(), sentences.end());
  if (!tail.empty()) sentences.push_back(std::move(tail));  // unterminated fragment stays last

  std::string out;
  for (const auto& s : sentences) {
    for (const auto& t : s) {
      if (!out.empty()) out.push_back(' ');
      out += t;
    }
  }
  return out;
}

}  // namespace decorate
