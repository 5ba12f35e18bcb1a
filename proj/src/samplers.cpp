#include "decorate/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "decorate/corpus_io.hpp"
#include "decorate/errors.hpp"
#include "decorate/hashing.hpp"
#include "decorate/random.hpp"

namespace decorate {

namespace {

using json = nlohmann::json;

struct Keyed {
  double key;
  std::size_t index;
};

// log of the exponential key -ln(u) / w; smaller keys are drawn first.
double exponential_log_key(std::uint64_t seed, std::uint64_t stream, std::string_view id, double weight) {
  const double u = keyed_uniform(seed, stream, id);
  return std::log(-std::log(u)) - std::log(weight);
}

void sort_keys(std::vector<Keyed>& keys, std::span<const AnnotatedDocument> corpus) {
  std::sort(keys.begin(), keys.end(), [&](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return corpus[a.index].doc.id < corpus[b.index].doc.id;
  });
}

std::uint64_t corpus_tokens(std::span<const AnnotatedDocument> corpus) {
  std::uint64_t total = 0;
  for (const auto& a : corpus) total += a.doc.token_count;
  return total;
}

void require_budget(std::span<const AnnotatedDocument> corpus, std::uint64_t target) {
  const auto available = corpus_tokens(corpus);
  if (available < target) {
    raise(Errc::BudgetInfeasible, "corpus has " + std::to_string(available) + " tokens, target is " +
                                      std::to_string(target));
  }
}

void require_unique_ids(std::span<const AnnotatedDocument> corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& a : corpus) {
    if (!seen.insert(a.doc.id).second) raise(Errc::InvalidArgument, "duplicate document id '" + a.doc.id + "'");
  }
}

const RatingVector& require_ratings(const AnnotatedDocument& a) {
  if (!a.ratings) raise(Errc::MissingRatings, "document '" + a.doc.id + "' has no ratings");
  return *a.ratings;
}

ManifestEntry make_entry(const AnnotatedDocument& a, double weight) {
  ManifestEntry e;
  e.id = a.doc.id;
  e.weight = weight;
  e.tokens = a.doc.token_count;
  return e;
}

double pow_count(std::uint64_t count, double exponent) {
  return std::pow(static_cast<double>(count), exponent);
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) raise(Errc::InvalidArgument, std::string(name) + " must be finite");
}

}  // namespace

CriterionWeights default_criterion_profile() {
  return {{Criterion::EducationalValue, 0.2}, {Criterion::Expertise, 0.2},     {Criterion::FactAndTrivia, 0.2},
          {Criterion::ReasoningLevel, 0.2},   {Criterion::Scarcity, 0.05},     {Criterion::StructuralFormat, 0.05},
          {Criterion::StoryLikeness, 0.05},   {Criterion::Subjectivity, 0.05}};
}

// ---------------------------------------------------------------------------
// Manifests

void SampleManifest::recompute_total() {
  total_tokens = 0;
  for (const auto& e : entries) total_tokens += e.effective_tokens();
}

namespace {

json entry_to_json(const ManifestEntry& e) {
  json j = {{"id", e.id}, {"weight", e.weight}};
  j["phase"] = e.phase ? json(std::string(criterion_id(*e.phase))) : json(nullptr);
  j["edited"] = e.edited;
  j["tokens"] = e.effective_tokens();
  j["original_tokens"] = e.tokens;
  if (e.edited_tokens) j["edited_tokens"] = *e.edited_tokens;
  return j;
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.weight = j.at("weight").get<double>();
  if (const auto& p = j.at("phase"); !p.is_null()) {
    auto c = parse_criterion(p.get<std::string>());
    if (!c) raise(Errc::MalformedRecord, "unknown phase '" + p.get<std::string>() + "'");
    e.phase = *c;
  }
  e.edited = j.at("edited").get<bool>();
  e.tokens = j.at("original_tokens").get<std::uint64_t>();
  if (j.contains("edited_tokens")) e.edited_tokens = j.at("edited_tokens").get<std::uint64_t>();
  return e;
}

}  // namespace

std::string manifest_to_jsonl(const SampleManifest& manifest) {
  std::string out;
  const json header = {{"type", "header"},
                       {"strategy", manifest.strategy},
                       {"seed", manifest.seed},
                       {"config_fingerprint", manifest.config_fingerprint},
                       {"total_tokens", manifest.total_tokens},
                       {"num_entries", manifest.entries.size()}};
  out += dump_line(header);
  out += '\n';
  for (const auto& e : manifest.entries) {
    out += dump_line(entry_to_json(e));
    out += '\n';
  }
  return out;
}

SampleManifest manifest_from_jsonl(std::string_view text) {
  SampleManifest m;
  bool have_header = false;
  std::size_t expected = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "header") raise(Errc::MalformedRecord, "manifest must start with a header line");
        m.strategy = j.at("strategy").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        m.total_tokens = j.at("total_tokens").get<std::uint64_t>();
        expected = j.at("num_entries").get<std::size_t>();
        have_header = true;
      } else {
        m.entries.push_back(entry_from_json(j));
      }
    } catch (const json::exception& e) {
      raise(Errc::MalformedRecord, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) raise(Errc::MalformedRecord, "manifest has no header");
  if (m.entries.size() != expected) {
    raise(Errc::MalformedRecord, "manifest header announces " + std::to_string(expected) + " entries, found " +
                                     std::to_string(m.entries.size()));
  }
  return m;
}

void save_sample_manifest(const SampleManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + path.string());
  out << manifest_to_jsonl(manifest);
  if (!out) raise(Errc::IoFailure, "write failed for " + path.string());
}

SampleManifest load_sample_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::MissingShard, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return manifest_from_jsonl(buf.str());
}

// ---------------------------------------------------------------------------
// Rating-based weights

double separate_weight(double score, double lambda, double tau) {
  if (!(tau > 0.0)) raise(Errc::NonPositiveTau, "tau must be > 0, got " + std::to_string(tau));
  return std::exp((score - lambda) / tau);
}

void SeparateConfig::validate() const {
  if (!(tau > 0.0)) raise(Errc::NonPositiveTau, "tau must be > 0");
  check_finite(lambda, "lambda");
  double sum = 0.0;
  for (const auto& [c, w] : criterion_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      raise(Errc::InvalidArgument, "criterion weight for " + std::string(criterion_id(c)) + " must be >= 0");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) raise(Errc::InvalidArgument, "criterion weights sum to " + std::to_string(sum));
}

std::vector<std::pair<Criterion, double>> phase_order(const CriterionWeights& weights) {
  std::vector<std::pair<Criterion, double>> phases;
  for (auto c : canonical_criterion_order()) {
    auto it = weights.find(c);
    if (it != weights.end() && it->second > 0.0) phases.emplace_back(c, it->second);
  }
  std::stable_sort(phases.begin(), phases.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return phases;
}

SampleManifest sample_separate(std::span<const AnnotatedDocument> corpus, const SeparateConfig& config,
                               std::uint64_t seed, const WeightMap* extra_weight) {
  config.validate();
  require_unique_ids(corpus);
  for (const auto& a : corpus) require_ratings(a);
  require_budget(corpus, config.target_tokens);
  if (extra_weight != nullptr) {
    if (extra_weight->size() != corpus.size()) raise(Errc::IdMismatch, "extra weights do not cover the corpus");
    for (const auto& a : corpus) {
      auto it = extra_weight->find(a.doc.id);
      if (it == extra_weight->end()) raise(Errc::IdMismatch, "no extra weight for '" + a.doc.id + "'");
      if (!(it->second > 0.0) || !std::isfinite(it->second)) {
        raise(Errc::NonPositiveWeight, "weight for '" + a.doc.id + "' must be positive");
      }
    }
  }

  SampleManifest manifest;
  manifest.seed = seed;
  std::vector<bool> taken(corpus.size(), false);
  const auto phase_seed = derive_seed(seed, "separate");

  for (const auto& [criterion, share] : phase_order(config.criterion_weights)) {
    const double budget = share * static_cast<double>(config.target_tokens);
    std::vector<Keyed> keys;
    std::vector<double> weights(corpus.size(), 0.0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (taken[i]) continue;
      double w = separate_weight((*corpus[i].ratings)[criterion], config.lambda, config.tau);
      if (extra_weight != nullptr) w *= extra_weight->at(corpus[i].doc.id);
      weights[i] = w;
      keys.push_back({exponential_log_key(phase_seed, criterion_index(criterion), corpus[i].doc.id, w), i});
    }
    sort_keys(keys, corpus);
    double phase_tokens = 0.0;
    for (const auto& k : keys) {
      if (phase_tokens >= budget) break;
      taken[k.index] = true;
      auto entry = make_entry(corpus[k.index], weights[k.index]);
      entry.phase = criterion;
      phase_tokens += static_cast<double>(entry.tokens);
      manifest.entries.push_back(std::move(entry));
    }
  }
  manifest.recompute_total();
  return manifest;
}

CriterionStats compute_mu_sigma(std::span<const AnnotatedDocument> corpus, Criterion criterion) {
  if (corpus.size() < 2) raise(Errc::TooFewDocuments, "criterion statistics need at least 2 documents");
  double mean = 0.0;
  for (const auto& a : corpus) mean += require_ratings(a)[criterion];
  mean /= static_cast<double>(corpus.size());
  double var = 0.0;
  for (const auto& a : corpus) {
    const double d = (*a.ratings)[criterion] - mean;
    var += d * d;
  }
  var /= static_cast<double>(corpus.size());
  return {mean, std::max(std::sqrt(var), kSigmaFloor)};
}

void AggregateConfig::fit_stats(std::span<const AnnotatedDocument> corpus) {
  for (auto c : canonical_criterion_order()) {
    const auto stats = compute_mu_sigma(corpus, c);
    mu[c] = stats.mu;
    sigma[c] = stats.sigma;
  }
}

double aggregate_weight(const RatingVector& ratings, const AggregateConfig& config) {
  double total = 0.0;
  for (auto c : canonical_criterion_order()) {
    auto kit = config.k.find(c);
    if (kit == config.k.end() || kit->second == 0.0) continue;
    auto mit = config.mu.find(c);
    auto sit = config.sigma.find(c);
    if (mit == config.mu.end() || sit == config.sigma.end()) {
      raise(Errc::MissingStats, "no mu/sigma for " + std::string(criterion_id(c)));
    }
    if (!(sit->second > 0.0)) raise(Errc::InvalidArgument, "sigma for " + std::string(criterion_id(c)) + " must be > 0");
    total += kit->second * std::exp((ratings[c] - mit->second) / sit->second);
  }
  return total;
}

WeightMap aggregate_weights(std::span<const AnnotatedDocument> corpus, const AggregateConfig& config) {
  WeightMap out;
  for (const auto& a : corpus) out[a.doc.id] = aggregate_weight(require_ratings(a), config);
  return out;
}

// ---------------------------------------------------------------------------
// Tag-based weights

void TagSamplerConfig::validate() const {
  check_finite(alpha, "alpha");
  check_finite(beta, "beta");
  check_finite(gamma, "gamma");
  for (const auto& [key, m] : overrides) {
    if (!(m > 0.0) || !std::isfinite(m)) raise(Errc::InvalidArgument, "override for '" + key + "' must be > 0");
  }
}

double tag_weight(const TagPath& path, const TagCounts& counts, const TagSamplerConfig& config) {
  const auto n1 = counts.count(path.level1);
  const auto n2 = counts.count(path.level1, path.level2);
  const auto n3 = counts.count(path);
  if (n1 == 0 || n2 == 0 || n3 == 0) {
    raise(Errc::ZeroCountPath, "tag path '" + join_tag_prefix(path, 3) + "' has a zero count");
  }

  double sum1 = 0.0;
  for (const auto& [_, n] : counts.level1)
    if (n > 0) sum1 += pow_count(n, config.alpha);
  double sum2 = 0.0;
  for (auto it = counts.level2.lower_bound({path.level1, ""}); it != counts.level2.end() && it->first.first == path.level1;
       ++it)
    if (it->second > 0) sum2 += pow_count(it->second, config.beta);
  double sum3 = 0.0;
  for (auto it = counts.level3.lower_bound(TagPath{path.level1, path.level2, ""});
       it != counts.level3.end() && it->first.level1 == path.level1 && it->first.level2 == path.level2; ++it)
    if (it->second > 0) sum3 += pow_count(it->second, config.gamma);

  double w = pow_count(n1, config.alpha) / sum1 * pow_count(n2, config.beta) / sum2 * pow_count(n3, config.gamma) / sum3;
  for (int level = 1; level <= 3; ++level) {
    if (auto it = config.overrides.find(join_tag_prefix(path, level)); it != config.overrides.end()) w *= it->second;
  }
  return w;
}

WeightMap tag_document_weights(std::span<const AnnotatedDocument> corpus, const TagSamplerConfig& config) {
  config.validate();
  TagCounts counts;
  for (const auto& a : corpus) {
    if (!a.tags) raise(Errc::MissingTags, "document '" + a.doc.id + "' has no tags");
    counts.add(*a.tags);
  }
  std::map<TagPath, double> per_leaf;
  WeightMap out;
  for (const auto& a : corpus) {
    auto [it, inserted] = per_leaf.try_emplace(*a.tags, 0.0);
    if (inserted) it->second = tag_weight(*a.tags, counts, config) / static_cast<double>(counts.count(*a.tags));
    out[a.doc.id] = it->second;
  }
  return out;
}

WeightMap combine_weights(const WeightMap& a, const WeightMap& b) {
  if (a.size() != b.size()) raise(Errc::IdMismatch, "weight maps differ in size");
  WeightMap out;
  auto ib = b.begin();
  for (const auto& [id, wa] : a) {
    if (ib->first != id) raise(Errc::IdMismatch, "weight maps differ at id '" + id + "'");
    out.emplace_hint(out.end(), id, wa * ib->second);
    ++ib;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection

SampleManifest sample_weighted(std::span<const AnnotatedDocument> corpus, const WeightMap& weights,
                               std::uint64_t target_tokens, std::uint64_t seed) {
  require_unique_ids(corpus);
  require_budget(corpus, target_tokens);
  const auto key_seed = derive_seed(seed, "weighted");
  std::vector<Keyed> keys;
  std::vector<double> w(corpus.size());
  keys.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto it = weights.find(corpus[i].doc.id);
    if (it == weights.end()) raise(Errc::NonPositiveWeight, "no weight for '" + corpus[i].doc.id + "'");
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      raise(Errc::NonPositiveWeight, "weight for '" + corpus[i].doc.id + "' must be positive and finite");
    }
    w[i] = it->second;
    keys.push_back({exponential_log_key(key_seed, 0, corpus[i].doc.id, w[i]), i});
  }
  sort_keys(keys, corpus);

  SampleManifest manifest;
  manifest.seed = seed;
  std::uint64_t tokens = 0;
  for (const auto& k : keys) {
    if (tokens >= target_tokens) break;
    manifest.entries.push_back(make_entry(corpus[k.index], w[k.index]));
    tokens += corpus[k.index].doc.token_count;
  }
  manifest.recompute_total();
  return manifest;
}

SampleManifest oversample_then_truncate(const SampleManifest& manifest, double keep_fraction, std::uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    raise(Errc::InvalidArgument, "keep_fraction must lie in (0, 1], got " + std::to_string(keep_fraction));
  }
  if (keep_fraction == 1.0) return manifest;

  const std::size_t n = manifest.entries.size();
  std::uint64_t total = 0;
  for (const auto& e : manifest.entries) total += e.effective_tokens();
  const double limit = keep_fraction * static_cast<double>(total);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(seed, "truncate"));
  shuffle(order, rng);

  std::vector<bool> keep(n, true);
  std::uint64_t kept = total;
  std::size_t removed = 0;
  while (static_cast<double>(kept) > limit && removed < n) {
    const auto i = order[removed++];
    keep[i] = false;
    kept -= manifest.entries[i].effective_tokens();
  }
  // Refill with removed entries that still fit under the limit.
  for (std::size_t r = 0; r < removed; ++r) {
    const auto i = order[r];
    const auto t = manifest.entries[i].effective_tokens();
    if (static_cast<double>(kept + t) <= limit) {
      keep[i] = true;
      kept += t;
    }
  }

  SampleManifest out = manifest;
  out.entries.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.entries.push_back(manifest.entries[i]);
  out.recompute_total();
  return out;
}

SampleManifest mix_edited(const SampleManifest& manifest, std::span<const AnnotatedDocument> annotations,
                          double fraction, std::uint64_t seed, bool allow_partial) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    raise(Errc::InvalidArgument, "edited fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  std::unordered_map<std::string_view, const AnnotatedDocument*> by_id;
  for (const auto& a : annotations) by_id.emplace(a.doc.id, &a);
  const auto edit_of = [&](const std::string& id) -> const AnnotatedDocument* {
    auto it = by_id.find(id);
    return it != by_id.end() && it->second->edited_text ? it->second : nullptr;
  };

  const std::size_t n = manifest.entries.size();
  auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (!allow_partial || edit_of(manifest.entries[i].id) != nullptr) pool.push_back(i);
  m = std::min(m, pool.size());

  const auto key_seed = derive_seed(seed, "edit_mix");
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(pool.size());
  for (auto i : pool) keyed.emplace_back(keyed_uniform(key_seed, 0, manifest.entries[i].id), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return manifest.entries[a.second].id < manifest.entries[b.second].id;
  });

  SampleManifest out = manifest;
  std::vector<std::string> missing;
  for (std::size_t r = 0; r < m; ++r) {
    auto& entry = out.entries[keyed[r].second];
    const auto* a = edit_of(entry.id);
    if (a == nullptr) {
      missing.push_back(entry.id);
      continue;
    }
    entry.edited = true;
    entry.edited_tokens = a->edited_token_count.value_or(count_whitespace_tokens(*a->edited_text));
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    raise(Errc::MissingEditedText, "no edited text for: " + list);
  }
  out.recompute_total();
  return out;
}

// ---------------------------------------------------------------------------
// Strategies

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::Separate, "separate"}, {Strategy::Aggregate, "aggregate"}, {Strategy::Tag, "tag"},
    {Strategy::AggTag, "agg_tag"},    {Strategy::SepTag, "sep_tag"},      {Strategy::AggEdit, "agg_edit"},
    {Strategy::AggTagEdit, "agg_tag_edit"},
};

CriterionWeights criterion_map_from_json(const json& j, const char* key) {
  if (!j.is_object()) raise(Errc::InvalidArgument, std::string(key) + " must be an object");
  CriterionWeights out;
  for (const auto& [name, v] : j.items()) {
    auto c = parse_criterion(name);
    if (!c) raise(Errc::InvalidArgument, "unknown criterion '" + name + "' in " + key);
    if (!v.is_number()) raise(Errc::InvalidArgument, std::string(key) + "." + name + " must be a number");
    out[*c] = v.get<double>();
  }
  return out;
}

json criterion_map_to_json(const CriterionWeights& m) {
  json j = json::object();
  for (const auto& [c, v] : m) j[std::string(criterion_id(c))] = v;
  return j;
}

double fraction_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) raise(Errc::InvalidArgument, "edited_fraction has a zero denominator");
      return num / den;
    } catch (const std::logic_error&) {
      raise(Errc::InvalidArgument, "edited_fraction '" + s + "' is not a number or p/q");
    }
  }
  raise(Errc::InvalidArgument, "edited_fraction must be a number or a \"p/q\" string");
}

double number(const json& j, const char* key) {
  if (!j.is_number()) raise(Errc::InvalidArgument, std::string(key) + " must be a number");
  return j.get<double>();
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  for (const auto& [v, name] : kStrategyNames)
    if (v == s) return name;
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (const auto& [v, n] : kStrategyNames)
    if (n == name) return v;
  return std::nullopt;
}

bool StrategyConfig::uses_ratings() const { return strategy != Strategy::Tag; }
bool StrategyConfig::uses_tags() const {
  return strategy == Strategy::Tag || strategy == Strategy::AggTag || strategy == Strategy::SepTag ||
         strategy == Strategy::AggTagEdit;
}
bool StrategyConfig::uses_edits() const { return strategy == Strategy::AggEdit || strategy == Strategy::AggTagEdit; }

StrategyConfig strategy_config_from_json(const json& j) {
  if (!j.is_object()) raise(Errc::InvalidArgument, "strategy config must be a JSON object");
  StrategyConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "strategy") {
      if (!v.is_string()) raise(Errc::InvalidArgument, "strategy must be a string");
      auto s = parse_strategy(v.get<std::string>());
      if (!s) raise(Errc::InvalidArgument, "unknown strategy '" + v.get<std::string>() + "'");
      c.strategy = *s;
    } else if (key == "lambda") {
      c.lambda = number(v, "lambda");
    } else if (key == "tau") {
      c.tau = number(v, "tau");
    } else if (key == "weights") {
      c.weights = criterion_map_from_json(v, "weights");
    } else if (key == "k") {
      c.k = criterion_map_from_json(v, "k");
    } else if (key == "mu") {
      c.mu = criterion_map_from_json(v, "mu");
    } else if (key == "sigma") {
      c.sigma = criterion_map_from_json(v, "sigma");
    } else if (key == "alpha") {
      c.alpha = number(v, "alpha");
    } else if (key == "beta") {
      c.beta = number(v, "beta");
    } else if (key == "gamma") {
      c.gamma = number(v, "gamma");
    } else if (key == "target_tokens") {
      if (!v.is_number_unsigned()) raise(Errc::InvalidArgument, "target_tokens must be a non-negative integer");
      c.target_tokens = v.get<std::uint64_t>();
    } else if (key == "keep_fraction") {
      c.keep_fraction = number(v, "keep_fraction");
    } else if (key == "edited_fraction") {
      c.edited_fraction = fraction_from_json(v);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) raise(Errc::InvalidArgument, "seed must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "allow_partial") {
      if (!v.is_boolean()) raise(Errc::InvalidArgument, "allow_partial must be a boolean");
      c.allow_partial = v.get<bool>();
    } else if (key == "overrides") {
      if (!v.is_object()) raise(Errc::InvalidArgument, "overrides must be an object");
      for (const auto& [prefix, m] : v.items()) c.overrides[prefix] = number(m, "overrides");
    } else {
      raise(Errc::InvalidArgument, "unknown strategy config key '" + key + "'");
    }
  }
  return c;
}

json strategy_config_to_json(const StrategyConfig& c) {
  json j = {{"strategy", std::string(strategy_name(c.strategy))},
            {"lambda", c.lambda},
            {"tau", c.tau},
            {"weights", criterion_map_to_json(c.weights)},
            {"k", criterion_map_to_json(c.k)},
            {"alpha", c.alpha},
            {"beta", c.beta},
            {"gamma", c.gamma},
            {"target_tokens", c.target_tokens},
            {"keep_fraction", c.keep_fraction},
            {"edited_fraction", c.edited_fraction},
            {"seed", c.seed},
            {"allow_partial", c.allow_partial},
            {"overrides", c.overrides}};
  if (!c.mu.empty()) j["mu"] = criterion_map_to_json(c.mu);
  if (!c.sigma.empty()) j["sigma"] = criterion_map_to_json(c.sigma);
  return j;
}

std::string config_fingerprint(const StrategyConfig& config) {
  return sha256_hex(strategy_config_to_json(config).dump());
}

SampleManifest run_strategy(std::span<const AnnotatedDocument> corpus, const StrategyConfig& config) {
  const auto seed = config.seed;
  TagSamplerConfig tag_config{config.alpha, config.beta, config.gamma, config.target_tokens, config.overrides};

  const auto aggregate_config = [&] {
    AggregateConfig agg;
    agg.k = config.k;
    agg.target_tokens = config.target_tokens;
    agg.fit_stats(corpus);
    for (const auto& [c, v] : config.mu) agg.mu[c] = v;
    for (const auto& [c, v] : config.sigma) agg.sigma[c] = v;
    return agg;
  };

  SampleManifest manifest;
  switch (config.strategy) {
    case Strategy::Separate:
    case Strategy::SepTag: {
      SeparateConfig sep{config.weights, config.lambda, config.tau, config.target_tokens};
      if (config.strategy == Strategy::SepTag) {
        const auto tags = tag_document_weights(corpus, tag_config);
        manifest = sample_separate(corpus, sep, seed, &tags);
      } else {
        manifest = sample_separate(corpus, sep, seed);
      }
      break;
    }
    case Strategy::Aggregate:
    case Strategy::AggEdit:
      manifest = sample_weighted(corpus, aggregate_weights(corpus, aggregate_config()), config.target_tokens, seed);
      break;
    case Strategy::Tag:
      manifest = sample_weighted(corpus, tag_document_weights(corpus, tag_config), config.target_tokens, seed);
      break;
    case Strategy::AggTag:
    case Strategy::AggTagEdit: {
      const auto combined =
          combine_weights(aggregate_weights(corpus, aggregate_config()), tag_document_weights(corpus, tag_config));
      manifest = sample_weighted(corpus, combined, config.target_tokens, seed);
      break;
    }
  }

  manifest = oversample_then_truncate(manifest, config.keep_fraction, seed);
  if (config.uses_edits()) manifest = mix_edited(manifest, corpus, config.edited_fraction, seed, config.allow_partial);
  manifest.seed = seed;
  manifest.strategy = std::string(strategy_name(config.strategy));
  manifest.config_fingerprint = config_fingerprint(config);
  return manifest;
}

std::string manifest_summary(const SampleManifest& manifest, std::span<const AnnotatedDocument> corpus) {
  std::unordered_map<std::string_view, const AnnotatedDocument*> by_id;
  for (const auto& a : corpus) by_id.emplace(a.doc.id, &a);

  std::map<std::string, std::uint64_t> per_phase, per_tag, per_source;
  std::uint64_t edited = 0;
  for (const auto& e : manifest.entries) {
    const auto t = e.effective_tokens();
    per_phase[e.phase ? std::string(criterion_id(*e.phase)) : std::string("(none)")] += t;
    const auto it = by_id.find(e.id);
    const AnnotatedDocument* a = it == by_id.end() ? nullptr : it->second;
    per_tag[a != nullptr && a->tags ? a->tags->level1 : std::string("(untagged)")] += t;
    per_source[a != nullptr && !a->doc.source.empty() ? a->doc.source : std::string("(unknown)")] += t;
    if (e.edited) ++edited;
  }

  std::ostringstream out;
  out << "strategy: " << manifest.strategy << "\n"
      << "seed: " << manifest.seed << "\n"
      << "config_fingerprint: " << manifest.config_fingerprint << "\n"
      << "entries: " << manifest.entries.size() << "\n"
      << "edited entries: " << edited << "\n"
      << "total tokens: " << manifest.total_tokens << "\n";
  const auto section = [&](const char* title, const std::map<std::string, std::uint64_t>& m) {
    std::size_t width = 0;
    for (const auto& [k, _] : m) width = std::max(width, k.size());
    out << "\n" << title << "\n";
    for (const auto& [k, v] : m) {
      const double share = manifest.total_tokens == 0 ? 0.0 : static_cast<double>(v) / static_cast<double>(manifest.total_tokens);
      out << "  " << std::left << std::setw(static_cast<int>(width)) << k << "  " << std::right << std::setw(12) << v
          << "  " << std::fixed << std::setprecision(4) << share << "\n";
    }
  };
  section("tokens per phase", per_phase);
  section("tokens per first-level tag", per_tag);
  section("tokens per source", per_source);
  return out.str();
}

}  // namespace decorate
