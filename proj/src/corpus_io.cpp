#include "decorate/corpus_io.hpp"

#include <zlib.h>

#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

#include "decorate/errors.hpp"
#include "decorate/hashing.hpp"

namespace decorate {

namespace {

bool is_space(unsigned char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\v' || ch == '\f' || ch == '\r';
}

std::uint64_t count_utf8_chars(std::string_view text) {
  std::uint64_t n = 0;
  for (char ch : text) {
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
  }
  return n;
}

struct TokenizerRegistry {
  std::shared_mutex mutex;
  std::unordered_map<std::string, Tokenizer> extra;
};

TokenizerRegistry& registry() {
  static TokenizerRegistry r;
  return r;
}

std::string where(const std::filesystem::path& path, std::uint64_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

std::uint64_t count_whitespace_tokens(std::string_view text) {
  std::uint64_t n = 0;
  bool in_token = false;
  for (char ch : text) {
    const bool space = is_space(static_cast<unsigned char>(ch));
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

void register_tokenizer(const std::string& id, Tokenizer tokenizer) {
  if (id == kWhitespaceTokenizer || id == "utf8_chars") {
    raise(Errc::InvalidArgument, "tokenizer '" + id + "' is built in");
  }
  auto& r = registry();
  std::unique_lock lock(r.mutex);
  r.extra[id] = std::move(tokenizer);
}

bool has_tokenizer(std::string_view id) {
  if (id == kWhitespaceTokenizer || id == "utf8_chars") return true;
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.extra.contains(std::string(id));
}

std::uint64_t count_tokens(std::string_view text, std::string_view tokenizer_id) {
  if (tokenizer_id == kWhitespaceTokenizer) return count_whitespace_tokens(text);
  if (tokenizer_id == "utf8_chars") return count_utf8_chars(text);
  Tokenizer tokenizer;
  {
    auto& r = registry();
    std::shared_lock lock(r.mutex);
    auto it = r.extra.find(std::string(tokenizer_id));
    if (it == r.extra.end()) raise(Errc::UnknownTokenizer, std::string(tokenizer_id));
    tokenizer = it->second;
  }
  return tokenizer(text);
}

// ---------------------------------------------------------------------------

LineReader::LineReader(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) raise(Errc::MissingShard, path.string());
  handle_ = gzopen(path.c_str(), "rb");
  if (handle_ == nullptr) raise(Errc::IoFailure, "cannot open " + path.string());
  gzbuffer(static_cast<gzFile>(handle_), 1 << 17);
}

LineReader::~LineReader() {
  if (handle_ != nullptr) gzclose(static_cast<gzFile>(handle_));
}

bool LineReader::next(std::string& line) {
  line.clear();
  auto* file = static_cast<gzFile>(handle_);
  char buffer[1 << 14];
  bool any = false;
  while (gzgets(file, buffer, sizeof buffer) != nullptr) {
    any = true;
    line.append(buffer);
    if (!line.empty() && line.back() == '\n') break;
  }
  if (!any) return false;
  if (!line.empty() && line.back() == '\n') line.pop_back();
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_number_;
  return true;
}

// ---------------------------------------------------------------------------

DocumentStream::DocumentStream(CorpusManifest manifest, ReadOptions options)
    : manifest_(std::move(manifest)), options_(std::move(options)) {
  for (const auto& shard : manifest_.shards) {
    if (!std::filesystem::exists(shard)) raise(Errc::MissingShard, shard.string());
  }
  if (options_.tokenizer_id.empty()) options_.tokenizer_id = manifest_.tokenizer_id;
}

bool DocumentStream::open_next_shard() {
  if (shard_index_ >= manifest_.shards.size()) return false;
  reader_ = std::make_unique<LineReader>(manifest_.shards[shard_index_]);
  ++shard_index_;
  return true;
}

std::optional<Document> DocumentStream::next() {
  std::string line;
  while (true) {
    if (!reader_ && !open_next_shard()) return std::nullopt;
    if (!reader_->next(line)) {
      reader_.reset();
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto& shard = manifest_.shards[shard_index_ - 1];
    try {
      const json j = json::parse(line);
      Document doc = document_from_json(j, options_.tokenizer_id);
      ++emitted_;
      return doc;
    } catch (const std::exception& e) {
      const std::string message = where(shard, reader_->line_number()) + ": " + e.what();
      if (!options_.skip_malformed) raise(Errc::MalformedRecord, message);
      ++skipped_;
      if (options_.warn_on_skip) std::cerr << "warning: skipping malformed record at " << message << "\n";
    }
  }
}

std::vector<Document> read_documents(const CorpusManifest& manifest, const ReadOptions& options) {
  DocumentStream stream(manifest, options);
  std::vector<Document> out;
  out.reserve(manifest.total_documents);
  std::unordered_set<std::string> seen;
  while (auto doc = stream.next()) {
    if (!seen.insert(doc->id).second) {
      raise(Errc::MalformedRecord, "duplicate document id '" + doc->id + "'");
    }
    out.push_back(std::move(*doc));
  }
  if (stream.skipped() == 0 && out.size() != manifest.total_documents) {
    raise(Errc::MalformedRecord, "manifest lists " + std::to_string(manifest.total_documents) +
                                     " documents but shards hold " + std::to_string(out.size()));
  }
  return out;
}

CorpusManifest build_manifest(std::vector<std::filesystem::path> shards, std::string tokenizer_id) {
  if (!has_tokenizer(tokenizer_id)) raise(Errc::UnknownTokenizer, tokenizer_id);
  CorpusManifest manifest;
  manifest.shards = std::move(shards);
  manifest.tokenizer_id = std::move(tokenizer_id);
  Sha256 content;
  for (const auto& shard : manifest.shards) {
    if (!std::filesystem::exists(shard)) raise(Errc::MissingShard, shard.string());
    std::ifstream in(shard, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    content.update(bytes);
  }
  manifest.content_fingerprint = content.hex_digest();
  // Totals cover well-formed records only; strict reads still fail on the bad line.
  DocumentStream stream(manifest, ReadOptions{true, manifest.tokenizer_id, false});
  while (auto doc = stream.next()) {
    ++manifest.total_documents;
    manifest.total_tokens += doc->token_count;
  }
  return manifest;
}

bool verify_manifest(const CorpusManifest& manifest) {
  const CorpusManifest fresh = build_manifest(manifest.shards, manifest.tokenizer_id);
  return fresh.total_documents == manifest.total_documents &&
         fresh.total_tokens == manifest.total_tokens &&
         fresh.content_fingerprint == manifest.content_fingerprint;
}

json manifest_to_json(const CorpusManifest& manifest) {
  json shards = json::array();
  for (const auto& s : manifest.shards) shards.push_back(s.string());
  return json{{"shards", shards},
              {"total_documents", manifest.total_documents},
              {"total_tokens", manifest.total_tokens},
              {"tokenizer_id", manifest.tokenizer_id},
              {"content_fingerprint", manifest.content_fingerprint}};
}

CorpusManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    CorpusManifest m;
    for (const auto& s : j.at("shards")) {
      std::filesystem::path p = s.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      m.shards.push_back(p);
    }
    m.total_documents = j.at("total_documents").get<std::uint64_t>();
    m.total_tokens = j.at("total_tokens").get<std::uint64_t>();
    m.tokenizer_id = j.value("tokenizer_id", std::string(kWhitespaceTokenizer));
    m.content_fingerprint = j.value("content_fingerprint", std::string());
    return m;
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, std::string("manifest: ") + e.what());
  }
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + path.string());
  out << manifest_to_json(manifest).dump(2) << "\n";
  if (!out) raise(Errc::IoFailure, "write failed: " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::MissingShard, path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

CorpusManifest open_corpus(const std::filesystem::path& path, std::string tokenizer_id) {
  if (path.extension() == ".json") return load_manifest(path);
  return build_manifest({path}, std::move(tokenizer_id));
}

std::string id_sequence_fingerprint(std::span<const Document> documents) {
  Sha256 h;
  for (const auto& doc : documents) {
    h.update(doc.id);
    h.update(std::string_view("\n", 1));
  }
  return h.hex_digest();
}

// ---------------------------------------------------------------------------

json document_to_json(const Document& doc) {
  json j{{"id", doc.id}, {"text", doc.text}, {"source", doc.source}, {"token_count", doc.token_count}};
  if (!doc.metadata.empty()) j["meta"] = doc.metadata;
  return j;
}

Document document_from_json(const json& j, std::string_view tokenizer_id) {
  if (!j.is_object()) raise(Errc::MalformedRecord, "document record is not a JSON object");
  Document doc;
  try {
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.source = j.value("source", std::string());
    if (auto it = j.find("token_count"); it != j.end()) {
      doc.token_count = it->get<std::uint64_t>();
    } else {
      doc.token_count = count_tokens(doc.text, tokenizer_id);
    }
    if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
      doc.metadata = it->get<std::map<std::string, std::string>>();
    }
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, e.what());
  }
  if (doc.id.empty()) raise(Errc::MalformedRecord, "document with empty id");
  return doc;
}

json comparison_to_json(const ComparisonRecord& record) {
  json j{{"criterion", criterion_id(record.criterion)},
         {"doc_a", record.doc_a},
         {"doc_b", record.doc_b},
         {"winner", record.winner == Winner::A ? "A" : "B"},
         {"judge", record.judge}};
  if (record.rationale) j["rationale"] = *record.rationale;
  return j;
}

ComparisonRecord comparison_from_json(const json& j) {
  if (!j.is_object()) raise(Errc::MalformedRecord, "comparison record is not a JSON object");
  ComparisonRecord r;
  try {
    const auto criterion = j.at("criterion").get<std::string>();
    const auto parsed = parse_criterion(criterion);
    if (!parsed) raise(Errc::MalformedRecord, "unknown criterion '" + criterion + "'");
    r.criterion = *parsed;
    r.doc_a = j.at("doc_a").get<std::string>();
    r.doc_b = j.at("doc_b").get<std::string>();
    const auto winner = j.at("winner").get<std::string>();
    if (winner == "A") {
      r.winner = Winner::A;
    } else if (winner == "B") {
      r.winner = Winner::B;
    } else {
      raise(Errc::MalformedRecord, "winner must be \"A\" or \"B\"");
    }
    r.judge = j.value("judge", std::string());
    if (auto it = j.find("rationale"); it != j.end() && !it->is_null()) {
      r.rationale = it->get<std::string>();
    }
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, e.what());
  }
  try {
    validate(r);
  } catch (const Error& e) {
    raise(Errc::MalformedRecord, e.what());
  }
  return r;
}

json ratings_to_json(const RatingVector& ratings) {
  json j = json::object();
  for (Criterion c : canonical_criterion_order()) j[std::string(criterion_id(c))] = ratings[c];
  return j;
}

RatingVector ratings_from_json(const json& j) {
  if (!j.is_object()) raise(Errc::MalformedRecord, "ratings must be an object");
  std::map<Criterion, double> scores;
  for (const auto& [key, value] : j.items()) {
    const auto c = parse_criterion(key);
    if (!c) raise(Errc::MalformedRecord, "unknown criterion '" + key + "'");
    if (!value.is_number()) raise(Errc::MalformedRecord, "rating for '" + key + "' is not a number");
    scores[*c] = value.get<double>();
  }
  try {
    return RatingVector::from_map(scores);
  } catch (const Error& e) {
    raise(Errc::MalformedRecord, e.what());
  }
}

json annotation_to_json(const AnnotatedDocument& a) {
  validate(a);
  json j{{"id", a.doc.id}};
  if (!a.doc.text.empty()) j["text"] = a.doc.text;
  if (!a.doc.source.empty()) j["source"] = a.doc.source;
  if (!a.doc.text.empty() || a.doc.token_count != 0) j["token_count"] = a.doc.token_count;
  if (!a.doc.metadata.empty()) j["meta"] = a.doc.metadata;
  if (a.ratings) j["ratings"] = ratings_to_json(*a.ratings);
  if (a.tags) j["tags"] = json::array({a.tags->level1, a.tags->level2, a.tags->level3});
  if (a.edited_text) {
    j["edited"] = *a.edited_text;
    j["edited_token_count"] = *a.edited_token_count;
  }
  return j;
}

AnnotatedDocument annotation_from_json(const json& j) {
  if (!j.is_object()) raise(Errc::MalformedRecord, "annotation record is not a JSON object");
  AnnotatedDocument a;
  try {
    a.doc.id = j.at("id").get<std::string>();
    a.doc.text = j.value("text", std::string());
    a.doc.source = j.value("source", std::string());
    a.doc.token_count = j.value("token_count", std::uint64_t{0});
    if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
      a.doc.metadata = it->get<std::map<std::string, std::string>>();
    }
    if (auto it = j.find("ratings"); it != j.end() && !it->is_null()) a.ratings = ratings_from_json(*it);
    if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
      if (!it->is_array() || it->size() != 3) raise(Errc::MalformedRecord, "tags must be [l1, l2, l3]");
      a.tags = TagPath{(*it)[0].get<std::string>(), (*it)[1].get<std::string>(),
                       (*it)[2].get<std::string>()};
    }
    if (auto it = j.find("edited"); it != j.end() && !it->is_null()) {
      a.edited_text = it->get<std::string>();
      auto count = j.find("edited_token_count");
      if (count == j.end()) raise(Errc::MalformedRecord, "edited text without edited_token_count");
      a.edited_token_count = count->get<std::uint64_t>();
    } else if (j.contains("edited_token_count")) {
      raise(Errc::MalformedRecord, "edited_token_count without edited text");
    }
  } catch (const json::exception& e) {
    raise(Errc::MalformedRecord, e.what());
  }
  if (a.doc.id.empty()) raise(Errc::MalformedRecord, "annotation with empty id");
  return a;
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

// ---------------------------------------------------------------------------

std::size_t write_json_lines(std::span<const json> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot write " + path.string());
  for (const auto& r : records) out << dump_line(r) << '\n';
  out.flush();
  if (!out) raise(Errc::IoFailure, "write failed: " + path.string());
  return records.size();
}

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::uint64_t)>& visit,
                        const ReadOptions& options) {
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
    } catch (const std::exception& e) {
      const std::string message = where(path, reader.line_number()) + ": " + e.what();
      if (!options.skip_malformed) raise(Errc::MalformedRecord, message);
      if (options.warn_on_skip) std::cerr << "warning: skipping malformed record at " << message << "\n";
      continue;
    }
    try {
      visit(j, reader.line_number());
    } catch (const Error& e) {
      if (e.code() != Errc::MalformedRecord) throw;
      const std::string message = where(path, reader.line_number()) + ": " + e.what();
      if (!options.skip_malformed) raise(Errc::MalformedRecord, message);
      if (options.warn_on_skip) std::cerr << "warning: skipping malformed record at " << message << "\n";
    }
  }
}

std::size_t write_documents(std::span<const Document> documents, const std::filesystem::path& path) {
  std::vector<json> records;
  records.reserve(documents.size());
  for (const auto& d : documents) records.push_back(document_to_json(d));
  return write_json_lines(records, path);
}

std::size_t write_annotations(std::span<const AnnotatedDocument> annotations,
                              const std::filesystem::path& path) {
  std::vector<json> records;
  records.reserve(annotations.size());
  for (const auto& a : annotations) records.push_back(annotation_to_json(a));
  return write_json_lines(records, path);
}

std::vector<AnnotatedDocument> read_annotations(const std::filesystem::path& path,
                                                const ReadOptions& options) {
  std::vector<AnnotatedDocument> out;
  for_each_json_line(
      path,
      [&](const json& j, std::uint64_t) {
        if (j.contains("skipped")) return;
        out.push_back(annotation_from_json(j));
      },
      options);
  return out;
}

std::size_t write_comparisons(std::span<const ComparisonRecord> records, const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(comparison_to_json(r));
  return write_json_lines(lines, path);
}

std::vector<ComparisonRecord> read_comparisons(const std::filesystem::path& path, const ReadOptions& options) {
  std::vector<ComparisonRecord> out;
  for_each_json_line(
      path, [&](const json& j, std::uint64_t) { out.push_back(comparison_from_json(j)); }, options);
  return out;
}

namespace {

template <typename T>
void merge_field(std::optional<T>& into, const std::optional<T>& from, const std::string& id,
                 std::string_view field) {
  if (!from) return;
  if (into && !(*into == *from)) {
    raise(Errc::MalformedRecord, "conflicting " + std::string(field) + " for document '" + id + "'");
  }
  into = from;
}

void merge_document(Document& into, const Document& from) {
  if (!from.text.empty()) {
    if (!into.text.empty() && into.text != from.text) {
      raise(Errc::MalformedRecord, "conflicting text for document '" + into.id + "'");
    }
    into.text = from.text;
    into.token_count = from.token_count;
  } else if (into.token_count == 0) {
    into.token_count = from.token_count;
  }
  if (!from.source.empty()) {
    if (!into.source.empty() && into.source != from.source) {
      raise(Errc::MalformedRecord, "conflicting source for document '" + into.id + "'");
    }
    into.source = from.source;
  }
  for (const auto& [k, v] : from.metadata) into.metadata.insert_or_assign(k, v);
}

}  // namespace

std::vector<AnnotatedDocument> merge_annotations(std::vector<AnnotatedDocument> base,
                                                 std::span<const AnnotatedDocument> overlay) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(base.size() + overlay.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!index.emplace(base[i].doc.id, i).second) {
      raise(Errc::MalformedRecord, "duplicate document id '" + base[i].doc.id + "'");
    }
  }
  for (const auto& item : overlay) {
    auto it = index.find(item.doc.id);
    if (it == index.end()) {
      index.emplace(item.doc.id, base.size());
      base.push_back(item);
      continue;
    }
    auto& target = base[it->second];
    merge_document(target.doc, item.doc);
    merge_field(target.ratings, item.ratings, item.doc.id, "ratings");
    merge_field(target.tags, item.tags, item.doc.id, "tags");
    merge_field(target.edited_text, item.edited_text, item.doc.id, "edited text");
    merge_field(target.edited_token_count, item.edited_token_count, item.doc.id, "edited_token_count");
  }
  return base;
}

}  // namespace decorate
