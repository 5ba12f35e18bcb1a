#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "decorate/core_types.hpp"

namespace decorate {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Tokenizers

inline constexpr std::string_view kWhitespaceTokenizer = "whitespace";

using Tokenizer = std::function<std::uint64_t(std::string_view)>;

// Number of maximal runs of non-whitespace bytes (ASCII whitespace).
std::uint64_t count_whitespace_tokens(std::string_view text);

// Registers an additional tokenizer. "whitespace" and "utf8_chars" are
// built in and cannot be replaced.
void register_tokenizer(const std::string& id, Tokenizer tokenizer);
bool has_tokenizer(std::string_view id);

// Throws UnknownTokenizer.
std::uint64_t count_tokens(std::string_view text, std::string_view tokenizer_id);

// ---------------------------------------------------------------------------
// Manifests and streaming

struct CorpusManifest {
  std::vector<std::filesystem::path> shards;
  std::uint64_t total_documents = 0;
  std::uint64_t total_tokens = 0;
  std::string tokenizer_id{kWhitespaceTokenizer};
  std::string content_fingerprint;

  bool operator==(const CorpusManifest&) const = default;
};

struct ReadOptions {
  // Count and log malformed lines instead of failing.
  bool skip_malformed = false;
  // Tokenizer used when a record lacks token_count.
  std::string tokenizer_id{kWhitespaceTokenizer};
  // Emit a warning on stderr per skipped line.
  bool warn_on_skip = true;
};

// Reads newline-delimited records from a plain or gzip-compressed file.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at end of file. Trailing '\r' is stripped.
  bool next(std::string& line);
  std::uint64_t line_number() const { return line_number_; }

 private:
  void* handle_ = nullptr;
  std::uint64_t line_number_ = 0;
};

// Documents of every shard, in shard order then line order.
class DocumentStream {
 public:
  DocumentStream(CorpusManifest manifest, ReadOptions options = {});

  std::optional<Document> next();
  std::uint64_t skipped() const { return skipped_; }

 private:
  bool open_next_shard();

  CorpusManifest manifest_;
  ReadOptions options_;
  std::size_t shard_index_ = 0;
  std::unique_ptr<LineReader> reader_;
  std::uint64_t emitted_ = 0;
  std::uint64_t skipped_ = 0;
};

// Throws MissingShard, MalformedRecord, or MalformedRecord when the number of
// documents differs from total_documents (unless malformed lines were skipped).
std::vector<Document> read_documents(const CorpusManifest& manifest, const ReadOptions& options = {});

// Scans the shards and fills totals and fingerprint.
CorpusManifest build_manifest(std::vector<std::filesystem::path> shards,
                              std::string tokenizer_id = std::string(kWhitespaceTokenizer));

// Recomputes totals and fingerprint and compares them with the stored ones.
bool verify_manifest(const CorpusManifest& manifest);

json manifest_to_json(const CorpusManifest& manifest);
// Shard paths are resolved against base_dir when relative.
CorpusManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir = {});
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

// A ".json" path is read as a manifest; anything else is treated as a single
// document shard and indexed on the fly.
CorpusManifest open_corpus(const std::filesystem::path& path,
                           std::string tokenizer_id = std::string(kWhitespaceTokenizer));

// Hex digest of the emitted id sequence, used to check ordering stability.
std::string id_sequence_fingerprint(std::span<const Document> documents);

// ---------------------------------------------------------------------------
// Record codecs

json document_to_json(const Document& doc);
Document document_from_json(const json& j, std::string_view tokenizer_id = kWhitespaceTokenizer);

json comparison_to_json(const ComparisonRecord& record);
ComparisonRecord comparison_from_json(const json& j);

json ratings_to_json(const RatingVector& ratings);
RatingVector ratings_from_json(const json& j);

json annotation_to_json(const AnnotatedDocument& annotated);
AnnotatedDocument annotation_from_json(const json& j);

// Single-line serialization; invalid UTF-8 is replaced rather than rejected.
std::string dump_line(const json& j);

// ---------------------------------------------------------------------------
// Files

// Writes one JSON record per line. Throws IoFailure.
std::size_t write_json_lines(std::span<const json> records, const std::filesystem::path& path);

// Calls visit(record, line_number) for every line. Throws MissingShard when the
// file is absent and MalformedRecord on a line that is not a JSON object.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::uint64_t)>& visit,
                        const ReadOptions& options = {});

std::size_t write_documents(std::span<const Document> documents, const std::filesystem::path& path);

std::size_t write_annotations(std::span<const AnnotatedDocument> annotations,
                              const std::filesystem::path& path);
// Records carrying a "skipped" field are ignored.
std::vector<AnnotatedDocument> read_annotations(const std::filesystem::path& path,
                                                const ReadOptions& options = {});

std::size_t write_comparisons(std::span<const ComparisonRecord> records,
                              const std::filesystem::path& path);
std::vector<ComparisonRecord> read_comparisons(const std::filesystem::path& path,
                                               const ReadOptions& options = {});

// Field-wise union by document id. Present fields must agree; documents keep
// the order of first appearance. Throws MalformedRecord on a conflict.
std::vector<AnnotatedDocument> merge_annotations(std::vector<AnnotatedDocument> base,
                                                 std::span<const AnnotatedDocument> overlay);

}  // namespace decorate
