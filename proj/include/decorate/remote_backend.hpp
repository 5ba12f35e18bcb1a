#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "decorate/annotator.hpp"

namespace decorate {

struct RemoteConfig {
  std::string base_url;  // e.g. "https://api.example.com/v1"
  std::string api_key;
  std::string model;
  int max_retries = 3;   // transport retries per request; requests per attempt <= max_retries + 1
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::chrono::seconds timeout{60};
  int max_in_flight = 4;
  // Injected so tests need not wait.
  std::function<void(std::chrono::milliseconds)> sleep;

  // Reads DECORATE_API_BASE, DECORATE_API_KEY, DECORATE_MODEL and the
  // optional DECORATE_MAX_RETRIES. Throws InvalidArgument when the base URL or
  // model is unset or the retry count is malformed.
  static RemoteConfig from_env();
};

// Reply parsing, exposed for tests. Each returns nullopt when the reply does
// not carry the required structure.
std::optional<Winner> parse_choice(std::string_view reply);
std::optional<nlohmann::json> parse_json_object(std::string_view reply);

// Chat-completion client. Every prompt is sent as a single user message with
// temperature 0. Connection errors, 429 and 5xx are retried with capped
// exponential backoff; other statuses fail immediately with TransportError.
// An unparseable reply is re-asked once with a stricter suffix, then
// UnparseableReply is raised.
class RemoteBackend final : public AnnotatorBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string judge() const override { return config_.model; }

  CompareResult compare_texts(Criterion criterion, std::string_view text_1, std::string_view text_2) override;
  TagChoice first_level_tag(std::string_view text, const TagTaxonomy& taxonomy) override;
  SubTagChoice sub_level_tags(std::string_view text, const TaxonomyNode& level1) override;
  std::string summarize_text(std::string_view text) override;
  std::string edit_text(std::string_view text) override;

  // Raw completion for one prompt.
  std::string complete(const std::string& prompt);

  // HTTP requests issued so far, retries included.
  std::uint64_t requests_sent() const { return requests_.load(); }

 private:
  template <typename T, typename Parse>
  T ask(const std::string& prompt, const char* what, Parse parse);

  std::string post_once(const std::string& body, int& status, bool& connection_error);
  void acquire();
  void release();

  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::atomic<std::uint64_t> requests_{0};
  std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
};

}  // namespace decorate
