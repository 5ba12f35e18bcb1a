#include "decorate/remote_backend.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "decorate/errors.hpp"
#include "decorate/prompts.hpp"

namespace decorate {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

constexpr std::string_view kStrictSuffix =
    "\n\nYour previous reply could not be parsed. Reply again and follow the required output format exactly.";

std::optional<std::string> json_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig config;
  config.base_url = env_or_empty("DECORATE_API_BASE");
  config.api_key = env_or_empty("DECORATE_API_KEY");
  config.model = env_or_empty("DECORATE_MODEL");
  if (config.base_url.empty()) raise(Errc::InvalidArgument, "DECORATE_API_BASE is not set");
  if (config.model.empty()) raise(Errc::InvalidArgument, "DECORATE_MODEL is not set");
  if (const auto retries = env_or_empty("DECORATE_MAX_RETRIES"); !retries.empty()) {
    int value = -1;
    const auto [end, ec] = std::from_chars(retries.data(), retries.data() + retries.size(), value);
    if (ec != std::errc() || end != retries.data() + retries.size() || value < 0) {
      raise(Errc::InvalidArgument, "DECORATE_MAX_RETRIES must be a non-negative integer");
    }
    config.max_retries = value;
  }
  return config;
}

std::optional<Winner> parse_choice(std::string_view reply) {
  static const std::regex pattern(R"(Choice:\s*([12]))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(reply.begin(), reply.end(), m, pattern)) return std::nullopt;
  return m[1].str() == "1" ? Winner::A : Winner::B;
}

std::optional<nlohmann::json> parse_json_object(std::string_view reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  auto j = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.max_in_flight < 1) raise(Errc::InvalidArgument, "max_in_flight must be at least 1");
  if (config_.max_retries < 0) raise(Errc::InvalidArgument, "max_retries must be non-negative");
  if (!config_.sleep) config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) raise(Errc::InvalidArgument, "base URL needs a scheme: " + config_.base_url);
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string() : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

void RemoteBackend::acquire() {
  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
  ++in_flight_;
}

void RemoteBackend::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  slot_free_.notify_one();
}

std::string RemoteBackend::post_once(const std::string& body, int& status, bool& connection_error) {
  struct Slot {
    RemoteBackend& self;
    explicit Slot(RemoteBackend& s) : self(s) { self.acquire(); }
    ~Slot() { self.release(); }
  } slot(*this);

  ++requests_;
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    connection_error = true;
    status = 0;
    return httplib::to_string(res.error());
  }
  connection_error = false;
  status = res->status;
  return res->body;
}

std::string RemoteBackend::complete(const std::string& prompt) {
  const nlohmann::json request = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  const auto body = request.dump();

  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      config_.sleep(backoff);
      backoff = std::min(backoff * 2, config_.max_backoff);
    }
    int status = 0;
    bool connection_error = false;
    auto reply = post_once(body, status, connection_error);
    if (connection_error) {
      last_error = "connection error: " + reply;
      continue;
    }
    if (status == 429 || status >= 500) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) raise(Errc::TransportError, "HTTP " + std::to_string(status) + ": " + reply);

    auto j = nlohmann::json::parse(reply, nullptr, false);
    if (j.is_discarded()) raise(Errc::TransportError, "response body is not JSON");
    try {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      return content.is_string() ? content.get<std::string>() : std::string();
    } catch (const nlohmann::json::exception&) {
      raise(Errc::TransportError, "response lacks choices[0].message.content");
    }
  }
  raise(Errc::TransportError,
        "giving up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

template <typename T, typename Parse>
T RemoteBackend::ask(const std::string& prompt, const char* what, Parse parse) {
  auto reply = complete(prompt);
  if (auto parsed = parse(reply)) return *parsed;
  reply = complete(prompt + std::string(kStrictSuffix));
  if (auto parsed = parse(reply)) return *parsed;
  raise(Errc::UnparseableReply, std::string(what) + " reply lacks the required format: " + reply.substr(0, 200));
}

CompareResult RemoteBackend::compare_texts(Criterion criterion, std::string_view text_1, std::string_view text_2) {
  const auto prompt = prompts::render_compare(criterion, text_1, text_2);
  return ask<CompareResult>(prompt, "comparison", [](const std::string& reply) -> std::optional<CompareResult> {
    auto winner = parse_choice(reply);
    if (!winner) return std::nullopt;
    CompareResult out;
    out.winner = *winner;
    if (const auto why = reply.find("Why:"); why != std::string::npos) {
      auto r = reply.substr(why + 4);
      const auto first = r.find_first_not_of(" \t\n");
      out.rationale = first == std::string::npos ? std::string() : r.substr(first);
    }
    return out;
  });
}

TagChoice RemoteBackend::first_level_tag(std::string_view text, const TagTaxonomy&) {
  const auto prompt = prompts::render_first_level(text);
  return ask<TagChoice>(prompt, "first-level tagging", [](const std::string& reply) -> std::optional<TagChoice> {
    auto j = parse_json_object(reply);
    if (!j) return std::nullopt;
    auto tag = json_string(*j, "tag");
    if (!tag) return std::nullopt;
    return TagChoice{*tag, json_string(*j, "explanation").value_or("")};
  });
}

SubTagChoice RemoteBackend::sub_level_tags(std::string_view text, const TaxonomyNode& level1) {
  const auto prompt = prompts::render_sub_level(level1.name, prompts::subtree_json(level1), text);
  return ask<SubTagChoice>(prompt, "sub-level tagging", [](const std::string& reply) -> std::optional<SubTagChoice> {
    auto j = parse_json_object(reply);
    if (!j) return std::nullopt;
    auto l2 = json_string(*j, "second_level_tag");
    auto l3 = json_string(*j, "third_level_tag");
    if (!l2 || !l3) return std::nullopt;
    return SubTagChoice{*l2, *l3, json_string(*j, "explanation").value_or("")};
  });
}

std::string RemoteBackend::summarize_text(std::string_view text) {
  const auto prompt = prompts::render_summary(text);
  return ask<std::string>(prompt, "summary", [](const std::string& reply) -> std::optional<std::string> {
    auto j = parse_json_object(reply);
    if (!j) return std::nullopt;
    return json_string(*j, "summary");
  });
}

std::string RemoteBackend::edit_text(std::string_view text) {
  auto reply = complete(prompts::render_edit(text));
  const auto first = reply.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::string();
  const auto last = reply.find_last_not_of(" \t\r\n");
  return reply.substr(first, last - first + 1);
}

}  // namespace decorate
