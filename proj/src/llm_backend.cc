#include "batchqa/llm_backend.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "batchqa/parser.h"

#ifdef BATCHQA_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace batchqa {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::chrono::milliseconds elapsed_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

// Offsets of double quotes that delimit strings (not escaped ones).
std::vector<std::size_t> delimiter_quotes(std::string_view text) {
  std::vector<std::size_t> positions;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string && escaped) {
      escaped = false;
    } else if (in_string && c == '\\') {
      escaped = true;
    } else if (c == '"') {
      in_string = !in_string;
      positions.push_back(i);
    }
  }
  return positions;
}

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // "" or "/v1"
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "endpoint must be an absolute URL: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kConfigError, "unsupported scheme in endpoint: " + url);
  }
#ifndef BATCHQA_WITH_OPENSSL
  if (scheme == "https") {
    throw Error(ErrorCode::kConfigError, "built without TLS support: " + url);
  }
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint endpoint;
  endpoint.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    endpoint.base_path = url.substr(path_start);
    while (!endpoint.base_path.empty() && endpoint.base_path.back() == '/') {
      endpoint.base_path.pop_back();
    }
  }
  return endpoint;
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

Rng& jitter_rng() {
  thread_local Rng rng(std::random_device{}() ^
                       (static_cast<std::uint64_t>(std::random_device{}()) << 32));
  return rng;
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttpChat: return "http_chat";
    case BackendKind::kMockOracle: return "mock_oracle";
    case BackendKind::kMockCorruptor: return "mock_corruptor";
  }
  return "unknown";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view text) {
  if (text == "http_chat") return BackendKind::kHttpChat;
  if (text == "mock_oracle") return BackendKind::kMockOracle;
  if (text == "mock_corruptor") return BackendKind::kMockCorruptor;
  return std::nullopt;
}

std::string_view to_string(CorruptMode mode) {
  switch (mode) {
    case CorruptMode::kTruncate: return "truncate";
    case CorruptMode::kQuoteMismatch: return "quote-mismatch";
    case CorruptMode::kKeyRename: return "key-rename";
    case CorruptMode::kDropRandomKeys: return "drop-random-keys";
    case CorruptMode::kNonJsonPreamble: return "non-json-preamble";
  }
  return "unknown";
}

std::optional<CorruptMode> corrupt_mode_from_string(std::string_view text) {
  for (auto mode : {CorruptMode::kTruncate, CorruptMode::kQuoteMismatch,
                    CorruptMode::kKeyRename, CorruptMode::kDropRandomKeys,
                    CorruptMode::kNonJsonPreamble}) {
    if (to_string(mode) == text) return mode;
  }
  return std::nullopt;
}

void BackendConfig::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "backend '" + label() + "': " + what);
  };
  if (max_parallel < 1) fail("max_parallel must be >= 1");
  if (!(timeout_seconds > 0.0)) fail("timeout must be > 0");
  if (retry.max_retries < 0) fail("max_retries must be >= 0");
  if (retry.multiplier < 1.0) fail("backoff multiplier must be >= 1");
  if (kind == BackendKind::kHttpChat) {
    if (endpoint.empty()) fail("http_chat needs an endpoint");
    split_endpoint(endpoint);
  }
  if (kind == BackendKind::kMockCorruptor &&
      !(corrupt_probability >= 0.0 && corrupt_probability <= 1.0)) {
    fail("corrupt probability must be in [0, 1]");
  }
}

std::string oracle_response(const ReferenceTable& references,
                            const RenderedPrompt& prompt) {
  std::vector<CanonicalAnswer> answers;
  answers.reserve(prompt.question_ids.size());
  for (const auto& qid : prompt.question_ids) {
    const ReferenceAnswer* ref = references.find(prompt.transcript_id, qid);
    if (ref == nullptr) {
      throw Error(ErrorCode::kBadRequest, "oracle has no reference for (" +
                                              prompt.transcript_id + ", " + qid + ")");
    }
    answers.push_back({ref->judgment, {}, ref->navigation});
  }
  return serialize_canonical(answers);
}

MockOracleBackend::MockOracleBackend(std::shared_ptr<const ReferenceTable> references)
    : references_(std::move(references)) {
  if (!references_) throw Error(ErrorCode::kConfigError, "oracle needs references");
}

Completion MockOracleBackend::complete(const RenderedPrompt& prompt) {
  const auto start = Clock::now();
  Completion completion;
  completion.raw_text = oracle_response(*references_, prompt);
  completion.request_id = "oracle-" + prompt.transcript_id;
  completion.latency = elapsed_since(start);
  return completion;
}

std::string corrupt_response(std::string_view text, CorruptMode mode, Rng& rng) {
  switch (mode) {
    case CorruptMode::kTruncate: {
      if (text.size() < 2) return {};
      const auto cut = static_cast<std::size_t>(
          rng.between(1, static_cast<std::int64_t>(text.size()) - 1));
      return std::string(text.substr(0, cut));
    }
    case CorruptMode::kQuoteMismatch: {
      const auto quotes = delimiter_quotes(text);
      if (quotes.empty()) return std::string(text);
      std::string out(text);
      out.erase(quotes[rng.below(quotes.size())], 1);
      return out;
    }
    case CorruptMode::kKeyRename:
    case CorruptMode::kDropRandomKeys: {
      auto doc = ordered_json::parse(text, nullptr, false);
      if (!doc.is_object() || doc.empty()) return std::string(text);
      std::vector<std::string> keys;
      for (const auto& [key, value] : doc.items()) keys.push_back(key);
      ordered_json out = ordered_json::object();
      if (mode == CorruptMode::kKeyRename) {
        const auto victim = rng.below(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
          const std::string key = i == victim ? "Answer" + std::to_string(i + 1) : keys[i];
          out[key] = doc[keys[i]];
        }
      } else {
        // Drop between one and all-but-one entries; an empty object would be a
        // shape error rather than missing keys.
        const std::size_t max_drop = std::max<std::size_t>(1, keys.size() - 1);
        const auto drop = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(max_drop)));
        auto victims = rng.sample_indices(keys.size(), drop);
        std::sort(victims.begin(), victims.end());
        for (std::size_t i = 0; i < keys.size(); ++i) {
          if (!std::binary_search(victims.begin(), victims.end(), i)) out[keys[i]] = doc[keys[i]];
        }
      }
      return out.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
    }
    case CorruptMode::kNonJsonPreamble:
      return "Sure! Here are the answers in the requested format:\n```json\n" +
             std::string(text) + "\n```\nLet me know if you need anything else.";
  }
  return std::string(text);
}

MockCorruptorBackend::MockCorruptorBackend(
    std::shared_ptr<const ReferenceTable> references, double probability,
    CorruptMode mode, std::uint64_t seed)
    : oracle_(std::move(references)), probability_(probability), mode_(mode), seed_(seed) {}

Completion MockCorruptorBackend::complete(const RenderedPrompt& prompt) {
  Completion completion = oracle_.complete(prompt);
  Rng rng = Rng::for_stream(seed_, {fnv1a64(prompt.text), fnv1a64(prompt.transcript_id)});
  if (rng.bernoulli(probability_)) {
    completion.raw_text = corrupt_response(completion.raw_text, mode_, rng);
  }
  completion.request_id = "corruptor-" + prompt.transcript_id;
  return completion;
}

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!config_.credentials_env.empty()) {
    if (const char* value = std::getenv(config_.credentials_env.c_str())) api_key_ = value;
  }
}

std::chrono::milliseconds HttpChatBackend::backoff_ceiling(const RetryPolicy& policy,
                                                           int retry) {
  const double ms = static_cast<double>(policy.initial_backoff.count()) *
                    std::pow(policy.multiplier, retry);
  const double capped = std::min(ms, static_cast<double>(policy.max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

Completion HttpChatBackend::complete(const RenderedPrompt& prompt) {
  if (!config_.credentials_env.empty() && api_key_.empty()) {
    throw BackendError(ErrorCode::kAuthError,
                       "environment variable " + config_.credentials_env + " is not set",
                       0);
  }
  const Endpoint endpoint = split_endpoint(config_.endpoint);
  const std::string path = endpoint.base_path + "/chat/completions";

  json body = {
      {"model", config_.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
      {"temperature", config_.temperature},
  };
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));

  const auto start = Clock::now();
  std::string last_error;
  const int attempts_allowed = config_.retry.max_retries + 1;
  for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    std::optional<std::chrono::milliseconds> retry_after;
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      auto reply = json::parse(res->body, nullptr, false);
      const json* content = nullptr;
      if (reply.is_object() && reply.contains("choices") && reply["choices"].is_array() &&
          !reply["choices"].empty()) {
        const auto& choice = reply["choices"][0];
        if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
            choice["message"].contains("content")) {
          content = &choice["message"]["content"];
        }
      }
      if (content != nullptr && (content->is_string() || content->is_null())) {
        Completion completion;
        completion.raw_text = content->is_string() ? content->get<std::string>() : "";
        completion.latency = elapsed_since(start);
        completion.attempts = attempt;
        if (reply.contains("id") && reply["id"].is_string()) {
          completion.request_id = reply["id"].get<std::string>();
        } else if (res->has_header("x-request-id")) {
          completion.request_id = res->get_header_value("x-request-id");
        }
        if (reply.contains("usage") && reply["usage"].is_object()) {
          const auto& usage = reply["usage"];
          TokenUsage tokens;
          tokens.prompt_tokens = usage.value("prompt_tokens", 0);
          tokens.completion_tokens = usage.value("completion_tokens", 0);
          completion.usage = tokens;
        }
        return completion;
      }
      last_error = "malformed chat-completions response body";
    } else if (res->status == 401 || res->status == 403) {
      throw BackendError(ErrorCode::kAuthError,
                         "HTTP " + std::to_string(res->status) + ": " + res->body, attempt);
    } else if (!retryable_status(res->status)) {
      throw BackendError(ErrorCode::kBadRequest,
                         "HTTP " + std::to_string(res->status) + ": " + res->body, attempt);
    } else {
      last_error = "HTTP " + std::to_string(res->status);
      if (res->has_header("Retry-After")) {
        const auto value = res->get_header_value("Retry-After");
        char* end = nullptr;
        const double seconds = std::strtod(value.c_str(), &end);
        if (end != value.c_str() && seconds >= 0) {
          retry_after = std::chrono::milliseconds(static_cast<long long>(seconds * 1000));
        }
      }
    }

    if (attempt == attempts_allowed) break;
    auto ceiling = backoff_ceiling(config_.retry, attempt - 1);
    auto delay = std::chrono::milliseconds(
        ceiling.count() > 0 ? static_cast<long long>(jitter_rng().below(ceiling.count() + 1)) : 0);
    if (retry_after) delay = std::min(std::max(delay, *retry_after), config_.retry.max_backoff);
    std::this_thread::sleep_for(delay);
  }
  throw BackendError(ErrorCode::kTransportError,
                     last_error + " (after " + std::to_string(attempts_allowed) + " attempts)",
                     attempts_allowed);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      std::shared_ptr<const ReferenceTable> references) {
  config.validate();
  switch (config.kind) {
    case BackendKind::kHttpChat:
      return std::make_unique<HttpChatBackend>(config);
    case BackendKind::kMockOracle:
      return std::make_unique<MockOracleBackend>(std::move(references));
    case BackendKind::kMockCorruptor:
      return std::make_unique<MockCorruptorBackend>(std::move(references),
                                                    config.corrupt_probability,
                                                    config.corrupt_mode, config.seed);
  }
  throw Error(ErrorCode::kConfigError, "unknown backend kind");
}

std::vector<BatchItem> complete_batch(Backend& backend,
                                      std::span<const RenderedPrompt> prompts,
                                      int max_parallel, const BatchCallback& on_done) {
  if (max_parallel < 1) {
    throw Error(ErrorCode::kConfigError, "max_parallel must be >= 1");
  }
  std::vector<BatchItem> results(prompts.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex callback_mutex;
  std::exception_ptr callback_error;

  auto run_one = [&](std::size_t index) {
    BatchItem item;
    try {
      item.completion = backend.complete(prompts[index]);
      item.attempts = item.completion->attempts;
    } catch (const BackendError& e) {
      item.error_code = e.code();
      item.error_message = e.detail();
      item.attempts = e.attempts();
    } catch (const Error& e) {
      item.error_code = e.code();
      item.error_message = e.detail();
      item.attempts = 1;
    } catch (const std::exception& e) {
      item.error_code = ErrorCode::kTransportError;
      item.error_message = e.what();
      item.attempts = 1;
    }
    results[index] = std::move(item);
    if (on_done) {
      std::lock_guard lock(callback_mutex);
      if (callback_error) return;
      try {
        on_done(index, results[index]);
      } catch (...) {
        callback_error = std::current_exception();
        stop = true;
      }
    }
  };

  auto worker = [&]() {
    while (!stop) {
      const std::size_t index = next.fetch_add(1);
      if (index >= prompts.size()) return;
      run_one(index);
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(max_parallel),
                                             prompts.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
  }
  if (callback_error) std::rethrow_exception(callback_error);
  return results;
}

}  // namespace batchqa
