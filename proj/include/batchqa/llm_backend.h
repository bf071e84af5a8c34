#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "batchqa/error.h"
#include "batchqa/metrics.h"
#include "batchqa/prompt.h"
#include "batchqa/rng.h"

namespace batchqa {

enum class BackendKind { kHttpChat, kMockOracle, kMockCorruptor };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> backend_kind_from_string(std::string_view text);

enum class CorruptMode {
  kTruncate,        // cut at a random interior byte
  kQuoteMismatch,   // drop one double quote
  kKeyRename,       // rename one "Q{i}" key
  kDropRandomKeys,  // remove at least one answer entry
  kNonJsonPreamble  // wrap the object in prose and a code fence
};

std::string_view to_string(CorruptMode mode);
std::optional<CorruptMode> corrupt_mode_from_string(std::string_view text);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  double multiplier = 2.0;
};

struct BackendConfig {
  std::string name;  // label used in reports; defaults to model_name
  BackendKind kind = BackendKind::kMockOracle;
  std::string endpoint;         // http_chat: base URL, e.g. https://host/v1
  std::string model_name = "mock";
  std::string credentials_env;  // env var holding the API key; empty = none
  double timeout_seconds = 120.0;
  RetryPolicy retry;
  int max_parallel = 4;
  double temperature = 0.0;
  // mock_corruptor
  double corrupt_probability = 0.0;
  CorruptMode corrupt_mode = CorruptMode::kTruncate;
  std::uint64_t seed = 0;

  const std::string& label() const { return name.empty() ? model_name : name; }
  // Throws kConfigError.
  void validate() const;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct Completion {
  std::string raw_text;  // may be empty
  std::chrono::milliseconds latency{0};
  std::string request_id;
  std::optional<TokenUsage> usage;
  int attempts = 1;
};

// Raised by http backends; carries the number of attempts made.
class BackendError : public Error {
 public:
  BackendError(ErrorCode code, const std::string& message, int attempts)
      : Error(code, message), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Blocking. Must be safe to call from several threads at once.
  virtual Completion complete(const RenderedPrompt& prompt) = 0;
};

// The canonical answer object for a prompt's questions, straight from the
// reference table. Pure function of (references, transcript, question ids).
std::string oracle_response(const ReferenceTable& references,
                            const RenderedPrompt& prompt);

class MockOracleBackend : public Backend {
 public:
  explicit MockOracleBackend(std::shared_ptr<const ReferenceTable> references);
  Completion complete(const RenderedPrompt& prompt) override;

 private:
  std::shared_ptr<const ReferenceTable> references_;
};

// Oracle output corrupted with probability p. The coin and the corruption
// site come from a substream keyed by (seed, prompt text), so results do not
// depend on call order or thread scheduling.
class MockCorruptorBackend : public Backend {
 public:
  MockCorruptorBackend(std::shared_ptr<const ReferenceTable> references,
                       double probability, CorruptMode mode,
                       std::uint64_t seed);
  Completion complete(const RenderedPrompt& prompt) override;

 private:
  MockOracleBackend oracle_;
  double probability_;
  CorruptMode mode_;
  std::uint64_t seed_;
};

// Applies one corruption to a well-formed canonical object.
std::string corrupt_response(std::string_view text, CorruptMode mode, Rng& rng);

// OpenAI-compatible POST {endpoint}/chat/completions, single user message.
// Retries connection failures, timeouts, 408, 429 and 5xx with exponential
// backoff and full jitter; 401/403 -> kAuthError, other 4xx -> kBadRequest.
class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  Completion complete(const RenderedPrompt& prompt) override;

  // Delay before retry number `retry` (0-based), before jitter.
  static std::chrono::milliseconds backoff_ceiling(const RetryPolicy& policy,
                                                   int retry);

 private:
  BackendConfig config_;
  std::string api_key_;
};

// references may be null for http_chat.
std::unique_ptr<Backend> make_backend(
    const BackendConfig& config,
    std::shared_ptr<const ReferenceTable> references);

struct BatchItem {
  std::optional<Completion> completion;
  std::optional<ErrorCode> error_code;
  std::string error_message;
  int attempts = 0;

  bool ok() const { return completion.has_value(); }
};

// Called once per finished item, serialized (never concurrently).
using BatchCallback = std::function<void(std::size_t index, const BatchItem&)>;

// At most max_parallel requests in flight. Output is aligned with input;
// per-item failures are recorded in place and never abort the batch.
std::vector<BatchItem> complete_batch(Backend& backend,
                                      std::span<const RenderedPrompt> prompts,
                                      int max_parallel,
                                      const BatchCallback& on_done = {});

}  // namespace batchqa
