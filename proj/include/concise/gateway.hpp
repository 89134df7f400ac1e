#pragma once

// Provider-agnostic completion boundary: request/response types, the
// provider interface, retry with backoff, per-provider rate limiting and
// the persistent response cache in front of it all.

#include "concise/errors.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace concise::gateway {

/// One completion call. `model` is provider-qualified: "openai:gpt-4o",
/// "anthropic:claude-sonnet-4-20250514", "mock:rules".
struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_output = 1024;
  std::optional<std::int64_t> seed_hint;
  std::string template_version;

  /// Throws InvalidInput on an empty model or negative temperature.
  void validate() const;
  /// Text before the first ':' of `model`.
  std::string provider_prefix() const;
};

struct TokenUsage {
  std::int64_t input = 0;
  std::int64_t output = 0;
};

struct CompletionResult {
  std::string text;
  std::string provider_meta;  // JSON text, opaque to callers
  bool cached = false;
  std::chrono::milliseconds latency{0};
  std::optional<TokenUsage> usage;  // absent when the provider did not report it
  int attempts = 0;                 // provider attempts made; 0 for cache hits
  std::string cache_key;
};

enum class GatewayErrorKind {
  auth,                // credentials rejected; never retried
  rate_limit,          // provider throttled us; retried
  transient,           // network failure or 5xx; retried
  malformed_response,  // reply body could not be understood
  request_rejected,    // other 4xx
  attempts_exhausted,  // retry cap reached
  unmatched_prompt,    // strict mock without a fixture
  configuration,       // no provider for the model, missing key, ...
};

std::string_view error_kind_name(GatewayErrorKind kind);
bool is_retryable(GatewayErrorKind kind);

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message, int attempts = 0)
      : Error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        attempts_(attempts) {}

  GatewayErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }

 private:
  GatewayErrorKind kind_;
  int attempts_;
};

/// What a backend hands back for one successful call.
struct ProviderReply {
  std::string text;
  std::string meta = "{}";
  std::optional<TokenUsage> usage;
};

/// A completion backend. Implementations report failures by throwing
/// GatewayError with the appropriate kind and must be callable from
/// several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderReply complete(const CompletionRequest& request) = 0;
  virtual std::string_view name() const = 0;
};

/// Exponential backoff with multiplicative jitter. Delays never decrease
/// from one retry to the next and never exceed `max_delay`.
struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};
  double jitter = 0.25;  // fraction of the base delay added at random

  /// Delay before retry number `retry` (1 = first retry). `unit` is a
  /// uniform draw in [0,1).
  std::chrono::milliseconds delay(int retry, std::chrono::milliseconds previous,
                                  double unit) const;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;
using Sleeper = std::function<void(std::chrono::nanoseconds)>;

Clock system_clock();
Sleeper system_sleeper();

/// Token bucket. `acquire` blocks until a token is available; admission is
/// serialized so concurrent callers are released one at a time.
class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, double burst, Clock clock = system_clock(),
              Sleeper sleeper = system_sleeper());

  void acquire();

 private:
  void refill(std::chrono::steady_clock::time_point now);

  double rate_per_sec_;
  double burst_;
  double tokens_;
  Clock clock_;
  Sleeper sleeper_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

/// Hex SHA-256 over every request field. Equal requests give equal keys.
std::string cache_key(const CompletionRequest& request);

class ResponseCache;

struct GatewayOptions {
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0 disables rate limiting
  double burst = 1.0;
  std::uint64_t jitter_seed = 0x5eed;
  Clock clock = system_clock();
  Sleeper sleeper = system_sleeper();
};

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t provider_calls = 0;  // attempts, including failed ones
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
};

class Gateway {
 public:
  /// `cache` may be null to disable caching.
  explicit Gateway(std::shared_ptr<ResponseCache> cache, GatewayOptions options = {});
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Routes models "<prefix>:..." to `provider`.
  void register_provider(const std::string& prefix, std::shared_ptr<Provider> provider);
  bool has_provider(const std::string& prefix) const;

  /// Cache hit, or provider call with retries; successful replies are
  /// stored before returning. Thread-safe.
  CompletionResult complete(const CompletionRequest& request);

  GatewayStats stats() const;

 private:
  std::shared_ptr<Provider> provider_for(const CompletionRequest& request) const;
  RateLimiter* limiter_for(const std::string& prefix);
  double next_jitter();

  std::shared_ptr<ResponseCache> cache_;
  GatewayOptions options_;
  std::map<std::string, std::shared_ptr<Provider>> providers_;
  std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
  mutable std::mutex mu_;
  std::mt19937_64 jitter_rng_;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> retries_{0};
  std::atomic<std::uint64_t> failures_{0};
};

}  // namespace concise::gateway
