#include "concise/gateway.hpp"

#include "concise/cache.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace concise::gateway {

using namespace std::chrono;

void CompletionRequest::validate() const {
  if (model.empty()) throw InvalidInput("completion request has an empty model identifier");
  if (!(temperature >= 0.0)) throw InvalidInput("completion request temperature must be >= 0");
  if (max_output <= 0) throw InvalidInput("completion request max_output must be positive");
}

std::string CompletionRequest::provider_prefix() const {
  const auto colon = model.find(':');
  return colon == std::string::npos ? std::string() : model.substr(0, colon);
}

std::string_view error_kind_name(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::auth: return "auth";
    case GatewayErrorKind::rate_limit: return "rate_limit";
    case GatewayErrorKind::transient: return "transient";
    case GatewayErrorKind::malformed_response: return "malformed_response";
    case GatewayErrorKind::request_rejected: return "request_rejected";
    case GatewayErrorKind::attempts_exhausted: return "attempts_exhausted";
    case GatewayErrorKind::unmatched_prompt: return "unmatched_prompt";
    case GatewayErrorKind::configuration: return "configuration";
  }
  return "unknown";
}

bool is_retryable(GatewayErrorKind kind) {
  return kind == GatewayErrorKind::rate_limit || kind == GatewayErrorKind::transient;
}

milliseconds RetryPolicy::delay(int retry, milliseconds previous, double unit) const {
  const double base = static_cast<double>(initial_delay.count()) *
                      std::pow(multiplier, std::max(0, retry - 1));
  const double jittered = base * (1.0 + jitter * std::clamp(unit, 0.0, 1.0));
  const double capped = std::min(jittered, static_cast<double>(max_delay.count()));
  return std::max(previous, milliseconds(static_cast<std::int64_t>(capped)));
}

Clock system_clock() {
  return [] { return steady_clock::now(); };
}

Sleeper system_sleeper() {
  return [](nanoseconds d) { std::this_thread::sleep_for(d); };
}

RateLimiter::RateLimiter(double requests_per_minute, double burst, Clock clock, Sleeper sleeper)
    : rate_per_sec_(requests_per_minute / 60.0),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      clock_(std::move(clock)),
      sleeper_(std::move(sleeper)),
      last_(clock_()) {
  if (!(requests_per_minute > 0.0)) throw InvalidInput("rate limit must be positive");
}

void RateLimiter::refill(steady_clock::time_point now) {
  const double elapsed = duration<double>(now - last_).count();
  if (elapsed > 0) {
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_sec_);
    last_ = now;
  }
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  refill(clock_());
  while (tokens_ < 1.0) {
    const double wait_sec = (1.0 - tokens_) / rate_per_sec_;
    sleeper_(duration_cast<nanoseconds>(duration<double>(wait_sec)));
    refill(clock_());
  }
  tokens_ -= 1.0;
}

std::string cache_key(const CompletionRequest& request) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", request.temperature);
  const nlohmann::json canonical = {
      {"model", request.model},
      {"prompt", request.prompt},
      {"temperature", temp},
      {"max_output", request.max_output},
      {"seed_hint", request.seed_hint ? nlohmann::json(*request.seed_hint) : nlohmann::json()},
      {"template_version", request.template_version},
  };
  const std::string payload = canonical.dump();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

Gateway::Gateway(std::shared_ptr<ResponseCache> cache, GatewayOptions options)
    : cache_(std::move(cache)), options_(std::move(options)), jitter_rng_(options_.jitter_seed) {
  if (options_.retry.max_attempts < 1) throw InvalidInput("retry cap must be at least 1");
}

Gateway::~Gateway() = default;

void Gateway::register_provider(const std::string& prefix, std::shared_ptr<Provider> provider) {
  std::lock_guard lock(mu_);
  providers_[prefix] = std::move(provider);
}

bool Gateway::has_provider(const std::string& prefix) const {
  std::lock_guard lock(mu_);
  return providers_.count(prefix) > 0;
}

std::shared_ptr<Provider> Gateway::provider_for(const CompletionRequest& request) const {
  const std::string prefix = request.provider_prefix();
  std::lock_guard lock(mu_);
  const auto it = providers_.find(prefix);
  if (it == providers_.end()) {
    throw GatewayError(GatewayErrorKind::configuration,
                       "no provider registered for model '" + request.model + "'");
  }
  return it->second;
}

RateLimiter* Gateway::limiter_for(const std::string& prefix) {
  if (options_.requests_per_minute <= 0.0) return nullptr;
  std::lock_guard lock(mu_);
  auto& slot = limiters_[prefix];
  if (!slot) {
    slot = std::make_unique<RateLimiter>(options_.requests_per_minute, options_.burst,
                                         options_.clock, options_.sleeper);
  }
  return slot.get();
}

double Gateway::next_jitter() {
  std::lock_guard lock(mu_);
  return std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng_);
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
  request.validate();
  ++requests_;
  const std::string key = cache_key(request);

  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      ++cache_hits_;
      CompletionResult out;
      out.text = std::move(hit->text);
      out.provider_meta = std::move(hit->provider_meta);
      out.usage = hit->usage;
      out.latency = milliseconds(hit->latency_ms);
      out.cached = true;
      out.cache_key = key;
      return out;
    }
  }

  const auto provider = provider_for(request);
  RateLimiter* limiter = limiter_for(request.provider_prefix());
  const RetryPolicy& policy = options_.retry;
  milliseconds backoff{0};
  std::string last_error;

  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (limiter) limiter->acquire();
    ++provider_calls_;
    const auto started = options_.clock();
    try {
      ProviderReply reply = provider->complete(request);
      const auto latency = duration_cast<milliseconds>(options_.clock() - started);
      if (cache_) {
        CacheRecord record;
        record.key = key;
        record.request = request;
        record.text = reply.text;
        record.provider_meta = reply.meta;
        record.usage = reply.usage;
        record.latency_ms = latency.count();
        record.created_at = utc_timestamp();
        cache_->store(record);
      }
      CompletionResult out;
      out.text = std::move(reply.text);
      out.provider_meta = std::move(reply.meta);
      out.usage = reply.usage;
      out.latency = latency;
      out.attempts = attempt;
      out.cache_key = key;
      return out;
    } catch (const GatewayError& e) {
      if (!is_retryable(e.kind())) {
        ++failures_;
        throw GatewayError(e.kind(), e.what(), attempt);
      }
      last_error = e.what();
    }
    if (attempt < policy.max_attempts) {
      ++retries_;
      backoff = policy.delay(attempt, backoff, next_jitter());
      options_.sleeper(backoff);
    }
  }
  ++failures_;
  throw GatewayError(GatewayErrorKind::attempts_exhausted,
                     "gave up after " + std::to_string(policy.max_attempts) +
                         " attempts; last error: " + last_error,
                     policy.max_attempts);
}

GatewayStats Gateway::stats() const {
  GatewayStats s;
  s.requests = requests_.load();
  s.cache_hits = cache_hits_.load();
  s.provider_calls = provider_calls_.load();
  s.retries = retries_.load();
  s.failures = failures_.load();
  return s;
}

}  // namespace concise::gateway
