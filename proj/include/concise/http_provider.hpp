#pragma once

#include "concise/gateway.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <memory>
#include <string>
#include <vector>

namespace concise::gateway {

enum class WireFormat {
  openai_chat,        // POST {path} with {"model","messages",...}
  anthropic_messages  // POST /v1/messages
};

struct HttpProviderConfig {
  std::string name;      // provider prefix, e.g. "openai"
  std::string base_url;  // scheme://host[:port]
  std::string path;
  std::string api_key;
  WireFormat format = WireFormat::openai_chat;
  std::chrono::seconds timeout{120};
};

/// Chat-completion client over HTTP(S). Status codes map onto gateway
/// error kinds: 401/403 auth, 429 rate_limit, 408/5xx and connection
/// failures transient, other 4xx request_rejected, unparseable bodies
/// malformed_response.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  ProviderReply complete(const CompletionRequest& request) override;
  std::string_view name() const override { return config_.name; }

 private:
  HttpProviderConfig config_;
};

/// Built-in provider prefixes and the environment variable each reads.
struct KnownProvider {
  std::string prefix;
  std::string key_env;
  std::string base_url_env;
  std::string default_base_url;
  std::string path;
  WireFormat format;
};

const std::vector<KnownProvider>& known_providers();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Builds a provider for `prefix` from the environment, reading the key from
/// `key_env` when given instead of the default variable. `lookup` replaces
/// the process environment when set. Throws GatewayError (configuration)
/// for an unknown prefix or a missing credential.
std::shared_ptr<Provider> make_http_provider(const std::string& prefix,
                                             const std::string& key_env = {},
                                             const EnvLookup& lookup = {});

}  // namespace concise::gateway
