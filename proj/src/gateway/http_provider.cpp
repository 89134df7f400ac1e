#include "concise/http_provider.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

namespace concise::gateway {

using nlohmann::json;

namespace {

std::string model_name(const CompletionRequest& request) {
  const auto colon = request.model.find(':');
  return colon == std::string::npos ? request.model : request.model.substr(colon + 1);
}

GatewayErrorKind kind_for_status(int status) {
  if (status == 401 || status == 403) return GatewayErrorKind::auth;
  if (status == 429) return GatewayErrorKind::rate_limit;
  if (status == 408 || status >= 500) return GatewayErrorKind::transient;
  return GatewayErrorKind::request_rejected;
}

std::string excerpt(const std::string& body) {
  return body.size() > 300 ? body.substr(0, 300) + "..." : body;
}

json build_body(const CompletionRequest& request, WireFormat format) {
  json body = {
      {"model", model_name(request)},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output},
  };
  if (format == WireFormat::openai_chat && request.seed_hint) body["seed"] = *request.seed_hint;
  return body;
}

ProviderReply parse_reply(const std::string& provider, const std::string& raw, WireFormat format) {
  ProviderReply out;
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception&) {
    throw GatewayError(GatewayErrorKind::malformed_response,
                       provider + " returned non-JSON body: " + excerpt(raw));
  }
  try {
    json meta = {{"provider", provider}};
    if (format == WireFormat::openai_chat) {
      const auto& choice = j.at("choices").at(0);
      out.text = choice.at("message").at("content").get<std::string>();
      meta["finish_reason"] = choice.value("finish_reason", json());
      if (j.contains("usage") && j["usage"].is_object()) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens") && u.contains("completion_tokens")) {
          out.usage = TokenUsage{u["prompt_tokens"].get<std::int64_t>(),
                                 u["completion_tokens"].get<std::int64_t>()};
        }
      }
    } else {
      for (const auto& block : j.at("content")) {
        if (block.value("type", "") == "text") out.text += block.at("text").get<std::string>();
      }
      meta["stop_reason"] = j.value("stop_reason", json());
      if (j.contains("usage") && j["usage"].is_object()) {
        const auto& u = j["usage"];
        if (u.contains("input_tokens") && u.contains("output_tokens")) {
          out.usage = TokenUsage{u["input_tokens"].get<std::int64_t>(),
                                 u["output_tokens"].get<std::int64_t>()};
        }
      }
    }
    meta["id"] = j.value("id", json());
    meta["model"] = j.value("model", json());
    out.meta = meta.dump();
  } catch (const json::exception& e) {
    throw GatewayError(GatewayErrorKind::malformed_response,
                       provider + " reply missing expected fields (" + e.what() + ")");
  }
  return out;
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw GatewayError(GatewayErrorKind::configuration, config_.name + ": empty base URL");
  }
}

ProviderReply HttpProvider::complete(const CompletionRequest& request) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (config_.format == WireFormat::anthropic_messages) {
    headers.emplace("x-api-key", config_.api_key);
    headers.emplace("anthropic-version", "2023-06-01");
  } else {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const std::string body = build_body(request, config_.format).dump();
  const auto res = client.Post(config_.path, headers, body, "application/json");
  if (!res) {
    throw GatewayError(GatewayErrorKind::transient,
                       config_.name + " request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw GatewayError(kind_for_status(res->status),
                       config_.name + " HTTP " + std::to_string(res->status) + ": " +
                           excerpt(res->body));
  }
  return parse_reply(config_.name, res->body, config_.format);
}

const std::vector<KnownProvider>& known_providers() {
  static const std::vector<KnownProvider> providers = {
      {"openai", "OPENAI_API_KEY", "OPENAI_BASE_URL", "https://api.openai.com",
       "/v1/chat/completions", WireFormat::openai_chat},
      {"anthropic", "ANTHROPIC_API_KEY", "ANTHROPIC_BASE_URL", "https://api.anthropic.com",
       "/v1/messages", WireFormat::anthropic_messages},
      {"gemini", "GEMINI_API_KEY", "GEMINI_BASE_URL", "https://generativelanguage.googleapis.com",
       "/v1beta/openai/chat/completions", WireFormat::openai_chat},
      {"mistral", "MISTRAL_API_KEY", "MISTRAL_BASE_URL", "https://api.mistral.ai",
       "/v1/chat/completions", WireFormat::openai_chat},
  };
  return providers;
}

std::shared_ptr<Provider> make_http_provider(const std::string& prefix, const std::string& key_env,
                                             const EnvLookup& lookup) {
  auto read = [&](const std::string& name) -> std::string {
    if (lookup) return lookup(name).value_or("");
    const char* v = std::getenv(name.c_str());
    return v ? v : "";
  };
  for (const auto& known : known_providers()) {
    if (known.prefix != prefix) continue;
    const std::string& var = key_env.empty() ? known.key_env : key_env;
    std::string key = read(var);
    if (key.empty()) {
      throw GatewayError(GatewayErrorKind::configuration,
                         "provider '" + prefix + "' needs " + var + " to be set");
    }
    const std::string base = read(known.base_url_env);
    HttpProviderConfig config;
    config.name = prefix;
    config.base_url = base.empty() ? known.default_base_url : base;
    config.path = known.path;
    config.api_key = std::move(key);
    config.format = known.format;
    return std::make_shared<HttpProvider>(std::move(config));
  }
  throw GatewayError(GatewayErrorKind::configuration, "unknown provider prefix '" + prefix + "'");
}

}  // namespace concise::gateway
