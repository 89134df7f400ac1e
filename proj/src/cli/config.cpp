#include "concise/config.hpp"

#include "concise/cache.hpp"
#include "concise/errors.hpp"
#include "concise/http_provider.hpp"
#include "concise/mock.hpp"

#include <charconv>
#include <fstream>
#include <set>

extern char** environ;

namespace concise::cli {

using nlohmann::json;

std::string_view source_name(Source s) {
  switch (s) {
    case Source::default_value: return "default";
    case Source::environment: return "env";
    case Source::config_file: return "config";
    case Source::flag: return "flag";
  }
  return "default";
}

std::string_view role_name(Role r) {
  switch (r) {
    case Role::generator: return "generator";
    case Role::judge: return "judge";
    case Role::rewriter: return "rewriter";
    case Role::baseline: return "baseline";
  }
  return "generator";
}

Environment process_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::string RunConfig::judge() const {
  return judge_model.value.empty() ? generator_model.value : judge_model.value;
}

std::string RunConfig::rewriter() const {
  return rewriter_model.value.empty() ? generator_model.value : rewriter_model.value;
}

std::string RunConfig::baseline() const {
  return baseline_model.value.empty() ? judge() : baseline_model.value;
}

namespace {

int parse_int(const std::string& name, const std::string& text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(name + ": expected an integer, got '" + text + "'");
  }
  return v;
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, int>) {
      if (!j.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!j.is_number()) throw ConfigError("");
    } else {
      if (!j.is_string()) throw ConfigError("");
    }
    return j.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::apply_environment(const Environment& env) {
  auto str = [&](const char* name, Setting<std::string>& s) {
    if (auto it = env.find(name); it != env.end() && !it->second.empty()) {
      s.set(it->second, Source::environment);
    }
  };
  str("CONCISE_MODEL_GENERATOR", generator_model);
  str("CONCISE_MODEL_JUDGE", judge_model);
  str("CONCISE_MODEL_REWRITER", rewriter_model);
  str("CONCISE_MODEL_BASELINE", baseline_model);
  if (auto it = env.find("CONCISE_CACHE_DIR"); it != env.end() && !it->second.empty()) {
    cache_dir.set(it->second, Source::environment);
  }
  if (auto it = env.find("CONCISE_PARALLEL"); it != env.end() && !it->second.empty()) {
    parallel.set(parse_int("CONCISE_PARALLEL", it->second), Source::environment);
  }
}

void RunConfig::apply_file(const json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  constexpr auto S = Source::config_file;
  for (const auto& [key, value] : j.items()) {
    if (key == "models") {
      if (!value.is_object()) throw ConfigError("config key 'models' must be an object");
      for (const auto& [role, model] : value.items()) {
        const auto m = get_as<std::string>(model, "models." + role);
        if (role == "generator") generator_model.set(m, S);
        else if (role == "judge") judge_model.set(m, S);
        else if (role == "rewriter") rewriter_model.set(m, S);
        else if (role == "baseline") baseline_model.set(m, S);
        else throw ConfigError("unknown model role '" + role + "'");
      }
    } else if (key == "cache_dir") {
      cache_dir.set(get_as<std::string>(value, key), S);
    } else if (key == "parallel") {
      parallel.set(get_as<int>(value, key), S);
    } else if (key == "separate_prompts") {
      separate_prompts.set(get_as<bool>(value, key), S);
    } else if (key == "strict_mock") {
      strict_mock.set(get_as<bool>(value, key), S);
    } else if (key == "mock_fixtures") {
      mock_fixtures.set(get_as<std::string>(value, key), S);
    } else if (key == "template_dir") {
      template_dir.set(get_as<std::string>(value, key), S);
    } else if (key == "temperature") {
      temperature.set(get_as<double>(value, key), S);
    } else if (key == "max_output") {
      max_output.set(get_as<int>(value, key), S);
    } else if (key == "retry") {
      if (!value.is_object()) throw ConfigError("config key 'retry' must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k != "max_attempts") throw ConfigError("unknown config key 'retry." + k + "'");
        max_attempts.set(get_as<int>(v, "retry.max_attempts"), S);
      }
    } else if (key == "requests_per_minute") {
      requests_per_minute.set(get_as<double>(value, key), S);
    } else if (key == "verbose_min_ratio") {
      verbose_min_ratio.set(get_as<double>(value, key), S);
    } else if (key == "verbose_max_attempts") {
      verbose_max_attempts.set(get_as<int>(value, key), S);
    } else if (key == "credentials") {
      if (!value.is_object()) throw ConfigError("config key 'credentials' must be an object");
      for (const auto& [prefix, var] : value.items()) {
        credential_env[prefix] = get_as<std::string>(var, "credentials." + prefix);
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  apply_file(j);
}

json RunConfig::redacted(const Environment& env) const {
  auto entry = [](const auto& s) {
    json value;
    if constexpr (std::is_same_v<std::decay_t<decltype(s.value)>, std::filesystem::path>) {
      value = s.value.string();
    } else {
      value = s.value;
    }
    return json{{"value", value}, {"source", std::string(source_name(s.source))}};
  };
  json j;
  j["models"] = {{"generator", entry(generator_model)},
                 {"judge", entry(judge_model)},
                 {"rewriter", entry(rewriter_model)},
                 {"baseline", entry(baseline_model)}};
  j["resolved_models"] = {
      {"generator", generator_model.value}, {"judge", judge()}, {"rewriter", rewriter()},
      {"baseline", baseline()}};
  j["cache_dir"] = entry(cache_dir);
  j["parallel"] = entry(parallel);
  j["separate_prompts"] = entry(separate_prompts);
  j["strict_mock"] = entry(strict_mock);
  j["mock_fixtures"] = entry(mock_fixtures);
  j["template_dir"] = entry(template_dir);
  j["temperature"] = entry(temperature);
  j["max_output"] = entry(max_output);
  j["retry"] = {{"max_attempts", entry(max_attempts)}};
  j["requests_per_minute"] = entry(requests_per_minute);
  j["verbose_min_ratio"] = entry(verbose_min_ratio);
  j["verbose_max_attempts"] = entry(verbose_max_attempts);
  json creds = json::object();
  for (const auto& known : gateway::known_providers()) {
    const auto it = credential_env.find(known.prefix);
    const std::string var = it == credential_env.end() ? known.key_env : it->second;
    const auto found = env.find(var);
    creds[known.prefix] = {{"env", var},
                           {"present", found != env.end() && !found->second.empty()}};
  }
  j["credentials"] = creds;
  return j;
}

void validate(const RunConfig& config, std::initializer_list<Role> roles) {
  for (Role r : roles) {
    std::string model;
    switch (r) {
      case Role::generator: model = config.generator_model.value; break;
      case Role::judge: model = config.judge(); break;
      case Role::rewriter: model = config.rewriter(); break;
      case Role::baseline: model = config.baseline(); break;
    }
    const std::string role(role_name(r));
    if (model.empty()) {
      throw ConfigError("no model configured for role '" + role + "' (use --model-" + role +
                        ", CONCISE_MODEL_" + [&] {
                          std::string up = role;
                          for (auto& c : up) c = static_cast<char>(std::toupper(c));
                          return up;
                        }() + ", or models." + role + " in the config file)");
    }
    const auto colon = model.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == model.size()) {
      throw ConfigError("model '" + model + "' for role '" + role +
                        "' must look like <provider>:<name>");
    }
  }
  if (config.parallel.value < 1) throw ConfigError("parallel must be at least 1");
  if (config.temperature.value < 0) throw ConfigError("temperature must be non-negative");
  if (config.max_output.value < 1) throw ConfigError("max_output must be positive");
  if (config.max_attempts.value < 1) throw ConfigError("retry.max_attempts must be positive");
  if (config.requests_per_minute.value < 0) {
    throw ConfigError("requests_per_minute must be non-negative");
  }
  if (config.verbose_min_ratio.value <= 1.0) throw ConfigError("verbose_min_ratio must exceed 1");
  if (config.verbose_max_attempts.value < 1) {
    throw ConfigError("verbose_max_attempts must be positive");
  }
  if (!config.template_dir.value.empty() && !std::filesystem::is_directory(config.template_dir.value)) {
    throw ConfigError("template directory " + config.template_dir.value.string() + " not found");
  }
  if (!config.mock_fixtures.value.empty() && !std::filesystem::is_regular_file(config.mock_fixtures.value)) {
    throw ConfigError("mock fixture file " + config.mock_fixtures.value.string() + " not found");
  }
}

std::shared_ptr<const prompts::TemplateSet> load_templates(const RunConfig& config) {
  if (config.template_dir.value.empty()) {
    return std::shared_ptr<const prompts::TemplateSet>(&prompts::TemplateSet::embedded(),
                                                       [](const prompts::TemplateSet*) {});
  }
  try {
    return std::make_shared<const prompts::TemplateSet>(
        prompts::TemplateSet::load_directory(config.template_dir.value));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("template directory: ") + e.what());
  }
}

std::unique_ptr<gateway::Gateway> build_gateway(const RunConfig& config,
                                                std::initializer_list<Role> roles,
                                                const prompts::TemplateSet& templates,
                                                const Environment& env) {
  validate(config, roles);

  std::set<std::string> models;
  for (Role r : roles) {
    switch (r) {
      case Role::generator: models.insert(config.generator_model.value); break;
      case Role::judge: models.insert(config.judge()); break;
      case Role::rewriter: models.insert(config.rewriter()); break;
      case Role::baseline: models.insert(config.baseline()); break;
    }
  }

  gateway::GatewayOptions options;
  options.retry.max_attempts = config.max_attempts.value;
  options.requests_per_minute = config.requests_per_minute.value;
  std::shared_ptr<gateway::ResponseCache> cache;
  try {
    cache = std::make_shared<gateway::ResponseCache>(config.cache_dir.value);
  } catch (const std::exception& e) {
    throw ConfigError("cache directory " + config.cache_dir.value.string() + ": " + e.what());
  }
  auto gw = std::make_unique<gateway::Gateway>(cache, options);

  std::shared_ptr<mock::MockRouter> router;
  const gateway::EnvLookup lookup = [&env](const std::string& name) -> std::optional<std::string> {
    if (auto it = env.find(name); it != env.end()) return it->second;
    return std::nullopt;
  };
  for (const auto& model : models) {
    const auto colon = model.find(':');
    const std::string prefix = model.substr(0, colon);
    const std::string name = model.substr(colon + 1);
    if (prefix == "mock") {
      if (!router) {
        router = std::make_shared<mock::MockRouter>();
        gw->register_provider("mock", router);
      }
      if (router->has(name)) continue;
      if (name == "rules") {
        router->add(name, std::make_shared<mock::RuleBackend>(mock::RuleOptions{}, templates));
      } else if (name == "echo") {
        mock::RuleOptions o;
        o.rewrite = mock::RewriteMode::echo;
        router->add(name, std::make_shared<mock::RuleBackend>(o, templates));
      } else if (name == "fixtures") {
        if (config.mock_fixtures.value.empty()) {
          throw ConfigError("model mock:fixtures needs mock_fixtures (--mock-fixtures)");
        }
        try {
          router->add(name, mock::FixtureBackend::from_file(config.mock_fixtures.value,
                                                            config.strict_mock.value));
        } catch (const ConfigError&) {
          throw;
        } catch (const Error& e) {
          throw ConfigError(std::string("mock fixtures: ") + e.what());
        }
      } else {
        throw ConfigError("unknown mock backend '" + name + "' (rules, echo, fixtures)");
      }
      continue;
    }
    if (gw->has_provider(prefix)) continue;
    const auto it = config.credential_env.find(prefix);
    const std::string key_env = it == config.credential_env.end() ? std::string() : it->second;
    try {
      gw->register_provider(prefix, gateway::make_http_provider(prefix, key_env, lookup));
    } catch (const gateway::GatewayError& e) {
      throw ConfigError(e.what());
    }
  }
  return gw;
}

}  // namespace concise::cli
