#pragma once

// Run configuration for the command-line tool. Values are layered
// defaults < environment < config file < flags, and each value remembers
// which layer set it.

#include "concise/gateway.hpp"
#include "concise/prompts.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace concise::cli {

enum class Source { default_value, environment, config_file, flag };
std::string_view source_name(Source s);

template <typename T>
struct Setting {
  T value{};
  Source source = Source::default_value;

  void set(T v, Source s) {
    value = std::move(v);
    source = s;
  }
};

using Environment = std::map<std::string, std::string>;

/// Snapshot of the process environment.
Environment process_environment();

struct RunConfig {
  Setting<std::string> generator_model;
  Setting<std::string> judge_model;     // empty: generator model
  Setting<std::string> rewriter_model;  // empty: generator model
  Setting<std::string> baseline_model;  // empty: judge model
  Setting<std::filesystem::path> cache_dir{".concise-cache"};
  Setting<int> parallel{4};
  Setting<bool> separate_prompts{false};
  Setting<bool> strict_mock{false};
  Setting<std::filesystem::path> mock_fixtures;
  Setting<std::filesystem::path> template_dir;  // empty: embedded templates
  Setting<double> temperature{0.0};
  Setting<int> max_output{1024};
  Setting<int> max_attempts{4};
  Setting<double> requests_per_minute{0.0};
  Setting<double> verbose_min_ratio{1.3};
  Setting<int> verbose_max_attempts{3};
  // Provider prefix -> name of the environment variable holding its key.
  std::map<std::string, std::string> credential_env;

  std::string judge() const;
  std::string rewriter() const;
  std::string baseline() const;

  /// Applies CONCISE_* variables.
  void apply_environment(const Environment& env);
  /// Applies a JSON config object. Unknown keys and wrong types are
  /// ConfigErrors.
  void apply_file(const nlohmann::json& j);
  void load_file(const std::filesystem::path& path);

  /// Every value with its source. Credentials appear only as the variable
  /// name and whether it is set, never their contents.
  nlohmann::json redacted(const Environment& env) const;
};

enum class Role { generator, judge, rewriter, baseline };
std::string_view role_name(Role r);

/// Throws ConfigError unless every listed role has a model of the form
/// "<provider>:<name>" and parallelism and numeric limits are in range.
void validate(const RunConfig& config, std::initializer_list<Role> roles);

/// Template set named by the config: a directory override or the embedded
/// set.
std::shared_ptr<const prompts::TemplateSet> load_templates(const RunConfig& config);

/// Gateway with a provider for every prefix used by `roles`. "mock:" models
/// route to offline backends (rules, echo, fixtures); other prefixes need a
/// credential in `env`. All failures are ConfigErrors raised before any
/// completion is requested.
std::unique_ptr<gateway::Gateway> build_gateway(const RunConfig& config,
                                                std::initializer_list<Role> roles,
                                                const prompts::TemplateSet& templates,
                                                const Environment& env);

}  // namespace concise::cli
