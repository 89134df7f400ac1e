#pragma once

// Offline backends: a fixture table and a rule-based simulator that answers
// every prompt kind deterministically. Neither touches the network.

#include "concise/gateway.hpp"
#include "concise/prompts.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace concise::mock {

struct Fixture {
  std::string pattern;  // substring of the prompt
  std::string response;
};

/// First fixture whose pattern occurs in the prompt wins. Unmatched
/// prompts get `default_response`, or an unmatched_prompt error in strict
/// mode.
class FixtureBackend : public gateway::Provider {
 public:
  FixtureBackend(std::vector<Fixture> fixtures, bool strict, std::string default_response = {});

  /// {"fixtures": [{"pattern": ..., "response": ...}], "default": ...}
  static std::shared_ptr<FixtureBackend> from_file(const std::filesystem::path& path, bool strict);

  gateway::ProviderReply complete(const gateway::CompletionRequest& request) override;
  std::string_view name() const override { return "mock-fixtures"; }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::vector<Fixture> fixtures_;
  bool strict_;
  std::string default_response_;
  std::atomic<std::uint64_t> calls_{0};
};

// Text rules used by the simulator. Sentences end at '.', '!' or '?'
// followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view text);
std::string unique_sentences(std::string_view text);
std::string duplicate_sentences(std::string_view text);
/// Removes every whitespace-delimited token containing `tag`.
std::string drop_tagged_words(std::string_view text, std::string_view tag);
/// Capitalized or numeric tokens, punctuation stripped; tagged tokens skipped.
std::set<std::string> entity_tokens(std::string_view text, std::string_view tag);
bool preserves_entities(std::string_view original, std::string_view derivative,
                        std::string_view tag);

enum class RewriteMode { duplicate_sentences, echo };

struct RuleOptions {
  std::string filler_tag = "FILLER";
  RewriteMode rewrite = RewriteMode::duplicate_sentences;
};

/// Simulated model. Recognizes the prompt kind by matching it against the
/// template set, then:
///  - derivatives: extractive = unique sentences; abstractive and pruned =
///    unique sentences with tagged filler words dropped
///  - judge: Yes for a nonempty derivative keeping every entity token
///  - verbose rewrite: each sentence doubled (or echoed unchanged)
///  - GPT Score: round(10 * essential words / words)
///  - GPT Ranking: the answer with the higher essential-word ratio, then
///    the shorter one, then answer 1
class RuleBackend : public gateway::Provider {
 public:
  explicit RuleBackend(RuleOptions options = {},
                       const prompts::TemplateSet& templates = prompts::TemplateSet::embedded());

  gateway::ProviderReply complete(const gateway::CompletionRequest& request) override;
  std::string_view name() const override { return "mock-rules"; }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::string respond(prompts::TemplateKind kind, const prompts::Bindings& b) const;

  RuleOptions options_;
  const prompts::TemplateSet& templates_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Routes "mock:<name>" models to the backend registered as <name>.
class MockRouter : public gateway::Provider {
 public:
  void add(const std::string& name, std::shared_ptr<gateway::Provider> backend);
  bool has(const std::string& name) const { return backends_.count(name) > 0; }

  gateway::ProviderReply complete(const gateway::CompletionRequest& request) override;
  std::string_view name() const override { return "mock"; }

 private:
  std::map<std::string, std::shared_ptr<gateway::Provider>> backends_;
};

}  // namespace concise::mock
