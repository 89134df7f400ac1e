#pragma once

// Prompt templates and reply parsers.
//
// Templates are plain-text resources described by a manifest (kind, version,
// placeholder set). Rendering substitutes `[name]` placeholders in a single
// left-to-right pass and appends the template's output-format rider, which
// is versioned separately from the prompt body.

#include "concise/errors.hpp"
#include "concise/metric.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace concise::prompts {

enum class TemplateKind {
  generate_derivatives,
  judge,
  verbose_rewrite,
  gpt_score,
  gpt_ranking,
  // One-technique generation prompts for separate-prompt mode.
  generate_abstractive,
  generate_extractive,
  generate_pruned,
};

std::string_view kind_name(TemplateKind kind);
std::optional<TemplateKind> parse_kind(std::string_view name);

/// Single-technique generation template for separate-prompt mode.
TemplateKind separate_kind(Technique t);

/// Raised by render when a placeholder has no binding.
class MissingBinding : public Error {
 public:
  explicit MissingBinding(std::string placeholder)
      : Error("missing binding for placeholder [" + placeholder + "]"),
        placeholder_(std::move(placeholder)) {}

  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Malformed manifest or template resource.
class TemplateError : public Error {
 public:
  using Error::Error;
};

struct PromptTemplate {
  TemplateKind kind{};
  std::string version;
  std::string body;
  std::vector<std::string> placeholders;  // names without brackets
  std::string rider;
  std::string rider_version;

  /// e.g. "judge@1+rider.1"; part of every cache key.
  std::string full_version() const;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Body with placeholders substituted, no rider.
std::string render_body(const PromptTemplate& tmpl, const Bindings& bindings);

/// Prompt sent to the model: rendered body, a blank line, then the rider.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// Inverse of render for prompts that follow this template's layout:
/// recovers each placeholder's value. nullopt when the literal text around
/// the placeholders does not line up.
std::optional<Bindings> match_rendered(const PromptTemplate& tmpl, std::string_view prompt);

class TemplateSet {
 public:
  /// Templates compiled into the binary from resources/prompts.
  static const TemplateSet& embedded();

  /// Reads manifest.json and the files it lists from `dir`.
  static TemplateSet load_directory(const std::filesystem::path& dir);

  /// Parses a manifest, fetching listed files through `read_file`.
  static TemplateSet from_manifest(
      std::string_view manifest_json,
      const std::function<std::string(const std::string&)>& read_file);

  const PromptTemplate& get(TemplateKind kind) const;
  const std::string& set_version() const { return set_version_; }

 private:
  std::string set_version_;
  std::map<TemplateKind, PromptTemplate> templates_;
};

/// Parse outcome that keeps the raw reply for audit. Exactly one of
/// `payload` and `failure` is set.
template <typename T>
struct StructuredReply {
  std::optional<T> payload;
  std::string failure;
  std::string raw;

  bool ok() const { return payload.has_value(); }
};

/// Splits a reply into the three labeled blocks. Labels are matched
/// case-insensitively with markdown decoration and enumeration stripped, in
/// any order. Missing blocks leave that slot empty. Never throws.
DerivativeSet parse_derivatives(std::string_view raw);

/// Reply to a single-technique prompt. nullopt when the block is absent.
std::optional<std::string> parse_single_derivative(std::string_view raw, Technique t);

/// A verdict is Yes only when the text attributed to that label contains at
/// least one "yes" and no "no". Anything else, including a missing label,
/// is No. Never throws.
JudgeVerdicts parse_judge(std::string_view raw);

/// Integer rating 0-10. A "Score:" label wins; otherwise the first integer
/// in range. Fractional or out-of-range labeled values fail.
StructuredReply<int> parse_score(std::string_view raw);

/// first/second from "Choice: answer N", a single candidate mention, or a
/// preference cue attached to one mention. Ambiguity fails.
StructuredReply<Choice> parse_ranking(std::string_view raw);

}  // namespace concise::prompts
