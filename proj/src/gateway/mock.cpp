#include "concise/mock.hpp"

#include "concise/metric.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace concise::mock {

using gateway::CompletionRequest;
using gateway::GatewayError;
using gateway::GatewayErrorKind;
using gateway::ProviderReply;
using prompts::TemplateKind;

namespace {

bool is_space(char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string strip_punct(std::string_view token) {
  auto alnum = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
  };
  while (!token.empty() && !alnum(token.front())) token.remove_prefix(1);
  while (!token.empty() && !alnum(token.back())) token.remove_suffix(1);
  return std::string(token);
}

std::string prompt_prefix(std::string_view prompt) {
  std::string head(prompt.substr(0, 60));
  for (char& c : head) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return head;
}

std::size_t essential_words(std::string_view text, std::string_view tag) {
  return word_count(unique_sentences(drop_tagged_words(text, tag)));
}

}  // namespace

FixtureBackend::FixtureBackend(std::vector<Fixture> fixtures, bool strict,
                               std::string default_response)
    : fixtures_(std::move(fixtures)), strict_(strict), default_response_(std::move(default_response)) {
  if (fixtures_.empty()) throw InvalidInput("mock fixture table is empty");
}

std::shared_ptr<FixtureBackend> FixtureBackend::from_file(const std::filesystem::path& path,
                                                          bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read mock fixture file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    std::vector<Fixture> fixtures;
    for (const auto& f : j.at("fixtures")) {
      fixtures.push_back({f.at("pattern").get<std::string>(), f.at("response").get<std::string>()});
    }
    return std::make_shared<FixtureBackend>(std::move(fixtures), strict,
                                            j.value("default", std::string()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed mock fixture file " + path.string() + ": " + e.what());
  }
}

ProviderReply FixtureBackend::complete(const CompletionRequest& request) {
  ++calls_;
  for (const auto& f : fixtures_) {
    if (request.prompt.find(f.pattern) != std::string::npos) {
      return {f.response, R"({"provider":"mock-fixtures"})", std::nullopt};
    }
  }
  if (strict_) {
    throw GatewayError(GatewayErrorKind::unmatched_prompt,
                       "no fixture matches prompt starting '" + prompt_prefix(request.prompt) + "'");
  }
  return {default_response_, R"({"provider":"mock-fixtures","default":true})", std::nullopt};
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
      const auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.emplace_back(s);
      start = i + 1;
    }
  }
  const auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

std::string unique_sentences(std::string_view text) {
  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (auto& s : split_sentences(text)) {
    if (seen.insert(s).second) kept.push_back(std::move(s));
  }
  return join(kept, " ");
}

std::string duplicate_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : split_sentences(text)) {
    out.push_back(s);
    out.push_back(s);
  }
  return join(out, " ");
}

std::string drop_tagged_words(std::string_view text, std::string_view tag) {
  std::vector<std::string> kept;
  for (const auto w : split_words(text)) {
    if (tag.empty() || w.find(tag) == std::string_view::npos) kept.emplace_back(w);
  }
  return join(kept, " ");
}

std::set<std::string> entity_tokens(std::string_view text, std::string_view tag) {
  std::set<std::string> out;
  for (const auto w : split_words(text)) {
    if (!tag.empty() && w.find(tag) != std::string_view::npos) continue;
    std::string token = strip_punct(w);
    if (token.empty()) continue;
    const char first = token.front();
    if ((first >= 'A' && first <= 'Z') || (first >= '0' && first <= '9')) {
      out.insert(std::move(token));
    }
  }
  return out;
}

bool preserves_entities(std::string_view original, std::string_view derivative,
                        std::string_view tag) {
  if (word_count(derivative) == 0) return false;
  std::set<std::string> present;
  for (const auto w : split_words(derivative)) present.insert(strip_punct(w));
  for (const auto& e : entity_tokens(original, tag)) {
    if (!present.count(e)) return false;
  }
  return true;
}

RuleBackend::RuleBackend(RuleOptions options, const prompts::TemplateSet& templates)
    : options_(std::move(options)), templates_(templates) {}

ProviderReply RuleBackend::complete(const CompletionRequest& request) {
  ++calls_;
  static constexpr TemplateKind kKinds[] = {
      TemplateKind::generate_derivatives, TemplateKind::judge,
      TemplateKind::verbose_rewrite,      TemplateKind::gpt_score,
      TemplateKind::gpt_ranking,          TemplateKind::generate_abstractive,
      TemplateKind::generate_extractive,  TemplateKind::generate_pruned};
  for (TemplateKind kind : kKinds) {
    if (auto bindings = prompts::match_rendered(templates_.get(kind), request.prompt)) {
      const std::string meta =
          nlohmann::json{{"provider", "mock-rules"}, {"prompt_kind", prompts::kind_name(kind)}}
              .dump();
      return {respond(kind, *bindings), meta, std::nullopt};
    }
  }
  throw GatewayError(GatewayErrorKind::unmatched_prompt,
                     "rule mock does not recognize prompt starting '" +
                         prompt_prefix(request.prompt) + "'");
}

std::string RuleBackend::respond(TemplateKind kind, const prompts::Bindings& b) const {
  const std::string& tag = options_.filler_tag;
  auto get = [&](const char* name) -> const std::string& { return b.find(name)->second; };

  switch (kind) {
    case TemplateKind::generate_derivatives: {
      const std::string& answer = get("answer");
      const std::string extractive = unique_sentences(answer);
      const std::string pruned = drop_tagged_words(extractive, tag);
      return "### Abstractive Summary\n" + pruned + "\n### Extractive Summary\n" + extractive +
             "\n### Pruned Text\n" + pruned + "\n";
    }
    case TemplateKind::generate_abstractive:
      return "### Abstractive Summary\n" +
             drop_tagged_words(unique_sentences(get("answer")), tag) + "\n";
    case TemplateKind::generate_extractive:
      return "### Extractive Summary\n" + unique_sentences(get("answer")) + "\n";
    case TemplateKind::generate_pruned:
      return "### Pruned Text\n" + drop_tagged_words(unique_sentences(get("answer")), tag) + "\n";
    case TemplateKind::judge: {
      const std::string& answer = get("answer");
      auto verdict = [&](const char* slot) {
        const bool meaning = word_count(get(slot)) > 0;
        const bool entities = preserves_entities(answer, get(slot), tag);
        return std::string("meaning=") + (meaning ? "Yes" : "No") +
               "; entities=" + (entities ? "Yes" : "No");
      };
      return "Extractive Summary: " + verdict("extractive") + "\nAbstractive Summary: " +
             verdict("abstractive") + "\nPruned Text: " + verdict("pruned") + "\n";
    }
    case TemplateKind::verbose_rewrite:
      return options_.rewrite == RewriteMode::echo ? get("answer")
                                                    : duplicate_sentences(get("answer"));
    case TemplateKind::gpt_score: {
      const std::size_t total = word_count(get("answer"));
      if (total == 0) return "Score: 0";
      const double ratio = static_cast<double>(essential_words(get("answer"), tag)) / total;
      return "Score: " + std::to_string(static_cast<int>(std::lround(10.0 * ratio)));
    }
    case TemplateKind::gpt_ranking: {
      auto ratio = [&](const std::string& text) {
        const std::size_t total = word_count(text);
        return total == 0 ? 0.0 : static_cast<double>(essential_words(text, tag)) / total;
      };
      const std::string& a1 = get("answer 1");
      const std::string& a2 = get("answer 2");
      const double r1 = ratio(a1);
      const double r2 = ratio(a2);
      bool second = r2 > r1 || (r2 == r1 && word_count(a2) < word_count(a1));
      return std::string("Choice: answer ") + (second ? "2" : "1");
    }
  }
  return {};
}

void MockRouter::add(const std::string& name, std::shared_ptr<gateway::Provider> backend) {
  backends_[name] = std::move(backend);
}

ProviderReply MockRouter::complete(const CompletionRequest& request) {
  const auto colon = request.model.find(':');
  const std::string name = colon == std::string::npos ? "" : request.model.substr(colon + 1);
  const auto it = backends_.find(name);
  if (it == backends_.end()) {
    throw GatewayError(GatewayErrorKind::configuration, "unknown mock model '" + request.model + "'");
  }
  return it->second->complete(request);
}

}  // namespace concise::mock
