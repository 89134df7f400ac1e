#include "concise/prompts.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <sstream>
#include <utility>

namespace concise::prompts {

namespace detail {
const std::map<std::string, std::string>& embedded_resources();
}

namespace {

constexpr std::array<std::pair<TemplateKind, std::string_view>, 8> kKindNames = {{
    {TemplateKind::generate_derivatives, "generate_derivatives"},
    {TemplateKind::judge, "judge"},
    {TemplateKind::verbose_rewrite, "verbose_rewrite"},
    {TemplateKind::gpt_score, "gpt_score"},
    {TemplateKind::gpt_ranking, "gpt_ranking"},
    {TemplateKind::generate_abstractive, "generate_abstractive"},
    {TemplateKind::generate_extractive, "generate_extractive"},
    {TemplateKind::generate_pruned, "generate_pruned"},
}};

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// Length of the declared placeholder token at body[pos], or 0.
std::size_t match_placeholder(std::string_view body, std::size_t pos,
                              const std::vector<std::string>& names,
                              const std::string** matched) {
  if (body[pos] != '[') return 0;
  for (const auto& name : names) {
    const std::size_t len = name.size() + 2;
    if (body.size() - pos >= len && body.compare(pos + 1, name.size(), name) == 0 &&
        body[pos + 1 + name.size()] == ']') {
      *matched = &name;
      return len;
    }
  }
  return 0;
}

}  // namespace

std::string_view kind_name(TemplateKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<TemplateKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

TemplateKind separate_kind(Technique t) {
  switch (t) {
    case Technique::abstractive: return TemplateKind::generate_abstractive;
    case Technique::extractive: return TemplateKind::generate_extractive;
    case Technique::pruned: break;
  }
  return TemplateKind::generate_pruned;
}

std::string PromptTemplate::full_version() const {
  return std::string(kind_name(kind)) + "@" + version + "+rider." + rider_version;
}

std::string render_body(const PromptTemplate& tmpl, const Bindings& bindings) {
  const std::string_view body = tmpl.body;
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::string* name = nullptr;
    if (const std::size_t len = match_placeholder(body, pos, tmpl.placeholders, &name)) {
      const auto it = bindings.find(*name);
      if (it == bindings.end()) throw MissingBinding(*name);
      out += it->second;
      pos += len;
    } else {
      out += body[pos++];
    }
  }
  return out;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  std::string out = render_body(tmpl, bindings);
  if (!tmpl.rider.empty()) {
    out += "\n\n";
    out += tmpl.rider;
  }
  return out;
}

std::optional<Bindings> match_rendered(const PromptTemplate& tmpl, std::string_view prompt) {
  // Split the template into alternating literal and placeholder pieces.
  std::vector<std::string> literals(1);
  std::vector<const std::string*> names;
  const std::string_view body = tmpl.body;
  for (std::size_t pos = 0; pos < body.size();) {
    const std::string* name = nullptr;
    if (const std::size_t len = match_placeholder(body, pos, tmpl.placeholders, &name)) {
      names.push_back(name);
      literals.emplace_back();
      pos += len;
    } else {
      literals.back() += body[pos++];
    }
  }
  if (!tmpl.rider.empty()) literals.back() += "\n\n" + tmpl.rider;

  if (!prompt.starts_with(literals.front())) return std::nullopt;
  Bindings out;
  std::size_t pos = literals.front().size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& next = literals[i + 1];
    std::size_t end = 0;
    if (i + 1 == names.size()) {
      if (prompt.size() < pos + next.size() || !prompt.ends_with(next)) return std::nullopt;
      end = prompt.size() - next.size();
    } else {
      if (next.empty()) return std::nullopt;
      end = prompt.find(next, pos);
      if (end == std::string_view::npos) return std::nullopt;
    }
    std::string value(prompt.substr(pos, end - pos));
    const auto [it, inserted] = out.emplace(*names[i], value);
    if (!inserted && it->second != value) return std::nullopt;
    pos = end + next.size();
  }
  if (names.empty() && prompt.size() != literals.front().size()) return std::nullopt;
  return out;
}

const TemplateSet& TemplateSet::embedded() {
  static const TemplateSet set = [] {
    const auto& resources = detail::embedded_resources();
    const auto manifest = resources.find("manifest.json");
    if (manifest == resources.end()) throw TemplateError("embedded manifest.json missing");
    return from_manifest(manifest->second, [&](const std::string& name) {
      const auto it = resources.find(name);
      if (it == resources.end()) throw TemplateError("embedded resource missing: " + name);
      return it->second;
    });
  }();
  return set;
}

TemplateSet TemplateSet::load_directory(const std::filesystem::path& dir) {
  auto read = [&](const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw IoError("cannot read template resource " + (dir / name).string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return from_manifest(read("manifest.json"), read);
}

TemplateSet TemplateSet::from_manifest(
    std::string_view manifest_json,
    const std::function<std::string(const std::string&)>& read_file) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_json);
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("manifest is not valid JSON: ") + e.what());
  }

  TemplateSet set;
  try {
    set.set_version_ = manifest.at("set_version").get<std::string>();
    for (const auto& entry : manifest.at("templates")) {
      const auto kind_str = entry.at("kind").get<std::string>();
      const auto kind = parse_kind(kind_str);
      if (!kind) throw TemplateError("unknown template kind '" + kind_str + "'");

      PromptTemplate t;
      t.kind = *kind;
      t.version = entry.at("version").get<std::string>();
      t.body = strip_trailing_newlines(read_file(entry.at("file").get<std::string>()));
      t.placeholders = entry.at("placeholders").get<std::vector<std::string>>();
      if (entry.contains("rider")) {
        t.rider = strip_trailing_newlines(read_file(entry.at("rider").get<std::string>()));
        t.rider_version = entry.value("rider_version", std::string("0"));
      }
      for (const auto& p : t.placeholders) {
        if (t.body.find("[" + p + "]") == std::string::npos) {
          throw TemplateError("template " + kind_str + " declares [" + p +
                              "] but its body never uses it");
        }
      }
      if (!set.templates_.emplace(t.kind, std::move(t)).second) {
        throw TemplateError("duplicate template kind '" + kind_str + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("malformed manifest: ") + e.what());
  }
  return set;
}

const PromptTemplate& TemplateSet::get(TemplateKind kind) const {
  const auto it = templates_.find(kind);
  if (it == templates_.end()) {
    throw TemplateError("no template of kind " + std::string(kind_name(kind)));
  }
  return it->second;
}

}  // namespace concise::prompts
