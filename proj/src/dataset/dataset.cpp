#include "concise/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace concise::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot read ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(std::string("error reading ") + what + " " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw IoError("error writing " + path.string());
}

// Calls fn(line_number, object) for every nonblank line; lines that are not
// JSON objects become rejections.
template <typename Fn>
void for_each_object(std::string_view text, std::vector<Rejection>& rejections, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      rejections.push_back({line_no, "malformed JSON"});
    } else if (!j.is_object()) {
      rejections.push_back({line_no, "line is not a JSON object"});
    } else {
      try {
        fn(line_no, j);
      } catch (const InvalidInput& e) {
        rejections.push_back({line_no, e.what()});
      } catch (const json::exception& e) {
        rejections.push_back({line_no, e.what()});
      }
    }
    if (end == text.size()) break;
  }
}

// String or integer field rendered as text; nullopt when absent or null.
std::optional<std::string> id_field(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw InvalidInput("field '" + key + "' must be a string or integer");
}

std::string require_id(const json& j, const std::string& key) {
  auto v = id_field(j, key);
  if (!v || v->empty()) throw InvalidInput("missing or empty '" + key + "'");
  return *v;
}

std::string text_field(const json& j, const std::string& key, bool required) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw InvalidInput("missing '" + key + "'");
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    // WikiEval stores contexts as a list of passages.
    std::string out;
    for (const auto& part : *it) {
      if (!part.is_string()) throw InvalidInput("field '" + key + "' must hold strings");
      if (!out.empty()) out += "\n\n";
      out += part.get<std::string>();
    }
    return out;
  }
  throw InvalidInput("field '" + key + "' must be a string");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

PairPreference parse_preference(const json& v) {
  if (v.is_number_integer()) {
    const auto n = v.get<std::int64_t>();
    if (n == 1) return PairPreference::first;
    if (n == 2) return PairPreference::second;
  } else if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "first" || s == "1") return PairPreference::first;
    if (s == "second" || s == "2") return PairPreference::second;
  }
  throw InvalidInput("'preferred' must be first or second, got " + v.dump());
}

}  // namespace

FieldMapping FieldMapping::wikieval() {
  FieldMapping m;
  m.id = "source";
  m.question = "question";
  m.answer = "grounded_answer";
  m.context = "context_v1";
  m.source = "source";
  return m;
}

FieldMapping FieldMapping::from_file(const fs::path& path) {
  const std::string text = read_file(path, "field mapping");
  FieldMapping m;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("field mapping must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      std::string* slot = key == "id"         ? &m.id
                          : key == "question" ? &m.question
                          : key == "answer"   ? &m.answer
                          : key == "context"  ? &m.context
                          : key == "source"   ? &m.source
                                              : nullptr;
      if (!slot) throw ConfigError("unknown field-mapping key '" + key + "'");
      *slot = value.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed field mapping " + path.string() + ": " + e.what());
  }
  return m;
}

LoadReport<CorpusRecord> parse_corpus(std::string_view text, const FieldMapping& mapping) {
  LoadReport<CorpusRecord> report;
  std::set<std::string> seen;
  const std::set<std::string> mapped = {mapping.id, mapping.question, mapping.answer,
                                        mapping.context, mapping.source};
  for_each_object(text, report.rejections, [&](std::size_t, const json& j) {
    CorpusRecord r;
    r.id = require_id(j, mapping.id);
    r.question = text_field(j, mapping.question, true);
    r.answer = text_field(j, mapping.answer, true);
    if (word_count(r.question) == 0) throw InvalidInput("empty question");
    if (word_count(r.answer) == 0) throw InvalidInput("empty answer");
    r.context = text_field(j, mapping.context, false);
    r.source_meta = mapping.source == mapping.id ? r.id : text_field(j, mapping.source, false);
    for (const auto& [key, value] : j.items()) {
      if (!mapped.count(key)) r.extra[key] = value;
    }
    if (!seen.insert(r.id).second) throw InvalidInput("duplicate id '" + r.id + "'");
    report.records.push_back(std::move(r));
  });
  return report;
}

LoadReport<CorpusRecord> load_corpus(const fs::path& path, const FieldMapping& mapping) {
  auto report = parse_corpus(read_file(path, "corpus"), mapping);
  if (report.records.empty()) {
    throw EmptyCorpus("corpus " + path.string() + " has no valid records (" +
                      std::to_string(report.rejections.size()) + " rejected)");
  }
  return report;
}

std::string serialize_corpus(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = r.extra.is_object() ? r.extra : json::object();
    j["id"] = r.id;
    j["question"] = r.question;
    j["answer"] = r.answer;
    if (!r.context.empty()) j["context"] = r.context;
    if (!r.source_meta.empty()) j["source"] = r.source_meta;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const fs::path& path, const std::vector<CorpusRecord>& records) {
  write_file(path, serialize_corpus(records));
}

std::size_t required_verbose_words(std::size_t original_words, double min_ratio) {
  // The epsilon keeps 1.3 * 10 from rounding up to 14.
  const auto scaled =
      static_cast<std::size_t>(std::ceil(min_ratio * static_cast<double>(original_words) - 1e-9));
  return std::max(scaled, original_words + 1);
}

VerbosePair generate_verbose(const CorpusRecord& record, gateway::Gateway& gw,
                             const VerboseOptions& options) {
  if (options.model.empty()) throw ConfigError("no verbose-rewriter model configured");
  if (options.max_attempts < 1) throw InvalidInput("verbose attempt cap must be at least 1");
  if (!(options.min_ratio >= 1.0)) throw InvalidInput("verbose length ratio must be >= 1");

  const auto& set = options.templates ? *options.templates : prompts::TemplateSet::embedded();
  const auto& tmpl = set.get(prompts::TemplateKind::verbose_rewrite);
  const std::size_t original_words = word_count(record.answer);
  if (original_words == 0) throw InvalidInput("record '" + record.id + "' has an empty answer");
  const std::size_t needed = required_verbose_words(original_words, options.min_ratio);

  VerbosePair pair;
  pair.base_id = record.id;
  pair.question = record.question;
  pair.original = record.answer;
  pair.generator_model = options.model;

  gateway::CompletionRequest req;
  req.model = options.model;
  req.prompt = prompts::render(tmpl, {{"answer", record.answer}});
  req.temperature = options.temperature;
  req.max_output = options.max_output;
  req.template_version = tmpl.full_version();

  std::size_t got = 0;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    req.seed_hint = attempt > 1 ? std::optional<std::int64_t>(attempt) : std::nullopt;
    const auto result = gw.complete(req);
    pair.attempts = attempt;
    pair.cache_keys.push_back(result.cache_key);
    pair.verbose = trim(result.text);
    got = word_count(pair.verbose);
    if (got >= needed) return pair;
  }
  pair.flagged = true;
  pair.flag_reason = "verbose variant has " + std::to_string(got) + " words, needs " +
                     std::to_string(needed) + " (" + std::to_string(original_words) +
                     " original) after " + std::to_string(pair.attempts) + " attempts";
  return pair;
}

std::string serialize_verbose_pair(const VerbosePair& p) {
  const json j = {{"base_id", p.base_id},
                  {"question", p.question},
                  {"original", p.original},
                  {"verbose", p.verbose},
                  {"generator_model", p.generator_model},
                  {"attempts", p.attempts},
                  {"flagged", p.flagged},
                  {"flag_reason", p.flag_reason},
                  {"cache_keys", p.cache_keys}};
  return j.dump();
}

void save_verbose_pairs(const fs::path& path, const std::vector<VerbosePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += serialize_verbose_pair(p) + '\n';
  write_file(path, out);
}

LoadReport<VerbosePair> load_verbose_pairs(const fs::path& path) {
  LoadReport<VerbosePair> report;
  std::set<std::string> seen;
  for_each_object(read_file(path, "verbose-pair file"), report.rejections,
                  [&](std::size_t, const json& j) {
                    VerbosePair p;
                    p.base_id = require_id(j, "base_id");
                    p.question = text_field(j, "question", true);
                    p.original = text_field(j, "original", true);
                    p.verbose = text_field(j, "verbose", true);
                    p.generator_model = text_field(j, "generator_model", false);
                    p.attempts = j.value("attempts", 0);
                    p.flagged = j.value("flagged", false);
                    p.flag_reason = j.value("flag_reason", std::string());
                    p.cache_keys = j.value("cache_keys", std::vector<std::string>{});
                    if (word_count(p.original) == 0) throw InvalidInput("empty original answer");
                    if (!p.flagged && word_count(p.verbose) <= word_count(p.original)) {
                      throw InvalidInput("unflagged pair '" + p.base_id +
                                         "' is not longer than its original");
                    }
                    if (!seen.insert(p.base_id).second) {
                      throw InvalidInput("duplicate base_id '" + p.base_id + "'");
                    }
                    report.records.push_back(std::move(p));
                  });
  if (report.records.empty()) {
    throw EmptyCorpus("verbose-pair file " + path.string() + " has no valid pairs");
  }
  return report;
}

std::string verbose_id(const std::string& base_id) { return base_id + ".verbose"; }

std::vector<CorpusRecord> expand_pairs(const std::vector<VerbosePair>& pairs,
                                       bool include_flagged) {
  std::vector<CorpusRecord> out;
  for (const auto& p : pairs) {
    if (p.flagged && !include_flagged) continue;
    CorpusRecord original;
    original.id = p.base_id;
    original.question = p.question;
    original.answer = p.original;
    original.extra = {{"variant", "original"}};
    CorpusRecord verbose;
    verbose.id = verbose_id(p.base_id);
    verbose.question = p.question;
    verbose.answer = p.verbose;
    verbose.extra = {{"variant", "verbose"}, {"base_id", p.base_id}};
    out.push_back(std::move(original));
    out.push_back(std::move(verbose));
  }
  return out;
}

LoadReport<LikertAnnotation> parse_likert(std::string_view text,
                                          const std::set<std::string>* known_ids) {
  LoadReport<LikertAnnotation> report;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_object(text, report.rejections, [&](std::size_t, const json& j) {
    LikertAnnotation a;
    a.record_id = require_id(j, "record_id");
    a.annotator_id = require_id(j, "annotator_id");
    const auto it = j.find("rating");
    if (it == j.end() || !it->is_number()) throw InvalidInput("missing numeric 'rating'");
    const double value = it->get<double>();
    if (value != std::floor(value)) throw InvalidInput("rating must be an integer, got " + it->dump());
    if (value < 1 || value > 5) {
      throw InvalidInput("rating " + it->dump() + " outside the range 1..5");
    }
    a.rating = static_cast<int>(value);
    if (known_ids && !known_ids->count(a.record_id)) {
      throw InvalidInput("unknown record id '" + a.record_id + "'");
    }
    if (!seen.emplace(a.record_id, a.annotator_id).second) {
      throw InvalidInput("duplicate rating by '" + a.annotator_id + "' for '" + a.record_id + "'");
    }
    report.records.push_back(std::move(a));
  });
  return report;
}

LoadReport<LikertAnnotation> load_likert(const fs::path& path,
                                         const std::set<std::string>* known_ids) {
  return parse_likert(read_file(path, "Likert annotation file"), known_ids);
}

LoadReport<PairwiseAnnotation> parse_pairwise(std::string_view text,
                                              const std::set<std::string>* known_ids) {
  LoadReport<PairwiseAnnotation> report;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_object(text, report.rejections, [&](std::size_t, const json& j) {
    PairwiseAnnotation a;
    a.pair_id = require_id(j, "pair_id");
    a.annotator_id = require_id(j, "annotator_id");
    a.first_id = id_field(j, "first_id").value_or(a.pair_id);
    a.second_id = id_field(j, "second_id").value_or(verbose_id(a.pair_id));
    if (a.first_id == a.second_id) throw InvalidInput("pair compares '" + a.first_id + "' with itself");
    const auto it = j.find("preferred");
    if (it == j.end()) throw InvalidInput("missing 'preferred'");
    a.preferred = parse_preference(*it);
    if (known_ids) {
      for (const auto* id : {&a.first_id, &a.second_id}) {
        if (!known_ids->count(*id)) throw InvalidInput("unknown record id '" + *id + "'");
      }
    }
    if (!seen.emplace(a.pair_id, a.annotator_id).second) {
      throw InvalidInput("duplicate judgement by '" + a.annotator_id + "' for '" + a.pair_id + "'");
    }
    report.records.push_back(std::move(a));
  });
  return report;
}

LoadReport<PairwiseAnnotation> load_pairwise(const fs::path& path,
                                             const std::set<std::string>* known_ids) {
  return parse_pairwise(read_file(path, "pairwise annotation file"), known_ids);
}

std::map<std::string, double> aggregate_likert(const std::vector<LikertAnnotation>& annotations,
                                               LikertAggregate how) {
  std::map<std::string, std::vector<int>> by_record;
  for (const auto& a : annotations) by_record[a.record_id].push_back(a.rating);
  std::map<std::string, double> out;
  for (auto& [id, ratings] : by_record) {
    if (how == LikertAggregate::mean) {
      long sum = 0;
      for (int r : ratings) sum += r;
      out[id] = static_cast<double>(sum) / static_cast<double>(ratings.size());
    } else {
      std::sort(ratings.begin(), ratings.end());
      const std::size_t n = ratings.size();
      out[id] = n % 2 ? ratings[n / 2] : (ratings[n / 2 - 1] + ratings[n / 2]) / 2.0;
    }
  }
  return out;
}

std::vector<PairVote> aggregate_pairwise(const std::vector<PairwiseAnnotation>& annotations) {
  std::map<std::string, PairVote> votes;
  for (const auto& a : annotations) {
    auto [it, inserted] = votes.try_emplace(a.pair_id);
    PairVote& v = it->second;
    if (inserted) {
      v.pair_id = a.pair_id;
      v.first_id = a.first_id;
      v.second_id = a.second_id;
    } else if (v.first_id != a.first_id || v.second_id != a.second_id) {
      throw InvalidInput("pair '" + a.pair_id + "' is annotated with conflicting record ids");
    }
    (a.preferred == PairPreference::first ? v.votes_first : v.votes_second) += 1;
  }
  std::vector<PairVote> out;
  for (auto& [id, v] : votes) {
    v.majority = v.votes_first > v.votes_second   ? Choice::first
                 : v.votes_second > v.votes_first ? Choice::second
                                                  : Choice::tie;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace concise::dataset
