#pragma once

// Corpus, verbose-variant and human-annotation files. Every file is JSON
// lines: one object per line, blank lines ignored.

#include "concise/errors.hpp"
#include "concise/gateway.hpp"
#include "concise/metric.hpp"
#include "concise/prompts.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace concise::dataset {

/// The loader found no valid record.
class EmptyCorpus : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct CorpusRecord {
  std::string id;
  std::string question;
  std::string answer;
  std::string context;      // ingested, never scored
  std::string source_meta;  // page title or other provenance
  nlohmann::json extra = nlohmann::json::object();  // unmapped fields, kept for round trips

  bool operator==(const CorpusRecord&) const = default;
};

/// A line the loader refused, with its 1-based line number.
struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

template <typename T>
struct LoadReport {
  std::vector<T> records;
  std::vector<Rejection> rejections;
};

/// Source column for each CorpusRecord field. An integer id is accepted and
/// converted to its decimal text.
struct FieldMapping {
  std::string id = "id";
  std::string question = "question";
  std::string answer = "answer";
  std::string context = "context";
  std::string source = "source";

  /// Hugging Face WikiEval export: the page title doubles as the id.
  static FieldMapping wikieval();
  /// JSON object with any subset of the five keys above.
  static FieldMapping from_file(const std::filesystem::path& path);
};

/// Loads valid lines and reports the rest: malformed JSON, missing or empty
/// question/answer, duplicate id. Throws IoError if unreadable and
/// EmptyCorpus if nothing survived.
LoadReport<CorpusRecord> load_corpus(const std::filesystem::path& path,
                                     const FieldMapping& mapping = {});
LoadReport<CorpusRecord> parse_corpus(std::string_view text, const FieldMapping& mapping = {});

/// Writes records in the default schema, unmapped fields included.
void save_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);
std::string serialize_corpus(const std::vector<CorpusRecord>& records);

struct VerbosePair {
  std::string base_id;
  std::string question;
  std::string original;
  std::string verbose;
  std::string generator_model;
  int attempts = 0;
  bool flagged = false;      // length gate never met; `verbose` holds the last reply
  std::string flag_reason;
  std::vector<std::string> cache_keys;

  bool operator==(const VerbosePair&) const = default;
};

struct VerboseOptions {
  std::string model;
  int max_attempts = 3;
  double min_ratio = 1.3;  // verbose words >= min_ratio * original words
  double temperature = 0.0;
  int max_output = 2048;
  const prompts::TemplateSet* templates = nullptr;  // null: embedded set
};

/// Renders the verbose-rewrite prompt and checks the length gate. Attempt k
/// > 1 carries seed_hint k so it reaches the provider instead of the cached
/// reply of attempt k-1. Gateway errors propagate.
VerbosePair generate_verbose(const CorpusRecord& record, gateway::Gateway& gw,
                             const VerboseOptions& options);

/// Number of words a verbose variant needs to pass the gate.
std::size_t required_verbose_words(std::size_t original_words, double min_ratio);

LoadReport<VerbosePair> load_verbose_pairs(const std::filesystem::path& path);
void save_verbose_pairs(const std::filesystem::path& path, const std::vector<VerbosePair>& pairs);
std::string serialize_verbose_pair(const VerbosePair& pair);

/// Id given to the verbose member of a pair.
std::string verbose_id(const std::string& base_id);

/// Each usable pair becomes two corpus records, `<id>` and `<id>.verbose`.
/// Flagged pairs are skipped unless `include_flagged`.
std::vector<CorpusRecord> expand_pairs(const std::vector<VerbosePair>& pairs,
                                       bool include_flagged = false);

struct LikertAnnotation {
  std::string record_id;
  std::string annotator_id;
  int rating = 0;  // 1 very verbose .. 5 very concise
};

enum class PairPreference { first, second };

struct PairwiseAnnotation {
  std::string pair_id;
  std::string first_id;   // defaults to pair_id
  std::string second_id;  // defaults to verbose_id(pair_id)
  std::string annotator_id;
  PairPreference preferred = PairPreference::first;
};

/// {"record_id", "annotator_id", "rating"}. Ratings outside 1..5 and ids
/// missing from `known_ids` (when given) are rejected and reported.
LoadReport<LikertAnnotation> load_likert(const std::filesystem::path& path,
                                         const std::set<std::string>* known_ids = nullptr);
LoadReport<LikertAnnotation> parse_likert(std::string_view text,
                                          const std::set<std::string>* known_ids = nullptr);

/// {"pair_id", "annotator_id", "preferred": "first"|"second"|1|2} with
/// optional "first_id"/"second_id".
LoadReport<PairwiseAnnotation> load_pairwise(const std::filesystem::path& path,
                                             const std::set<std::string>* known_ids = nullptr);
LoadReport<PairwiseAnnotation> parse_pairwise(std::string_view text,
                                              const std::set<std::string>* known_ids = nullptr);

enum class LikertAggregate { mean, median };

/// Per-record aggregate rating, keyed by record id.
std::map<std::string, double> aggregate_likert(const std::vector<LikertAnnotation>& annotations,
                                               LikertAggregate how = LikertAggregate::mean);

struct PairVote {
  std::string pair_id;
  std::string first_id;
  std::string second_id;
  int votes_first = 0;
  int votes_second = 0;
  Choice majority = Choice::tie;  // tie on an even split
};

/// Majority vote per pair, ordered by pair id. Conflicting first/second ids
/// for one pair id raise InvalidInput.
std::vector<PairVote> aggregate_pairwise(const std::vector<PairwiseAnnotation>& annotations);

}  // namespace concise::dataset
