#pragma once

// Conciseness scoring: word counting, compression terms, judge gating and
// the three-term mean. Pure computation, no I/O.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace concise {

/// The three compression techniques, in canonical order.
enum class Technique : std::uint8_t { abstractive = 0, extractive = 1, pruned = 2 };

inline constexpr std::array<Technique, 3> kTechniques = {
    Technique::abstractive, Technique::extractive, Technique::pruned};

/// Lower-case identifier used in records and reports ("abstractive", ...).
std::string_view technique_name(Technique t);

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
};

/// Compressed versions of one answer. An empty optional marks a slot the
/// reply parser could not recover.
struct DerivativeSet {
  std::optional<std::string> abstractive;
  std::optional<std::string> extractive;
  std::optional<std::string> pruned;

  const std::optional<std::string>& get(Technique t) const;
  std::optional<std::string>& get(Technique t);
  bool parse_ok(Technique t) const { return get(t).has_value(); }
  bool all_parsed() const;
};

/// Judge output. Each flag is true only if the derivative kept both the
/// core meaning and every named entity.
struct JudgeVerdicts {
  bool abstractive_ok = false;
  bool extractive_ok = false;
  bool pruned_ok = false;

  bool get(Technique t) const;
  void set(Technique t, bool ok);
};

/// Why a term has the value it has.
enum class TermStatus : std::uint8_t {
  counted,             // retained ratio used
  longer_than_answer,  // derivative has more words; clamped to 1
  judge_rejected,      // judge said No; neutral term 1
  parse_failed,        // derivative missing; neutral term 1
};

std::string_view term_status_name(TermStatus s);

struct CompressionTerms {
  double abstractive_term = 1.0;
  double extractive_term = 1.0;
  double pruned_term = 1.0;
  std::size_t answer_len = 0;
  // Indexed by Technique. Zero when the slot failed to parse.
  std::array<std::size_t, 3> derivative_lens{};
  std::array<TermStatus, 3> status{};

  double term(Technique t) const;
  void set_term(Technique t, double value);
};

struct ConciseScore {
  CompressionTerms terms;
  double score = 1.0;  // 1 = nothing removable, 0 = fully redundant
  int n = 3;
  std::vector<std::string> warnings;

  double verbosity() const { return 1.0 - score; }
};

/// Number of maximal runs of non-whitespace characters. Whitespace is the
/// Unicode White_Space set decoded from UTF-8; undecodable bytes count as
/// word characters.
std::size_t word_count(std::string_view text);

/// The words themselves, as views into `text`.
std::vector<std::string_view> split_words(std::string_view text);

/// Retained ratio derivative_len / answer_len for an admissible derivative,
/// 1.0 otherwise (longer than the answer, judge rejection, parse failure).
/// Throws InvalidInput when answer_len is zero.
double compression_term(std::size_t answer_len, std::size_t derivative_len,
                        bool judge_ok, bool parse_ok);

/// Mean of the three terms. Throws InvalidInput if a term lies outside [0,1].
ConciseScore concise_score(const CompressionTerms& terms);

/// Full composition for one answer. Throws InvalidInput for an answer with
/// no words.
ConciseScore score_answer(const QAPair& pair, const DerivativeSet& derivatives,
                          const JudgeVerdicts& verdicts);

/// A pairwise decision. `tie` only arises from metric comparisons; human
/// and LLM-ranking choices are always first or second.
enum class Choice : std::uint8_t { first, second, tie };

std::string_view choice_name(Choice c);
std::optional<Choice> parse_choice_name(std::string_view s);

enum class BaselineKind : std::uint8_t { gpt_score, gpt_ranking };

/// Output of one of the two LLM baselines: a 0-10 rating or a pick
/// between two candidates.
class BaselineScore {
 public:
  static BaselineScore gpt_score(int value);
  static BaselineScore gpt_ranking(Choice choice);

  BaselineKind kind() const { return kind_; }
  int score() const;
  Choice choice() const;

 private:
  BaselineScore(BaselineKind kind, int value, Choice choice)
      : kind_(kind), value_(value), choice_(choice) {}

  BaselineKind kind_;
  int value_;
  Choice choice_;
};

}  // namespace concise
