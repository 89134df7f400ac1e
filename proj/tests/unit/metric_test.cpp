#include "concise/errors.hpp"
#include "concise/metric.hpp"

#include "gtest/gtest.h"

#include <cctype>
#include <random>
#include <string>

using namespace concise;

namespace {

std::string words(std::size_t n, const std::string& stem = "w") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += stem + std::to_string(i);
  }
  return out;
}

// Independent word counter: rewrite every multi-byte Unicode space to an
// ASCII blank, then count blank-to-nonblank transitions byte by byte.
std::size_t transition_count_oracle(std::string text) {
  static const char* const kMultiByteSpaces[] = {
      "\xC2\x85", "\xC2\xA0", "\xE1\x9A\x80", "\xE2\x80\x80", "\xE2\x80\x81",
      "\xE2\x80\x82", "\xE2\x80\x83", "\xE2\x80\x84", "\xE2\x80\x85", "\xE2\x80\x86",
      "\xE2\x80\x87", "\xE2\x80\x88", "\xE2\x80\x89", "\xE2\x80\x8A", "\xE2\x80\xA8",
      "\xE2\x80\xA9", "\xE2\x80\xAF", "\xE2\x81\x9F", "\xE3\x80\x80"};
  for (const char* sp : kMultiByteSpaces) {
    const std::string needle(sp);
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at)) {
      text.replace(at, needle.size(), " ");
    }
  }
  std::size_t count = 0;
  bool in_space = true;
  for (unsigned char c : text) {
    const bool space = c == ' ' || (c >= 0x09 && c <= 0x0D);
    if (in_space && !space) ++count;
    in_space = space;
  }
  return count;
}

DerivativeSet derivs(std::size_t a, std::size_t e, std::size_t p) {
  return {words(a, "a"), words(e, "e"), words(p, "p")};
}

JudgeVerdicts all_ok() { return {true, true, true}; }

}  // namespace

TEST(WordCount, Examples) {
  EXPECT_EQ(word_count(""), 0u);
  EXPECT_EQ(word_count("the cat sat"), 3u);
  EXPECT_EQ(word_count("  a\tb\nc  "), 3u);
  EXPECT_EQ(transition_count_oracle("  a\tb\nc  "), 3u);
}

TEST(WordCount, UnicodeWhitespaceSeparates) {
  EXPECT_EQ(word_count("a\xC2\xA0" "b"), 2u);          // no-break space
  EXPECT_EQ(word_count("a\xE3\x80\x80" "b\xE2\x80\x83" "c"), 3u);
  EXPECT_EQ(word_count("caf\xC3\xA9 na\xC3\xAFve"), 2u);  // letters, not spaces
  EXPECT_EQ(word_count("\xFF\xFE"), 1u);                  // undecodable bytes are a word
}

TEST(WordCount, MatchesTransitionOracleOnRandomText) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> alphabet = {
      "a", "B", "9", ".", " ", "\t", "\n", "\r", "\xC2\xA0", "\xE2\x80\x83",
      "\xE3\x80\x80", "\xC3\xA9", "\xE4\xB8\xAD", "-", "\x0B"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 40);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string text;
    for (int i = len(rng); i > 0; --i) text += alphabet[pick(rng)];
    ASSERT_EQ(word_count(text), transition_count_oracle(text)) << text;
    ASSERT_EQ(split_words(text).size(), word_count(text));
  }
}

TEST(WordCount, SplitWordsReturnsTokens) {
  const auto w = split_words(" alpha  beta\ngamma ");
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], "alpha");
  EXPECT_EQ(w[2], "gamma");
}

TEST(CompressionTerm, Examples) {
  EXPECT_DOUBLE_EQ(compression_term(100, 60, true, true), 0.60);
  EXPECT_DOUBLE_EQ(compression_term(100, 130, true, true), 1.0);
  EXPECT_DOUBLE_EQ(compression_term(100, 100, true, true), 1.0);
  EXPECT_DOUBLE_EQ(compression_term(100, 10, false, true), 1.0);
  EXPECT_DOUBLE_EQ(compression_term(100, 10, true, false), 1.0);
  EXPECT_DOUBLE_EQ(compression_term(7, 0, true, true), 0.0);
}

TEST(CompressionTerm, ZeroAnswerLengthIsInvalid) {
  EXPECT_THROW(compression_term(0, 0, true, true), InvalidInput);
}

TEST(ConciseScoreOp, Examples) {
  CompressionTerms t;
  t.abstractive_term = 0.6;
  t.extractive_term = 0.7;
  t.pruned_term = 0.8;
  EXPECT_NEAR(concise_score(t).score, 0.70, 1e-15);
  EXPECT_EQ(concise_score(t).n, 3);

  t.abstractive_term = t.extractive_term = t.pruned_term = 1.0;
  EXPECT_EQ(concise_score(t).score, 1.0);
  t.abstractive_term = t.extractive_term = t.pruned_term = 0.0;
  EXPECT_EQ(concise_score(t).score, 0.0);
  EXPECT_EQ(concise_score(t).verbosity(), 1.0);
}

TEST(ConciseScoreOp, RejectsOutOfRangeTerms) {
  CompressionTerms t;
  t.pruned_term = 1.5;
  EXPECT_THROW(concise_score(t), InvalidInput);
  t.pruned_term = -0.1;
  EXPECT_THROW(concise_score(t), InvalidInput);
}

TEST(ScoreAnswer, Composition) {
  const QAPair pair{"r1", "q", words(10)};
  const auto s = score_answer(pair, derivs(5, 6, 4), all_ok());
  EXPECT_NEAR(s.score, 0.5, 1e-15);
  EXPECT_EQ(s.terms.answer_len, 10u);
  EXPECT_EQ(s.terms.derivative_lens[static_cast<int>(Technique::extractive)], 6u);
}

TEST(ScoreAnswer, IdentityScoresOne) {
  const QAPair pair{"r1", "q", words(10)};
  const DerivativeSet same{pair.answer, pair.answer, pair.answer};
  EXPECT_EQ(score_answer(pair, same, all_ok()).score, 1.0);
}

TEST(ScoreAnswer, LongerDerivativeIsClamped) {
  // Hand trace: |A| = 8; abstractive 4 -> 0.5; extractive 4 -> 0.5;
  // pruned 12 > 8 -> removal clamped to zero -> 1.0. Mean = 2/3.
  const QAPair pair{"r1", "q", words(8)};
  const auto s = score_answer(pair, derivs(4, 4, 12), all_ok());
  EXPECT_NEAR(s.score, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(s.terms.status[2], TermStatus::longer_than_answer);
}

TEST(ScoreAnswer, RejectedAndUnparsedDerivativesAreNeutral) {
  const QAPair pair{"r1", "q", words(10)};
  DerivativeSet d = derivs(2, 2, 2);
  d.extractive.reset();
  const auto s = score_answer(pair, d, {false, true, true});
  EXPECT_EQ(s.terms.abstractive_term, 1.0);
  EXPECT_EQ(s.terms.extractive_term, 1.0);
  EXPECT_NEAR(s.terms.pruned_term, 0.2, 1e-15);
  EXPECT_EQ(s.terms.status[0], TermStatus::judge_rejected);
  EXPECT_EQ(s.terms.status[1], TermStatus::parse_failed);

  const auto all_rejected = score_answer(pair, derivs(1, 1, 1), {false, false, false});
  EXPECT_EQ(all_rejected.score, 1.0);
}

TEST(ScoreAnswer, EmptyAcceptedDerivativeWarns) {
  const QAPair pair{"r1", "q", words(4)};
  const auto s = score_answer(pair, {"", words(4), words(4)}, all_ok());
  EXPECT_EQ(s.terms.abstractive_term, 0.0);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("abstractive"), std::string::npos);
}

TEST(ScoreAnswer, EmptyAnswerIsInvalid) {
  EXPECT_THROW(score_answer({"r", "q", " \n "}, derivs(1, 1, 1), all_ok()), InvalidInput);
}

// Property tests over random inputs.

class ScoreProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{2025};
  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  bool coin() { return uniform(0, 1) == 1; }
};

TEST_F(ScoreProperties, BoundedAndDeterministic) {
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = uniform(1, 60);
    const QAPair pair{"r", "q", words(n)};
    const auto d = derivs(uniform(0, 80), uniform(0, 80), uniform(0, 80));
    const JudgeVerdicts v{coin(), coin(), coin()};
    const auto s1 = score_answer(pair, d, v);
    const auto s2 = score_answer(pair, d, v);
    ASSERT_GE(s1.score, 0.0);
    ASSERT_LE(s1.score, 1.0);
    ASSERT_EQ(s1.score, s2.score);
  }
}

TEST_F(ScoreProperties, ClampIdempotence) {
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = uniform(1, 40);
    const QAPair pair{"r", "q", words(n)};
    const std::size_t a = uniform(0, n);
    const std::size_t e = uniform(0, n);
    const auto longer = score_answer(pair, derivs(a, e, n + uniform(1, 30)), all_ok());
    const auto equal = score_answer(pair, derivs(a, e, n), all_ok());
    ASSERT_EQ(longer.score, equal.score);
  }
}

TEST_F(ScoreProperties, DuplicatingAnswerHalvesTerms) {
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = uniform(1, 40);
    const QAPair pair{"r", "q", words(n)};
    const QAPair doubled{"r", "q", pair.answer + " " + pair.answer};
    const auto d = derivs(uniform(0, n), uniform(0, n), uniform(0, n));
    const auto s1 = score_answer(pair, d, all_ok());
    const auto s2 = score_answer(doubled, d, all_ok());
    for (Technique t : kTechniques) {
      ASSERT_NEAR(s2.terms.term(t), s1.terms.term(t) / 2.0, 1e-15);
    }
  }
}

TEST(BaselineScoreType, Validates) {
  EXPECT_EQ(BaselineScore::gpt_score(7).score(), 7);
  EXPECT_THROW(BaselineScore::gpt_score(11), InvalidInput);
  EXPECT_THROW(BaselineScore::gpt_score(-1), InvalidInput);
  EXPECT_EQ(BaselineScore::gpt_ranking(Choice::second).choice(), Choice::second);
  EXPECT_THROW(BaselineScore::gpt_ranking(Choice::tie), InvalidInput);
  EXPECT_THROW(BaselineScore::gpt_score(3).choice(), InvalidInput);
}
