#include "concise/prompts.hpp"

#include "gtest/gtest.h"

#include <algorithm>
#include <array>
#include <filesystem>
#include <random>

using namespace concise;
using namespace concise::prompts;

namespace {

const TemplateSet& templates() { return TemplateSet::embedded(); }

// Reference splitter for the canonical "### Label" layout: finds each
// label line by exact match and takes text up to the next one.
DerivativeSet reference_split(const std::string& reply) {
  static const std::array<std::pair<std::string, Technique>, 3> kLabels = {{
      {"### Abstractive Summary\n", Technique::abstractive},
      {"### Extractive Summary\n", Technique::extractive},
      {"### Pruned Text\n", Technique::pruned},
  }};
  std::vector<std::pair<std::size_t, std::size_t>> starts;  // position, label index
  for (std::size_t l = 0; l < kLabels.size(); ++l) {
    const auto at = reply.find(kLabels[l].first);
    if (at != std::string::npos) starts.emplace_back(at, l);
  }
  std::sort(starts.begin(), starts.end());
  DerivativeSet out;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto [at, l] = starts[i];
    const std::size_t begin = at + kLabels[l].first.size();
    const std::size_t end = i + 1 < starts.size() ? starts[i + 1].first : reply.size();
    std::string text = reply.substr(begin, end - begin);
    while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
    out.get(kLabels[l].second) = text;
  }
  return out;
}

}  // namespace

TEST(Templates, EmbeddedSetHasEveryKind) {
  for (auto kind : {TemplateKind::generate_derivatives, TemplateKind::judge,
                    TemplateKind::verbose_rewrite, TemplateKind::gpt_score,
                    TemplateKind::gpt_ranking, TemplateKind::generate_abstractive,
                    TemplateKind::generate_extractive, TemplateKind::generate_pruned}) {
    const auto& t = templates().get(kind);
    EXPECT_EQ(t.kind, kind);
    EXPECT_FALSE(t.body.empty());
    EXPECT_FALSE(t.rider.empty());
  }
  EXPECT_EQ(templates().get(TemplateKind::judge).full_version(), "judge@1+rider.1");
}

TEST(Templates, BodiesCarryThePromptWording) {
  const auto& gen = templates().get(TemplateKind::generate_derivatives).body;
  EXPECT_NE(gen.find("generate three versions of the answer"), std::string::npos);
  EXPECT_NE(gen.find("Prioritize maximum conciseness while maintaining semantic integrity."),
            std::string::npos);
  const auto& judge = templates().get(TemplateKind::judge).body;
  EXPECT_NE(judge.find("provide a binary assessment (Yes/No)"), std::string::npos);
  const auto& score = templates().get(TemplateKind::gpt_score).body;
  EXPECT_NE(score.find("assign a score for conciseness in the range 0\xE2\x80\x93" "10"),
            std::string::npos);
  const auto& rewrite = templates().get(TemplateKind::verbose_rewrite).body;
  EXPECT_NE(rewrite.find("Ensure the rewritten answer is notably longer"), std::string::npos);
}

TEST(Templates, DirectoryLoadMatchesEmbedded) {
  const auto dir = std::filesystem::path(CONCISE_SOURCE_DIR) / "resources" / "prompts";
  const auto loaded = TemplateSet::load_directory(dir);
  for (auto kind : {TemplateKind::generate_derivatives, TemplateKind::judge,
                    TemplateKind::gpt_ranking}) {
    EXPECT_EQ(loaded.get(kind).body, templates().get(kind).body);
    EXPECT_EQ(loaded.get(kind).rider, templates().get(kind).rider);
  }
}

TEST(Templates, ManifestValidation) {
  auto files = [](const std::string& name) -> std::string {
    return name == "a.txt" ? "hello [answer]" : "no placeholders here";
  };
  EXPECT_NO_THROW(TemplateSet::from_manifest(
      R"({"set_version":"x","templates":[{"kind":"judge","file":"a.txt","version":"1","placeholders":["answer"]}]})",
      files));
  EXPECT_THROW(TemplateSet::from_manifest(
                   R"({"set_version":"x","templates":[{"kind":"judge","file":"b.txt","version":"1","placeholders":["answer"]}]})",
                   files),
               TemplateError);
  EXPECT_THROW(TemplateSet::from_manifest(
                   R"({"set_version":"x","templates":[{"kind":"nope","file":"a.txt","version":"1","placeholders":[]}]})",
                   files),
               TemplateError);
  EXPECT_THROW(TemplateSet::from_manifest("not json", files), TemplateError);
}

TEST(Render, GenerateDerivatives) {
  const auto& t = templates().get(TemplateKind::generate_derivatives);
  const auto body = render_body(t, {{"question", "Q"}, {"answer", "A"}});
  EXPECT_TRUE(body.ends_with("question: Q, answer: A"));
  const auto full = render(t, {{"question", "Q"}, {"answer", "A"}});
  EXPECT_EQ(full, body + "\n\n" + t.rider);
}

TEST(Render, Judge) {
  const auto prompt = render(templates().get(TemplateKind::judge),
                             {{"answer", "A"}, {"extractive", "E"}, {"abstractive", "S"},
                              {"pruned", "P"}});
  EXPECT_NE(prompt.find("Original Answer: A"), std::string::npos);
  EXPECT_NE(prompt.find("Extractive Summary: E"), std::string::npos);
  EXPECT_NE(prompt.find("Pruned Text: P"), std::string::npos);
}

TEST(Render, Ranking) {
  const auto prompt = render(templates().get(TemplateKind::gpt_ranking),
                             {{"question", "Q"}, {"answer 1", "X"}, {"answer 2", "Y"}});
  EXPECT_NE(prompt.find("answer 1: X, answer 2: Y"), std::string::npos);
  EXPECT_NE(prompt.find("question: Q"), std::string::npos);
}

TEST(Render, MissingBindingNamesPlaceholder) {
  try {
    render(templates().get(TemplateKind::gpt_ranking), {{"question", "Q"}, {"answer 1", "X"}});
    FAIL() << "expected MissingBinding";
  } catch (const MissingBinding& e) {
    EXPECT_EQ(e.placeholder(), "answer 2");
  }
}

TEST(Render, OnlyPlaceholderSpansChange) {
  // Binding each placeholder to its own token must reproduce the body
  // byte for byte.
  for (auto kind : {TemplateKind::generate_derivatives, TemplateKind::judge,
                    TemplateKind::verbose_rewrite, TemplateKind::gpt_score,
                    TemplateKind::gpt_ranking}) {
    const auto& t = templates().get(kind);
    Bindings identity;
    for (const auto& p : t.placeholders) identity[p] = "[" + p + "]";
    EXPECT_EQ(render_body(t, identity), t.body);
  }
}

TEST(Render, SubstitutedValuesAreNotRescanned) {
  const auto& t = templates().get(TemplateKind::generate_derivatives);
  const auto body = render_body(t, {{"question", "[answer]"}, {"answer", "[question]"}});
  EXPECT_TRUE(body.ends_with("question: [answer], answer: [question]"));
}

TEST(ParseDerivatives, WellFormed) {
  const auto d = parse_derivatives(
      "### Abstractive Summary\nParis hosts it.\n### Extractive Summary\nThe event is in "
      "Paris.\n### Pruned Text\nEvent in Paris.\n");
  ASSERT_TRUE(d.all_parsed());
  EXPECT_EQ(*d.abstractive, "Paris hosts it.");
  EXPECT_EQ(*d.extractive, "The event is in Paris.");
  EXPECT_EQ(*d.pruned, "Event in Paris.");
}

TEST(ParseDerivatives, MissingBlockMarksSlot) {
  const auto d = parse_derivatives("### Abstractive Summary\nA\n### Extractive Summary\nE\n");
  EXPECT_TRUE(d.parse_ok(Technique::abstractive));
  EXPECT_TRUE(d.parse_ok(Technique::extractive));
  EXPECT_FALSE(d.parse_ok(Technique::pruned));
}

TEST(ParseDerivatives, ReverseOrderAssignedByLabel) {
  const auto d = parse_derivatives("### Pruned Text\nP\n### Extractive Summary\nE\n### Abstractive Summary\nA");
  EXPECT_EQ(*d.abstractive, "A");
  EXPECT_EQ(*d.extractive, "E");
  EXPECT_EQ(*d.pruned, "P");
}

TEST(ParseDerivatives, LabelVariants) {
  const auto d = parse_derivatives(
      "Sure, here they are:\n\n1. **Abstractive Summary:** short text\n"
      "2) EXTRACTIVE SUMMARY - first line\nsecond line\n"
      "**Pruned version**:\n  tiny  \n");
  EXPECT_EQ(*d.abstractive, "short text");
  EXPECT_EQ(*d.extractive, "first line\nsecond line");
  EXPECT_EQ(*d.pruned, "tiny");
}

TEST(ParseDerivatives, ProseMentionIsNotAHeader) {
  const auto d = parse_derivatives("Abstractive summaries paraphrase.\nPruned texts are short.");
  EXPECT_FALSE(d.parse_ok(Technique::abstractive));
  EXPECT_FALSE(d.parse_ok(Technique::pruned));
}

TEST(ParseDerivatives, FirstDuplicateWins) {
  const auto d = parse_derivatives("Pruned Text: one\nPruned Text: two\nExtractive: e");
  EXPECT_EQ(*d.pruned, "one");
  EXPECT_EQ(*d.extractive, "e");
}

TEST(ParseDerivatives, EmptyBlockIsParsedEmpty) {
  const auto d = parse_derivatives("### Abstractive Summary\n### Extractive Summary\nE");
  ASSERT_TRUE(d.abstractive.has_value());
  EXPECT_EQ(*d.abstractive, "");
}

TEST(ParseDerivatives, PermutedBlocksMatchReferenceSplitter) {
  std::mt19937_64 rng(11);
  const std::array<std::string, 3> labels = {"### Abstractive Summary\n",
                                             "### Extractive Summary\n", "### Pruned Text\n"};
  const std::vector<std::string> vocab = {"alpha", "Beta", "1999", "in", "Sydney,", "the",
                                          "summary", "text.", "pruned"};
  for (int trial = 0; trial < 300; ++trial) {
    std::array<int, 3> order = {0, 1, 2};
    std::shuffle(order.begin(), order.end(), rng);
    const int present = 1 + static_cast<int>(rng() % 3);
    std::string reply;
    for (int i = 0; i < present; ++i) {
      reply += labels[order[i]];
      const int lines = 1 + static_cast<int>(rng() % 3);
      for (int l = 0; l < lines; ++l) {
        const int nwords = 2 + static_cast<int>(rng() % 5);  // a lone label word is a header
        for (int w = 0; w < nwords; ++w) {
          reply += (w ? " " : "") + vocab[rng() % vocab.size()];
        }
        reply += "\n";
      }
    }
    const auto expected = reference_split(reply);
    const auto got = parse_derivatives(reply);
    for (Technique t : kTechniques) {
      ASSERT_EQ(got.get(t), expected.get(t)) << reply;
    }
  }
}

TEST(ParseJudge, Table) {
  struct Case {
    const char* reply;
    JudgeVerdicts expected;
  };
  const Case cases[] = {
      {"Extractive: Yes, Abstractive: Yes, Pruned: No", {true, true, false}},
      {"", {false, false, false}},
      {"Abstractive \xE2\x80\x94 meaning yes, entities no", {false, false, false}},
      {"Extractive Summary: meaning=Yes; entities=Yes\nAbstractive Summary: meaning=Yes; "
       "entities=Yes\nPruned Text: meaning=Yes; entities=No",
       {true, true, false}},
      {"PRUNED TEXT: YES\nEXTRACTIVE SUMMARY: YES", {false, true, true}},
      {"Abstractive: maybe\nExtractive: unclear\nPruned: yes", {false, false, true}},
      {"All three preserve meaning.", {false, false, false}},
      {"I reviewed the extractive, abstractive and pruned texts.\nExtractive: Yes\n"
       "Abstractive: Yes\nPruned: Yes",
       {true, true, true}},
      {"Extractive: Yes / Yes\nAbstractive: No / Yes\nPruned: Yes / Yes", {false, true, true}},
      {"Extractive: yesno\nAbstractive: Yes", {true, false, false}},
  };
  for (const auto& c : cases) {
    const auto v = parse_judge(c.reply);
    EXPECT_EQ(v.abstractive_ok, c.expected.abstractive_ok) << c.reply;
    EXPECT_EQ(v.extractive_ok, c.expected.extractive_ok) << c.reply;
    EXPECT_EQ(v.pruned_ok, c.expected.pruned_ok) << c.reply;
  }
}

TEST(ParseScore, Table) {
  struct Case {
    const char* reply;
    std::optional<int> expected;
  };
  const Case cases[] = {
      {"I'd rate this 7/10", 7},
      {"11", std::nullopt},
      {"Score: 4", 4},
      {"**Score:** 10", 10},
      {"score = 0", 0},
      {"On a scale of 0-10, I would give it 8.", 8},
      {"Using the 0 to 10 range: 6", 6},
      {"Score: 12", std::nullopt},
      {"Score: 7.5", std::nullopt},
      {"7.5/10", std::nullopt},
      {"The answer is verbose.", std::nullopt},
      {"GPT4 says 3", 3},
      {"-2", std::nullopt},
      {"Conciseness score is 9 out of 10", 9},
      {"", std::nullopt},
  };
  for (const auto& c : cases) {
    const auto r = parse_score(c.reply);
    EXPECT_EQ(r.payload, c.expected) << c.reply;
    EXPECT_EQ(r.ok(), r.failure.empty()) << c.reply;
    EXPECT_EQ(r.raw, c.reply);
  }
}

// Hand-labeled synthetic ranking replies.
TEST(ParseRanking, LabeledReplies) {
  struct Case {
    const char* reply;
    std::optional<Choice> expected;
  };
  const Case cases[] = {
      {"Choice: answer 1", Choice::first},
      {"Choice: answer 2", Choice::second},
      {"choice: 2", Choice::second},
      {"**Choice:** Answer 1", Choice::first},
      {"The second answer is more concise", Choice::second},
      {"The first answer is more concise.", Choice::first},
      {"Answer 2", Choice::second},
      {"answer 1", Choice::first},
      {"2", Choice::second},
      {"1.", Choice::first},
      {"Answer 2 is more concise than Answer 1.", Choice::second},
      {"Answer 1 is more concise than answer 2.", Choice::first},
      {"Answer 1 is more verbose, so answer 2 wins.", Choice::second},
      {"I choose answer 2 because answer 1 repeats itself.", Choice::second},
      {"I would pick Answer 1; answer 2 is longer.", Choice::first},
      {"Between answer 1 and answer 2, I prefer answer 1.", Choice::first},
      {"The latter is more concise.", Choice::second},
      {"The former.", Choice::first},
      {"Response 2 is better.", Choice::second},
      {"Answer #1 is the more concise one.", Choice::first},
      {"Answer one.", Choice::first},
      {"Answer 12 is best", std::nullopt},
      {"Both are equally concise.", std::nullopt},
      {"Answer 1 and answer 2 are similar.", std::nullopt},
      {"", std::nullopt},
      {"Neither.", std::nullopt},
      {"The more concise answer is the second one.", Choice::second},
      {"Option 1", Choice::first},
      {"Answer 2 is less concise; answer 1 is preferred.", Choice::first},
      {"3", std::nullopt},
  };
  for (const auto& c : cases) {
    const auto r = parse_ranking(c.reply);
    EXPECT_EQ(r.payload, c.expected) << c.reply;
    EXPECT_EQ(r.ok(), r.failure.empty()) << c.reply;
  }
}

TEST(Parsers, TotalOnRandomBytes) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3000; ++i) {
    std::string s(rng() % 200, '\0');
    for (char& c : s) c = static_cast<char>(rng() & 0xFF);
    const auto d = parse_derivatives(s);
    (void)d;
    (void)parse_judge(s);
    const auto sc = parse_score(s);
    ASSERT_EQ(sc.ok(), sc.failure.empty());
    const auto rk = parse_ranking(s);
    ASSERT_EQ(rk.ok(), rk.failure.empty());
  }
}
