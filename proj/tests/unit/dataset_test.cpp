#include "concise/dataset.hpp"
#include "concise/mock.hpp"
#include "support/synthetic_corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using namespace concise;
using namespace concise::dataset;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("concise_ds_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string wikieval_line(int i) {
  return json{{"question", "Question " + std::to_string(i) + "?"},
              {"source", "Page " + std::to_string(i)},
              {"grounded_answer", "Grounded answer number " + std::to_string(i) + "."},
              {"ungrounded_answer", "Other."},
              {"poor_answer", "Poor."},
              {"context_v1", {"Passage one.", "Passage two."}},
              {"context_v2", {"Alt."}}}
      .dump();
}

}  // namespace

TEST(LoadCorpus, FiftyRecordWikiEvalExport) {
  std::string text;
  for (int i = 0; i < 50; ++i) text += wikieval_line(i) + "\n";
  const auto path = scratch("wikieval.jsonl");
  write(path, text);
  const auto report = load_corpus(path, FieldMapping::wikieval());
  ASSERT_EQ(report.records.size(), 50u);
  EXPECT_TRUE(report.rejections.empty());
  const auto& r = report.records[3];
  EXPECT_EQ(r.id, "Page 3");
  EXPECT_EQ(r.answer, "Grounded answer number 3.");
  EXPECT_EQ(r.context, "Passage one.\n\nPassage two.");
  EXPECT_EQ(r.source_meta, "Page 3");
  EXPECT_TRUE(r.extra.contains("poor_answer"));
  EXPECT_FALSE(r.extra.contains("grounded_answer"));
}

TEST(LoadCorpus, MalformedLinesAreReportedNotFatal) {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    if (i == 4) {
      text += "{\"id\": \"x4\", \"question\": \"q\", \"answer\": oops}\n";
    } else {
      text += json{{"id", "x" + std::to_string(i)}, {"question", "q?"}, {"answer", "a b"}}.dump() + "\n";
    }
  }
  const auto report = parse_corpus(text);
  EXPECT_EQ(report.records.size(), 9u);
  ASSERT_EQ(report.rejections.size(), 1u);
  EXPECT_EQ(report.rejections[0].line, 5u);
}

TEST(LoadCorpus, ValidationRejections) {
  const std::string text =
      R"({"id":"a","question":"q","answer":"x y"})" "\n"
      R"({"id":"a","question":"q","answer":"dup"})" "\n"
      R"({"id":"b","question":"q","answer":"   "})" "\n"
      R"({"id":"c","question":"","answer":"x"})" "\n"
      R"({"question":"q","answer":"x"})" "\n"
      R"({"id":7,"question":"q","answer":"x"})" "\n"
      R"({"id":[1],"question":"q","answer":"x"})" "\n"
      R"([1,2])" "\n"
      "\n"
      R"({"id":"d","question":"q","answer":5})" "\r\n";
  const auto report = parse_corpus(text);
  ASSERT_EQ(report.records.size(), 2u);
  EXPECT_EQ(report.records[1].id, "7");
  std::vector<std::size_t> lines;
  for (const auto& r : report.rejections) lines.push_back(r.line);
  EXPECT_EQ(lines, (std::vector<std::size_t>{2, 3, 4, 5, 7, 8, 10}));
  EXPECT_NE(report.rejections[0].reason.find("duplicate"), std::string::npos);
}

TEST(LoadCorpus, EmptyAndUnreadable) {
  const auto empty = scratch("empty.jsonl");
  write(empty, "");
  EXPECT_THROW(load_corpus(empty), EmptyCorpus);
  const auto junk = scratch("junk.jsonl");
  write(junk, "not json\n");
  EXPECT_THROW(load_corpus(junk), EmptyCorpus);
  EXPECT_THROW(load_corpus(scratch("does-not-exist.jsonl")), IoError);
}

TEST(LoadCorpus, FieldMappingFile) {
  const auto map = scratch("map.json");
  write(map, R"({"id":"key","answer":"reply"})");
  const auto m = FieldMapping::from_file(map);
  const auto report = parse_corpus(R"({"key":"k","question":"q","reply":"r s"})", m);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0].answer, "r s");
  write(map, R"({"bogus":"x"})");
  EXPECT_THROW(FieldMapping::from_file(map), ConfigError);
}

TEST(LoadCorpus, SaveLoadRoundTrip) {
  std::mt19937 rng(5);
  const std::string text =
      R"({"answer":"A b c.","context":"ctx","extra_num":3,"id":"r1","question":"Q?","source":"T"})" "\n"
      R"({"answer":"Multi\nline é","id":"r2","nested":{"k":[1,2]},"question":"Q2?"})" "\n";
  const auto first = parse_corpus(text);
  ASSERT_EQ(first.records.size(), 2u);
  const std::string saved = serialize_corpus(first.records);
  // Default-schema input comes back line for line, semantically.
  std::istringstream a(text), b(saved);
  std::string la, lb;
  while (std::getline(a, la) && std::getline(b, lb)) EXPECT_EQ(json::parse(la), json::parse(lb));
  EXPECT_EQ(parse_corpus(saved).records, first.records);

  auto synth = test_support::synthetic_corpus(30);
  const auto path = scratch("synth.jsonl");
  save_corpus(path, synth);
  EXPECT_EQ(load_corpus(path).records, synth);
}

TEST(Verbose, RequiredWords) {
  EXPECT_EQ(required_verbose_words(10, 1.3), 13u);
  EXPECT_EQ(required_verbose_words(40, 1.3), 52u);
  EXPECT_EQ(required_verbose_words(1, 1.3), 2u);
  EXPECT_EQ(required_verbose_words(3, 1.0), 4u);  // strictly longer at minimum
  for (std::size_t n = 1; n < 2000; ++n) {
    const auto k = required_verbose_words(n, 1.3);
    EXPECT_GE(k * 10, n * 13);
    EXPECT_TRUE((k - 1) * 10 < n * 13 || k == n + 1) << n;
  }
}

class VerboseGeneration : public ::testing::Test {
 protected:
  gateway::GatewayOptions quiet() {
    gateway::GatewayOptions o;
    o.sleeper = [](std::chrono::nanoseconds) {};
    return o;
  }
};

TEST_F(VerboseGeneration, DuplicatingMockDoublesLength) {
  gateway::Gateway gw(nullptr, quiet());
  auto rules = std::make_shared<mock::RuleBackend>();
  gw.register_provider("mock", rules);
  CorpusRecord r;
  r.id = "r";
  r.question = "Q?";
  // 40 words over four sentences.
  r.answer =
      "The river runs north through the old valley town. Farmers grow wheat and barley on the "
      "wide plain. A stone bridge links both banks near the mill. Tourists come each summer to "
      "walk the long green trail by the lake.";
  ASSERT_EQ(word_count(r.answer), 40u);
  const auto pair = generate_verbose(r, gw, {"mock:rules"});
  EXPECT_FALSE(pair.flagged);
  EXPECT_EQ(pair.attempts, 1);
  EXPECT_GT(word_count(pair.verbose), 40u);
  EXPECT_EQ(word_count(pair.verbose), 2 * word_count(r.answer));
  EXPECT_EQ(pair.cache_keys.size(), 1u);
  EXPECT_EQ(pair.generator_model, "mock:rules");
}

TEST_F(VerboseGeneration, EchoMockIsFlaggedAfterCap) {
  gateway::Gateway gw(nullptr, quiet());
  auto echo = std::make_shared<mock::RuleBackend>(mock::RuleOptions{"FILLER", mock::RewriteMode::echo});
  gw.register_provider("mock", echo);
  CorpusRecord r{"r", "Q?", "One two three. Four five.", "", "", json::object()};
  VerboseOptions o{"mock:rules"};
  o.max_attempts = 4;
  const auto pair = generate_verbose(r, gw, o);
  EXPECT_TRUE(pair.flagged);
  EXPECT_EQ(pair.attempts, 4);
  EXPECT_EQ(echo->calls(), 4u);  // distinct seeds defeat the cache
  std::set<std::string> keys(pair.cache_keys.begin(), pair.cache_keys.end());
  EXPECT_EQ(keys.size(), 4u);
  EXPECT_FALSE(pair.flag_reason.empty());
}

TEST_F(VerboseGeneration, GateIsRatioNotMerelyLonger) {
  gateway::Gateway gw(nullptr, quiet());
  // Ten words in, eleven out: longer but under 1.3x.
  gw.register_provider("fx", std::make_shared<mock::FixtureBackend>(
                                 std::vector<mock::Fixture>{{"a b c", "a b c d e f g h i j k"}}, true));
  CorpusRecord r{"r", "Q?", "a b c d e f g h i j", "", "", json::object()};
  const auto pair = generate_verbose(r, gw, {"fx:m"});
  EXPECT_TRUE(pair.flagged);
  EXPECT_THROW(generate_verbose(r, gw, {""}), ConfigError);
}

TEST_F(VerboseGeneration, GatewayErrorsPropagate) {
  gateway::Gateway gw(nullptr, quiet());
  gw.register_provider("fx", std::make_shared<mock::FixtureBackend>(
                                 std::vector<mock::Fixture>{{"zzz", "x"}}, true));
  CorpusRecord r{"r", "Q?", "a b", "", "", json::object()};
  EXPECT_THROW(generate_verbose(r, gw, {"fx:m"}), gateway::GatewayError);
}

TEST(VerbosePairs, RoundTripAndInvariant) {
  VerbosePair ok{"b1", "Q?", "short one", "short one short one", "mock:rules", 1, false, "", {"k1"}};
  VerbosePair flagged{"b2", "Q?", "a b c", "a b", "mock:rules", 3, true, "too short", {"k", "l", "m"}};
  const auto path = scratch("pairs.jsonl");
  save_verbose_pairs(path, {ok, flagged});
  const auto back = load_verbose_pairs(path);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[0], ok);
  EXPECT_EQ(back.records[1], flagged);

  // An unflagged pair that is not longer never passes silently.
  VerbosePair bad = ok;
  bad.verbose = "short";
  write(path, serialize_verbose_pair(bad) + "\n");
  EXPECT_THROW(load_verbose_pairs(path), EmptyCorpus);
  bad.base_id = "b3";
  write(path, serialize_verbose_pair(ok) + "\n" + serialize_verbose_pair(bad) + "\n");
  const auto mixed = load_verbose_pairs(path);
  EXPECT_EQ(mixed.records.size(), 1u);
  EXPECT_EQ(mixed.rejections.size(), 1u);
}

TEST(VerbosePairs, Expand) {
  VerbosePair ok{"b1", "Q?", "short one", "short one short one", "m", 1, false, "", {}};
  VerbosePair flagged{"b2", "Q?", "a b c", "a b", "m", 3, true, "r", {}};
  const auto recs = expand_pairs({ok, flagged});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "b1");
  EXPECT_EQ(recs[1].id, "b1.verbose");
  EXPECT_EQ(recs[1].answer, ok.verbose);
  EXPECT_EQ(expand_pairs({ok, flagged}, true).size(), 4u);
}

TEST(Likert, ThreeAnnotatorsTimesTenRecords) {
  std::string text;
  std::set<std::string> ids;
  for (int r = 0; r < 10; ++r) {
    ids.insert("r" + std::to_string(r));
    for (int a = 0; a < 3; ++a) {
      text += json{{"record_id", "r" + std::to_string(r)},
                   {"annotator_id", "ann" + std::to_string(a)},
                   {"rating", 1 + (r + a) % 5}}
                  .dump() +
              "\n";
    }
  }
  const auto report = parse_likert(text, &ids);
  EXPECT_EQ(report.records.size(), 30u);
  EXPECT_TRUE(report.rejections.empty());
}

TEST(Likert, Rejections) {
  const std::set<std::string> ids{"r1"};
  const std::string text =
      R"({"record_id":"r1","annotator_id":"a","rating":6})" "\n"
      R"({"record_id":"r1","annotator_id":"b","rating":0})" "\n"
      R"({"record_id":"r1","annotator_id":"c","rating":3.5})" "\n"
      R"({"record_id":"zz","annotator_id":"d","rating":3})" "\n"
      R"({"record_id":"r1","annotator_id":"e","rating":"4"})" "\n"
      R"({"record_id":"r1","annotator_id":"f","rating":4.0})" "\n"
      R"({"record_id":"r1","annotator_id":"f","rating":2})" "\n";
  const auto report = parse_likert(text, &ids);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0].rating, 4);
  ASSERT_EQ(report.rejections.size(), 6u);
  EXPECT_NE(report.rejections[0].reason.find("range"), std::string::npos);
  EXPECT_NE(report.rejections[3].reason.find("unknown record id 'zz'"), std::string::npos);
}

TEST(Likert, AggregationIsOrderIndependent) {
  std::mt19937 rng(3);
  std::vector<LikertAnnotation> anns;
  for (int r = 0; r < 20; ++r) {
    for (int a = 0; a < 1 + r % 4; ++a) {
      anns.push_back({"r" + std::to_string(r), "a" + std::to_string(a),
                      1 + static_cast<int>(rng() % 5)});
    }
  }
  for (auto how : {LikertAggregate::mean, LikertAggregate::median}) {
    const auto base = aggregate_likert(anns, how);
    for (int trial = 0; trial < 50; ++trial) {
      auto shuffled = anns;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      EXPECT_EQ(aggregate_likert(shuffled, how), base);
    }
  }
  const std::vector<LikertAnnotation> three{{"x", "a", 5}, {"x", "b", 4}, {"x", "c", 1}};
  EXPECT_DOUBLE_EQ(aggregate_likert(three).at("x"), 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(aggregate_likert(three, LikertAggregate::median).at("x"), 4.0);
  const std::vector<LikertAnnotation> two{{"y", "a", 2}, {"y", "b", 5}};
  EXPECT_DOUBLE_EQ(aggregate_likert(two, LikertAggregate::median).at("y"), 3.5);
}

TEST(Pairwise, ParsingAndDefaults) {
  const std::string text =
      R"({"pair_id":"p1","annotator_id":"a","preferred":"first"})" "\n"
      R"({"pair_id":"p1","annotator_id":"b","preferred":2})" "\n"
      R"({"pair_id":"p2","annotator_id":"a","preferred":"SECOND","first_id":"x","second_id":"y"})" "\n"
      R"({"pair_id":"p3","annotator_id":"a","preferred":"both"})" "\n"
      R"({"pair_id":"p4","annotator_id":"a","preferred":"first","first_id":"x","second_id":"x"})" "\n";
  const auto report = parse_pairwise(text);
  ASSERT_EQ(report.records.size(), 3u);
  EXPECT_EQ(report.records[0].preferred, PairPreference::first);
  EXPECT_EQ(report.records[0].first_id, "p1");
  EXPECT_EQ(report.records[0].second_id, "p1.verbose");
  EXPECT_EQ(report.records[1].preferred, PairPreference::second);
  EXPECT_EQ(report.records[2].second_id, "y");
  EXPECT_EQ(report.rejections.size(), 2u);

  const std::set<std::string> ids{"p1", "p1.verbose"};
  EXPECT_EQ(parse_pairwise(text, &ids).records.size(), 2u);
}

TEST(Pairwise, MajorityVote) {
  std::vector<PairwiseAnnotation> anns = {
      {"p1", "p1", "p1.verbose", "a", PairPreference::first},
      {"p1", "p1", "p1.verbose", "b", PairPreference::first},
      {"p1", "p1", "p1.verbose", "c", PairPreference::second},
      {"p2", "p2", "p2.verbose", "a", PairPreference::second},
      {"p3", "p3", "p3.verbose", "a", PairPreference::second},
      {"p3", "p3", "p3.verbose", "b", PairPreference::first},
  };
  const auto votes = aggregate_pairwise(anns);
  ASSERT_EQ(votes.size(), 3u);
  EXPECT_EQ(votes[0].majority, Choice::first);
  EXPECT_EQ(votes[0].votes_first, 2);
  EXPECT_EQ(votes[1].majority, Choice::second);
  EXPECT_EQ(votes[2].majority, Choice::tie);
  anns.push_back({"p2", "other", "p2.verbose", "b", PairPreference::first});
  EXPECT_THROW(aggregate_pairwise(anns), InvalidInput);
}
