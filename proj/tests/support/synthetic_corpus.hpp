#pragma once

// Deterministic WikiEval-shaped records for offline pipeline tests. Answers
// hold distinct sentences with capitalized entities and a few filler words
// tagged FILLER so the rule mock has something to prune.

#include "concise/dataset.hpp"

#include <random>
#include <string>
#include <vector>

namespace concise::test_support {

inline std::vector<dataset::CorpusRecord> synthetic_corpus(int n, std::uint64_t seed = 7) {
  static const char* kPlaces[] = {"Lisbon", "Oslo", "Quito", "Hanoi", "Nairobi", "Perth",
                                  "Bergen", "Tartu", "Cusco", "Dakar", "Kyoto", "Turin"};
  static const char* kThings[] = {"bridge", "museum", "library", "harbour", "observatory",
                                  "cathedral", "railway", "stadium", "garden", "archive"};
  static const char* kFillers[] = {"FILLERreally", "FILLERquite", "FILLERbasically",
                                   "FILLERessentially", "FILLERactually"};
  std::mt19937_64 rng(seed);
  auto pick = [&](auto& arr) { return arr[rng() % std::size(arr)]; };

  std::vector<dataset::CorpusRecord> out;
  for (int i = 0; i < n; ++i) {
    const std::string place = pick(kPlaces);
    const std::string thing = pick(kThings);
    const int year = 1700 + static_cast<int>(rng() % 300);
    const int sentences = 2 + static_cast<int>(rng() % 3);
    std::string answer = "The " + thing + " in " + place + " opened in " + std::to_string(year) + ".";
    for (int s = 1; s < sentences; ++s) {
      answer += " It is " + std::string(pick(kFillers)) + " known for event number " +
                std::to_string(i * 10 + s) + ".";
    }
    if (rng() % 2) answer += " Visitors " + std::string(pick(kFillers)) + " arrive every season.";

    dataset::CorpusRecord r;
    r.id = "rec-" + std::to_string(i);
    r.question = "What is notable about the " + thing + " in " + place + "?";
    r.answer = answer;
    r.context = "Synthetic passage about " + place + ".";
    r.source_meta = place + " " + thing;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace concise::test_support
