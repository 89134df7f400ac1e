#pragma once

// Per-record scoring and baseline calls over the gateway, the JSON shape of
// their output records, and an order-preserving parallel batch driver.

#include "concise/dataset.hpp"
#include "concise/gateway.hpp"
#include "concise/metric.hpp"
#include "concise/prompts.hpp"

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace concise::pipeline {

struct PipelineOptions {
  std::string generator_model;
  std::string judge_model;
  bool separate_prompts = false;
  double temperature = 0.0;
  int max_output = 1024;
  const prompts::TemplateSet* templates = nullptr;  // null: embedded set

  const prompts::TemplateSet& template_set() const;
};

/// One gateway call made while producing a record.
struct CallTrace {
  std::string role;  // template kind
  std::string model;
  std::string template_version;
  std::string cache_key;
  bool cached = false;
};

struct RecordError {
  std::string kind;  // gateway error kind, or "invalid_input" / "internal"
  std::string message;
};

struct ScoreRecord {
  std::string id;
  std::size_t answer_words = 0;
  std::optional<ConciseScore> score;  // absent when `error` is set
  DerivativeSet derivatives;
  std::optional<JudgeVerdicts> verdicts;  // absent when the judge was not reached
  std::string generator_model;
  std::string judge_model;
  bool separate_prompts = false;
  std::string template_set_version;
  std::vector<CallTrace> calls;
  std::vector<std::string> warnings;
  std::optional<RecordError> error;

  // GPT Score baseline, when requested alongside.
  std::optional<int> baseline_score;
  std::string baseline_failure;
};

/// Generate derivatives, judge them, score. Gateway failures are captured
/// in `error`; parse failures become neutral terms with a warning.
ScoreRecord score_record(const dataset::CorpusRecord& record, gateway::Gateway& gw,
                         const PipelineOptions& options);

/// Rendered prompts for a record without calling anything. The judge prompt
/// depends on the generator reply, so only generation prompts are listed.
std::vector<std::pair<prompts::TemplateKind, std::string>> generation_prompts(
    const dataset::CorpusRecord& record, const PipelineOptions& options);

struct BaselineRecord {
  std::string kind;  // "gpt_score" or "gpt_ranking"
  std::string id;    // record id, or pair id for rankings
  std::string first_id;
  std::string second_id;
  std::optional<int> score;
  std::optional<Choice> choice;
  std::string parse_failure;
  std::string raw;
  std::string model;
  std::optional<CallTrace> call;
  std::optional<RecordError> error;
};

struct BaselineOptions {
  std::string model;
  double temperature = 0.0;
  int max_output = 256;
  const prompts::TemplateSet* templates = nullptr;
};

BaselineRecord gpt_score(const dataset::CorpusRecord& record, gateway::Gateway& gw,
                         const BaselineOptions& options);
/// Answer 1 is the pair's original, answer 2 its verbose variant.
BaselineRecord gpt_ranking(const dataset::VerbosePair& pair, gateway::Gateway& gw,
                           const BaselineOptions& options);

nlohmann::json to_json(const ScoreRecord& r);
nlohmann::json to_json(const BaselineRecord& r);
nlohmann::json to_json(const CallTrace& c);
/// One compact JSON object with sorted keys and a trailing newline.
std::string to_line(const nlohmann::json& j);

/// Runs work(i) for i in [0, count) on up to `parallel` threads and hands
/// each result to sink(i, result) on the calling thread in index order.
/// `work` must not throw.
template <typename R>
void run_ordered(std::size_t count, std::size_t parallel, const std::function<R(std::size_t)>& work,
                 const std::function<void(std::size_t, R&&)>& sink) {
  if (count == 0) return;
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallel, count));
  std::vector<std::optional<R>> slots(count);
  std::mutex mu;
  std::condition_variable ready;
  std::size_t next = 0;

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= count) return;
          i = next++;
        }
        R result = work(i);
        {
          std::lock_guard lock(mu);
          slots[i].emplace(std::move(result));
        }
        ready.notify_all();
      }
    });
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    R result = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    sink(i, std::move(result));
  }
  for (auto& th : pool) th.join();
}

}  // namespace concise::pipeline
