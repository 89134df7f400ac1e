#include "concise/pipeline.hpp"

namespace concise::pipeline {

using gateway::CompletionRequest;
using gateway::GatewayError;
using nlohmann::json;
using prompts::TemplateKind;

namespace {

const prompts::TemplateSet& set_or_embedded(const prompts::TemplateSet* set) {
  return set ? *set : prompts::TemplateSet::embedded();
}

struct CallResult {
  std::string text;
  CallTrace trace;
};

CallResult call(gateway::Gateway& gw, const prompts::PromptTemplate& tmpl,
                const prompts::Bindings& bindings, const std::string& model, double temperature,
                int max_output) {
  CompletionRequest req;
  req.model = model;
  req.prompt = prompts::render(tmpl, bindings);
  req.temperature = temperature;
  req.max_output = max_output;
  req.template_version = tmpl.full_version();
  auto res = gw.complete(req);
  CallResult out;
  out.text = std::move(res.text);
  out.trace = {std::string(prompts::kind_name(tmpl.kind)), model, req.template_version,
               res.cache_key, res.cached};
  return out;
}

template <typename Fn>
std::optional<RecordError> capture(Fn&& fn) {
  try {
    fn();
    return std::nullopt;
  } catch (const GatewayError& e) {
    return RecordError{std::string(gateway::error_kind_name(e.kind())), e.what()};
  } catch (const InvalidInput& e) {
    return RecordError{"invalid_input", e.what()};
  } catch (const std::exception& e) {
    return RecordError{"internal", e.what()};
  }
}

json optional_text(const std::optional<std::string>& s) { return s ? json(*s) : json(); }

json error_json(const std::optional<RecordError>& e) {
  return e ? json{{"kind", e->kind}, {"message", e->message}} : json();
}

}  // namespace

const prompts::TemplateSet& PipelineOptions::template_set() const {
  return set_or_embedded(templates);
}

std::vector<std::pair<TemplateKind, std::string>> generation_prompts(
    const dataset::CorpusRecord& record, const PipelineOptions& options) {
  const auto& set = options.template_set();
  const prompts::Bindings b{{"question", record.question}, {"answer", record.answer}};
  std::vector<std::pair<TemplateKind, std::string>> out;
  if (options.separate_prompts) {
    for (Technique t : kTechniques) {
      const auto kind = prompts::separate_kind(t);
      out.emplace_back(kind, prompts::render(set.get(kind), b));
    }
  } else {
    out.emplace_back(TemplateKind::generate_derivatives,
                     prompts::render(set.get(TemplateKind::generate_derivatives), b));
  }
  return out;
}

ScoreRecord score_record(const dataset::CorpusRecord& record, gateway::Gateway& gw,
                         const PipelineOptions& options) {
  ScoreRecord out;
  out.id = record.id;
  out.answer_words = word_count(record.answer);
  out.generator_model = options.generator_model;
  out.judge_model = options.judge_model;
  out.separate_prompts = options.separate_prompts;
  const auto& set = options.template_set();
  out.template_set_version = set.set_version();

  out.error = capture([&] {
    const prompts::Bindings gen{{"question", record.question}, {"answer", record.answer}};
    if (options.separate_prompts) {
      for (Technique t : kTechniques) {
        auto r = call(gw, set.get(prompts::separate_kind(t)), gen, options.generator_model,
                      options.temperature, options.max_output);
        out.calls.push_back(r.trace);
        out.derivatives.get(t) = prompts::parse_single_derivative(r.text, t);
      }
    } else {
      auto r = call(gw, set.get(TemplateKind::generate_derivatives), gen, options.generator_model,
                    options.temperature, options.max_output);
      out.calls.push_back(r.trace);
      out.derivatives = prompts::parse_derivatives(r.text);
    }

    bool any = false;
    for (Technique t : kTechniques) {
      if (out.derivatives.parse_ok(t)) {
        any = true;
      } else {
        out.warnings.push_back(std::string(technique_name(t)) +
                               ": no labeled block in the generator reply");
      }
    }

    JudgeVerdicts verdicts;
    if (any) {
      const prompts::Bindings jb{
          {"answer", record.answer},
          {"extractive", out.derivatives.extractive.value_or("")},
          {"abstractive", out.derivatives.abstractive.value_or("")},
          {"pruned", out.derivatives.pruned.value_or("")},
      };
      auto r = call(gw, set.get(TemplateKind::judge), jb, options.judge_model, options.temperature,
                    options.max_output);
      out.calls.push_back(r.trace);
      verdicts = prompts::parse_judge(r.text);
      out.verdicts = verdicts;
    } else {
      out.warnings.push_back("judge skipped: no derivative parsed");
    }

    auto score = score_answer({record.id, record.question, record.answer}, out.derivatives, verdicts);
    out.warnings.insert(out.warnings.end(), score.warnings.begin(), score.warnings.end());
    score.warnings.clear();
    out.score = std::move(score);
  });
  return out;
}

BaselineRecord gpt_score(const dataset::CorpusRecord& record, gateway::Gateway& gw,
                         const BaselineOptions& options) {
  BaselineRecord out;
  out.kind = "gpt_score";
  out.id = record.id;
  out.model = options.model;
  out.error = capture([&] {
    const auto& set = set_or_embedded(options.templates);
    auto r = call(gw, set.get(TemplateKind::gpt_score), {{"answer", record.answer}}, options.model,
                  options.temperature, options.max_output);
    out.call = r.trace;
    out.raw = r.text;
    auto parsed = prompts::parse_score(r.text);
    out.score = parsed.payload;
    out.parse_failure = parsed.failure;
  });
  return out;
}

BaselineRecord gpt_ranking(const dataset::VerbosePair& pair, gateway::Gateway& gw,
                           const BaselineOptions& options) {
  BaselineRecord out;
  out.kind = "gpt_ranking";
  out.id = pair.base_id;
  out.first_id = pair.base_id;
  out.second_id = dataset::verbose_id(pair.base_id);
  out.model = options.model;
  out.error = capture([&] {
    const auto& set = set_or_embedded(options.templates);
    auto r = call(gw, set.get(TemplateKind::gpt_ranking),
                  {{"question", pair.question}, {"answer 1", pair.original}, {"answer 2", pair.verbose}},
                  options.model, options.temperature, options.max_output);
    out.call = r.trace;
    out.raw = r.text;
    auto parsed = prompts::parse_ranking(r.text);
    out.choice = parsed.payload;
    out.parse_failure = parsed.failure;
  });
  return out;
}

json to_json(const CallTrace& c) {
  return {{"role", c.role},
          {"model", c.model},
          {"template_version", c.template_version},
          {"cache_key", c.cache_key},
          {"cached", c.cached}};
}

json to_json(const ScoreRecord& r) {
  json j;
  j["id"] = r.id;
  j["answer_words"] = r.answer_words;
  j["models"] = {{"generator", r.generator_model}, {"judge", r.judge_model}};
  j["mode"] = r.separate_prompts ? "separate" : "unified";
  j["template_set_version"] = r.template_set_version;
  j["derivatives"] = json::object();
  for (Technique t : kTechniques) {
    j["derivatives"][std::string(technique_name(t))] = optional_text(r.derivatives.get(t));
  }
  if (r.verdicts) {
    j["verdicts"] = json::object();
    for (Technique t : kTechniques) j["verdicts"][std::string(technique_name(t))] = r.verdicts->get(t);
  } else {
    j["verdicts"] = nullptr;
  }
  if (r.score) {
    const auto& s = *r.score;
    j["score"] = s.score;
    j["verbosity"] = s.verbosity();
    j["terms"] = json::object();
    j["derivative_words"] = json::object();
    j["status"] = json::object();
    for (Technique t : kTechniques) {
      const std::string name(technique_name(t));
      const auto idx = static_cast<std::size_t>(t);
      j["terms"][name] = s.terms.term(t);
      j["derivative_words"][name] = s.terms.derivative_lens[idx];
      j["status"][name] = std::string(term_status_name(s.terms.status[idx]));
    }
  } else {
    j["score"] = nullptr;
    j["verbosity"] = nullptr;
    j["terms"] = nullptr;
    j["derivative_words"] = nullptr;
    j["status"] = nullptr;
  }
  j["calls"] = json::array();
  for (const auto& c : r.calls) j["calls"].push_back(to_json(c));
  j["warnings"] = r.warnings;
  j["error"] = error_json(r.error);
  if (r.baseline_score || !r.baseline_failure.empty()) {
    j["baseline"] = {{"gpt_score", r.baseline_score ? json(*r.baseline_score) : json()},
                     {"parse_failure", r.baseline_failure}};
  }
  return j;
}

json to_json(const BaselineRecord& r) {
  json j;
  j["kind"] = r.kind;
  j["id"] = r.id;
  j["model"] = r.model;
  if (r.kind == "gpt_ranking") {
    j["first_id"] = r.first_id;
    j["second_id"] = r.second_id;
    j["choice"] = r.choice ? json(std::string(choice_name(*r.choice))) : json();
  } else {
    j["score"] = r.score ? json(*r.score) : json();
  }
  j["parse_failure"] = r.parse_failure;
  j["raw"] = r.raw;
  j["call"] = r.call ? to_json(*r.call) : json();
  j["error"] = error_json(r.error);
  return j;
}

std::string to_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace concise::pipeline
