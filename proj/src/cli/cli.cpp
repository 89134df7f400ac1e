#include "concise/cli.hpp"

#include "concise/cache.hpp"
#include "concise/dataset.hpp"
#include "concise/errors.hpp"
#include "concise/pipeline.hpp"
#include "concise/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <optional>

namespace concise::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Output file written through a temporary sibling and renamed on commit.
class OutputFile {
 public:
  explicit OutputFile(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".partial") {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw IoError("cannot write " + tmp_.string());
  }
  ~OutputFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  void write(const std::string& s) { stream_ << s; }

  void commit() {
    stream_.close();
    if (!stream_) throw IoError("write to " + tmp_.string() + " failed");
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

void write_file(const fs::path& path, const std::string& content) {
  OutputFile f(path);
  f.write(content);
  f.commit();
}

fs::path sidecar_path(const fs::path& out) { return fs::path(out.string() + ".meta.json"); }

json stats_json(const gateway::GatewayStats& s) {
  return {{"requests", s.requests},
          {"cache_hits", s.cache_hits},
          {"provider_calls", s.provider_calls},
          {"retries", s.retries},
          {"failures", s.failures}};
}

json rejections_json(const std::vector<dataset::Rejection>& rs) {
  json out = json::array();
  for (const auto& r : rs) out.push_back({{"line", r.line}, {"reason", r.reason}});
  return out;
}

// Flags shared by every command that may call a provider.
struct ProviderFlags {
  std::string config_file;
  std::string cache_dir;
  std::string model_generator, model_judge, model_rewriter, model_baseline;
  int parallel = 0;
  bool separate_prompts = false;
  bool strict_mock = false;
  std::string mock_fixtures;
  std::string template_dir;
  bool dry_run = false;
  bool quiet = false;

  void add_to(CLI::App* app, bool with_separate) {
    app->add_option("--config", config_file, "JSON config file");
    app->add_option("--cache-dir", cache_dir, "Response cache directory");
    app->add_option("--model-generator", model_generator, "Model for derivative generation");
    app->add_option("--model-judge", model_judge, "Model for judging (default: generator)");
    app->add_option("--model-rewriter", model_rewriter, "Model for verbose rewrites (default: generator)");
    app->add_option("--model-baseline", model_baseline, "Model for GPT Score/Ranking (default: judge)");
    app->add_option("--parallel", parallel, "Concurrent record pipelines");
    if (with_separate) {
      app->add_flag("--separate-prompts", separate_prompts,
                    "One generation prompt per technique instead of the unified prompt");
    }
    app->add_flag("--strict-mock", strict_mock, "Fail mock:fixtures prompts without a fixture");
    app->add_option("--mock-fixtures", mock_fixtures, "Fixture file for mock:fixtures");
    app->add_option("--template-dir", template_dir, "Prompt template directory override");
    app->add_flag("--dry-run", dry_run, "Render and count prompts without calling any model");
    app->add_flag("-q,--quiet", quiet, "Do not print the resolved configuration");
  }

  RunConfig resolve(const Environment& env) const {
    RunConfig c;
    c.apply_environment(env);
    if (!config_file.empty()) c.load_file(config_file);
    constexpr auto F = Source::flag;
    if (!cache_dir.empty()) c.cache_dir.set(cache_dir, F);
    if (!model_generator.empty()) c.generator_model.set(model_generator, F);
    if (!model_judge.empty()) c.judge_model.set(model_judge, F);
    if (!model_rewriter.empty()) c.rewriter_model.set(model_rewriter, F);
    if (!model_baseline.empty()) c.baseline_model.set(model_baseline, F);
    if (parallel != 0) c.parallel.set(parallel, F);
    if (separate_prompts) c.separate_prompts.set(true, F);
    if (strict_mock) c.strict_mock.set(true, F);
    if (!mock_fixtures.empty()) c.mock_fixtures.set(mock_fixtures, F);
    if (!template_dir.empty()) c.template_dir.set(template_dir, F);
    return c;
  }
};

struct CorpusFlags {
  std::string corpus;
  std::string field_map;
  bool wikieval = false;

  void add_to(CLI::App* app, bool required) {
    auto* o = app->add_option("--corpus", corpus, "Corpus JSONL file");
    if (required) o->required();
    app->add_option("--field-map", field_map, "JSON field mapping for the corpus");
    app->add_flag("--wikieval", wikieval, "Read the WikiEval export layout");
  }

  dataset::FieldMapping mapping() const {
    if (wikieval && !field_map.empty()) throw ConfigError("--wikieval and --field-map conflict");
    if (wikieval) return dataset::FieldMapping::wikieval();
    if (!field_map.empty()) return dataset::FieldMapping::from_file(field_map);
    return {};
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Environment& env;
};

void print_config(const Context& ctx, const RunConfig& config, const ProviderFlags& flags) {
  if (flags.quiet) return;
  ctx.err << "config: " << config.redacted(ctx.env).dump() << "\n";
}

void report_rejections(const Context& ctx, const std::string& what,
                       const std::vector<dataset::Rejection>& rs) {
  for (const auto& r : rs) ctx.err << what << ":" << r.line << ": skipped: " << r.reason << "\n";
}

json base_sidecar(const std::string& command, const RunConfig& config, const Environment& env,
                  const std::string& started) {
  return {{"command", command},
          {"started_at", started},
          {"config", config.redacted(env)}};
}

void finish_sidecar(json& meta, const fs::path& out, const gateway::Gateway* gw,
                    std::chrono::steady_clock::time_point t0) {
  meta["finished_at"] = gateway::utc_timestamp();
  meta["elapsed_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  if (gw) meta["gateway"] = stats_json(gw->stats());
  write_file(sidecar_path(out), meta.dump(2) + "\n");
}

std::string cache_summary(const gateway::Gateway& gw) {
  const auto s = gw.stats();
  return "cache hits " + std::to_string(s.cache_hits) + "/" + std::to_string(s.requests) +
         ", provider calls " + std::to_string(s.provider_calls) + ", retries " +
         std::to_string(s.retries);
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  ProviderFlags provider;
  CorpusFlags corpus;
  std::string verbose_pairs;
  bool include_flagged = false;
  bool with_baseline = false;
  std::string out;
};

std::vector<dataset::CorpusRecord> load_inputs(const Context& ctx, const CorpusFlags& cf,
                                               const std::string& pairs_path, bool include_flagged,
                                               json& rejected) {
  std::vector<dataset::CorpusRecord> records;
  rejected = json::object();
  if (!cf.corpus.empty()) {
    auto rep = dataset::load_corpus(cf.corpus, cf.mapping());
    report_rejections(ctx, cf.corpus, rep.rejections);
    rejected["corpus"] = rejections_json(rep.rejections);
    records = std::move(rep.records);
  }
  if (!pairs_path.empty()) {
    auto rep = dataset::load_verbose_pairs(pairs_path);
    report_rejections(ctx, pairs_path, rep.rejections);
    rejected["verbose_pairs"] = rejections_json(rep.rejections);
    auto expanded = dataset::expand_pairs(rep.records, include_flagged);
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.id);
    for (auto& r : expanded) {
      if (!seen.insert(r.id).second) throw InvalidInput("record id '" + r.id + "' appears twice");
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) throw dataset::EmptyCorpus("no records to process");
  return records;
}

int cmd_score(const Context& ctx, const ScoreArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = gateway::utc_timestamp();
  if (a.corpus.corpus.empty() && a.verbose_pairs.empty()) {
    throw ConfigError("score needs --corpus and/or --verbose-pairs");
  }
  const RunConfig config = a.provider.resolve(ctx.env);
  print_config(ctx, config, a.provider);
  std::vector<Role> roles{Role::generator, Role::judge};
  if (a.with_baseline) roles.push_back(Role::baseline);
  json rejected;
  const auto records = load_inputs(ctx, a.corpus, a.verbose_pairs, a.include_flagged, rejected);
  const auto templates = load_templates(config);

  pipeline::PipelineOptions opts;
  opts.generator_model = config.generator_model.value;
  opts.judge_model = config.judge();
  opts.separate_prompts = config.separate_prompts.value;
  opts.temperature = config.temperature.value;
  opts.max_output = config.max_output.value;
  opts.templates = templates.get();

  if (a.provider.dry_run) {
    if (a.with_baseline) validate(config, {Role::generator, Role::judge, Role::baseline});
    else validate(config, {Role::generator, Role::judge});
    std::size_t prompts = 0;
    std::string dump;
    for (const auto& r : records) {
      for (const auto& [kind, text] : pipeline::generation_prompts(r, opts)) {
        ++prompts;
        dump += pipeline::to_line({{"id", r.id}, {"kind", std::string(prompts::kind_name(kind))},
                                   {"prompt", text}});
      }
      if (a.with_baseline) {
        ++prompts;
        dump += pipeline::to_line(
            {{"id", r.id}, {"kind", "gpt_score"},
             {"prompt", prompts::render(templates->get(prompts::TemplateKind::gpt_score),
                                        {{"answer", r.answer}})}});
      }
    }
    if (!a.out.empty()) write_file(a.out, dump);
    ctx.out << "dry-run: " << prompts << " generation prompt(s) for " << records.size()
            << " record(s), plus up to " << records.size()
            << " judge prompt(s) that depend on generator replies; no model was called\n";
    return kExitOk;
  }
  if (a.out.empty()) throw ConfigError("score needs --out");

  std::unique_ptr<gateway::Gateway> gw;
  if (a.with_baseline) {
    gw = build_gateway(config, {Role::generator, Role::judge, Role::baseline}, *templates, ctx.env);
  } else {
    gw = build_gateway(config, {Role::generator, Role::judge}, *templates, ctx.env);
  }
  pipeline::BaselineOptions bopts;
  bopts.model = config.baseline();
  bopts.temperature = config.temperature.value;
  bopts.templates = templates.get();

  OutputFile file(a.out);
  std::size_t ok = 0, failed = 0, warned = 0;
  json errors = json::array();
  pipeline::run_ordered<pipeline::ScoreRecord>(
      records.size(), static_cast<std::size_t>(config.parallel.value),
      [&](std::size_t i) {
        auto rec = pipeline::score_record(records[i], *gw, opts);
        if (a.with_baseline && !rec.error) {
          auto b = pipeline::gpt_score(records[i], *gw, bopts);
          if (b.call) rec.calls.push_back(*b.call);
          if (b.error) rec.error = b.error;
          rec.baseline_score = b.score;
          rec.baseline_failure = b.parse_failure;
        }
        return rec;
      },
      [&](std::size_t, pipeline::ScoreRecord&& rec) {
        if (rec.error) {
          ++failed;
          errors.push_back({{"id", rec.id}, {"kind", rec.error->kind}, {"message", rec.error->message}});
          ctx.err << rec.id << ": " << rec.error->message << "\n";
        } else {
          ++ok;
        }
        if (!rec.warnings.empty()) ++warned;
        file.write(pipeline::to_line(pipeline::to_json(rec)));
      });
  file.commit();

  json meta = base_sidecar("score", config, ctx.env, started);
  meta["output"] = a.out;
  meta["counts"] = {{"records", records.size()}, {"scored", ok}, {"failed", failed},
                    {"with_warnings", warned}};
  meta["errors"] = errors;
  meta["rejected_input"] = rejected;
  finish_sidecar(meta, a.out, gw.get(), t0);

  ctx.out << "score: " << records.size() << " record(s), " << ok << " scored, " << failed
          << " failed, " << warned << " with warnings; " << cache_summary(*gw) << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
  ProviderFlags provider;
  CorpusFlags corpus;
  std::string out;
};

int cmd_augment(const Context& ctx, const AugmentArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = gateway::utc_timestamp();
  const RunConfig config = a.provider.resolve(ctx.env);
  print_config(ctx, config, a.provider);
  auto rep = dataset::load_corpus(a.corpus.corpus, a.corpus.mapping());
  report_rejections(ctx, a.corpus.corpus, rep.rejections);
  const auto& records = rep.records;
  const auto templates = load_templates(config);

  if (a.provider.dry_run) {
    validate(config, {Role::rewriter});
    std::string dump;
    const auto& tmpl = templates->get(prompts::TemplateKind::verbose_rewrite);
    for (const auto& r : records) {
      dump += pipeline::to_line({{"id", r.id}, {"kind", "verbose_rewrite"},
                                 {"prompt", prompts::render(tmpl, {{"answer", r.answer}})}});
    }
    if (!a.out.empty()) write_file(a.out, dump);
    ctx.out << "dry-run: " << records.size() << " verbose_rewrite prompt(s) for "
            << records.size() << " record(s), up to " << config.verbose_max_attempts.value
            << " attempt(s) each; no model was called\n";
    return kExitOk;
  }
  if (a.out.empty()) throw ConfigError("augment needs --out");
  auto gw = build_gateway(config, {Role::rewriter}, *templates, ctx.env);

  dataset::VerboseOptions vopts;
  vopts.model = config.rewriter();
  vopts.max_attempts = config.verbose_max_attempts.value;
  vopts.min_ratio = config.verbose_min_ratio.value;
  vopts.temperature = config.temperature.value;
  vopts.templates = templates.get();

  struct Outcome {
    std::optional<dataset::VerbosePair> pair;
    std::string id;
    std::string error;
  };
  OutputFile file(a.out);
  std::size_t ok = 0, flagged = 0, failed = 0;
  json errors = json::array();
  pipeline::run_ordered<Outcome>(
      records.size(), static_cast<std::size_t>(config.parallel.value),
      [&](std::size_t i) {
        Outcome o;
        o.id = records[i].id;
        try {
          o.pair = dataset::generate_verbose(records[i], *gw, vopts);
        } catch (const std::exception& e) {
          o.error = e.what();
        }
        return o;
      },
      [&](std::size_t, Outcome&& o) {
        if (!o.pair) {
          ++failed;
          errors.push_back({{"id", o.id}, {"message", o.error}});
          ctx.err << o.id << ": " << o.error << "\n";
          return;
        }
        if (o.pair->flagged) {
          ++flagged;
          ctx.err << o.id << ": flagged: " << o.pair->flag_reason << "\n";
        } else {
          ++ok;
        }
        file.write(dataset::serialize_verbose_pair(*o.pair) + "\n");
      });
  file.commit();

  json meta = base_sidecar("augment", config, ctx.env, started);
  meta["output"] = a.out;
  meta["counts"] = {{"records", records.size()}, {"pairs", ok}, {"flagged", flagged},
                    {"failed", failed}};
  meta["errors"] = errors;
  meta["rejected_input"] = rejections_json(rep.rejections);
  finish_sidecar(meta, a.out, gw.get(), t0);

  ctx.out << "augment: " << records.size() << " record(s), " << ok << " pair(s), " << flagged
          << " flagged, " << failed << " failed; " << cache_summary(*gw) << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
  ProviderFlags provider;
  CorpusFlags corpus;
  std::string verbose_pairs;
  bool include_flagged = false;
  bool pointwise_pairs = false;
  std::string out;
};

int cmd_baseline(const Context& ctx, const BaselineArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = gateway::utc_timestamp();
  if (a.corpus.corpus.empty() && a.verbose_pairs.empty()) {
    throw ConfigError("baseline needs --corpus and/or --verbose-pairs");
  }
  const RunConfig config = a.provider.resolve(ctx.env);
  print_config(ctx, config, a.provider);

  // Jobs: pointwise records first, then pairs.
  std::vector<dataset::CorpusRecord> points;
  std::vector<dataset::VerbosePair> pairs;
  json rejected = json::object();
  if (!a.corpus.corpus.empty()) {
    auto rep = dataset::load_corpus(a.corpus.corpus, a.corpus.mapping());
    report_rejections(ctx, a.corpus.corpus, rep.rejections);
    rejected["corpus"] = rejections_json(rep.rejections);
    points = std::move(rep.records);
  }
  if (!a.verbose_pairs.empty()) {
    auto rep = dataset::load_verbose_pairs(a.verbose_pairs);
    report_rejections(ctx, a.verbose_pairs, rep.rejections);
    rejected["verbose_pairs"] = rejections_json(rep.rejections);
    for (auto& p : rep.records) {
      if (!p.flagged || a.include_flagged) pairs.push_back(std::move(p));
    }
    if (a.pointwise_pairs) {
      for (auto& r : dataset::expand_pairs(pairs, true)) points.push_back(std::move(r));
    }
  }
  if (points.empty() && pairs.empty()) throw dataset::EmptyCorpus("no records to process");
  const auto templates = load_templates(config);

  if (a.provider.dry_run) {
    validate(config, {Role::baseline});
    std::string dump;
    for (const auto& r : points) {
      dump += pipeline::to_line(
          {{"id", r.id}, {"kind", "gpt_score"},
           {"prompt", prompts::render(templates->get(prompts::TemplateKind::gpt_score),
                                      {{"answer", r.answer}})}});
    }
    for (const auto& p : pairs) {
      dump += pipeline::to_line(
          {{"id", p.base_id}, {"kind", "gpt_ranking"},
           {"prompt", prompts::render(templates->get(prompts::TemplateKind::gpt_ranking),
                                      {{"question", p.question},
                                       {"answer 1", p.original},
                                       {"answer 2", p.verbose}})}});
    }
    if (!a.out.empty()) write_file(a.out, dump);
    ctx.out << "dry-run: " << points.size() << " gpt_score and " << pairs.size()
            << " gpt_ranking prompt(s); no model was called\n";
    return kExitOk;
  }
  if (a.out.empty()) throw ConfigError("baseline needs --out");
  auto gw = build_gateway(config, {Role::baseline}, *templates, ctx.env);
  pipeline::BaselineOptions bopts;
  bopts.model = config.baseline();
  bopts.temperature = config.temperature.value;
  bopts.templates = templates.get();

  OutputFile file(a.out);
  std::size_t ok = 0, unparsed = 0, failed = 0;
  json errors = json::array();
  const std::size_t total = points.size() + pairs.size();
  pipeline::run_ordered<pipeline::BaselineRecord>(
      total, static_cast<std::size_t>(config.parallel.value),
      [&](std::size_t i) {
        return i < points.size() ? pipeline::gpt_score(points[i], *gw, bopts)
                                 : pipeline::gpt_ranking(pairs[i - points.size()], *gw, bopts);
      },
      [&](std::size_t, pipeline::BaselineRecord&& rec) {
        if (rec.error) {
          ++failed;
          errors.push_back({{"id", rec.id}, {"kind", rec.error->kind}, {"message", rec.error->message}});
          ctx.err << rec.id << ": " << rec.error->message << "\n";
        } else if (!rec.parse_failure.empty()) {
          ++unparsed;
          ctx.err << rec.id << ": unparseable " << rec.kind << " reply: " << rec.parse_failure << "\n";
        } else {
          ++ok;
        }
        file.write(pipeline::to_line(pipeline::to_json(rec)));
      });
  file.commit();

  json meta = base_sidecar("baseline", config, ctx.env, started);
  meta["output"] = a.out;
  meta["counts"] = {{"records", total}, {"parsed", ok}, {"parse_failures", unparsed},
                    {"failed", failed}};
  meta["errors"] = errors;
  meta["rejected_input"] = rejected;
  finish_sidecar(meta, a.out, gw.get(), t0);

  ctx.out << "baseline: " << total << " item(s), " << ok << " parsed, " << unparsed
          << " unparseable, " << failed << " failed; " << cache_summary(*gw) << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

// ---------------------------------------------------------------- analyze / report

struct AnalyzeArgs {
  std::vector<std::string> scores;
  std::vector<std::string> baselines;
  std::string likert;
  std::string pairwise;
  bool median = false;
  std::string p_method = "auto";
  std::string out;
  std::string text;
};

fs::path text_path_for(const fs::path& json_path) {
  fs::path p = json_path;
  return p.replace_extension(".txt");
}

int cmd_analyze(const Context& ctx, const AnalyzeArgs& a) {
  report::ReportInputs in;
  for (const auto& s : a.scores) in.score_files.emplace_back(s);
  for (const auto& b : a.baselines) in.baseline_files.emplace_back(b);
  if (!a.likert.empty()) in.likert = a.likert;
  if (!a.pairwise.empty()) in.pairwise = a.pairwise;
  in.aggregate = a.median ? dataset::LikertAggregate::median : dataset::LikertAggregate::mean;
  if (a.p_method == "auto") in.p_method = analysis::PValueMethod::automatic;
  else if (a.p_method == "exact") in.p_method = analysis::PValueMethod::exact;
  else if (a.p_method == "approx") in.p_method = analysis::PValueMethod::approximate;
  else throw ConfigError("--p-method must be auto, exact or approx");

  const json rep = report::build_report(in);
  const std::string text = report::render_text(rep);
  write_file(a.out, rep.dump(2) + "\n");
  write_file(a.text.empty() ? text_path_for(a.out) : fs::path(a.text), text);
  ctx.out << text;
  return kExitOk;
}

int cmd_report(const Context& ctx, const std::string& in, const std::string& out) {
  std::ifstream f(in);
  if (!f) throw IoError("cannot read " + in);
  json rep;
  try {
    f >> rep;
  } catch (const json::exception& e) {
    throw InvalidInput(in + " is not a report: " + e.what());
  }
  const std::string text = report::render_text(rep);
  if (!out.empty()) write_file(out, text);
  ctx.out << text;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env) {
  CLI::App app{"Reference-free conciseness scoring for LLM answers"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score answers");
  score.provider.add_to(s, true);
  score.corpus.add_to(s, false);
  s->add_option("--verbose-pairs", score.verbose_pairs, "Verbose pair file; scores both members");
  s->add_flag("--include-flagged", score.include_flagged, "Also score flagged pairs");
  s->add_flag("--with-baseline", score.with_baseline, "Also run GPT Score per record");
  s->add_option("--out", score.out, "Score file (JSONL)");

  AugmentArgs augment;
  auto* g = app.add_subcommand("augment", "Create verbose variants of corpus answers");
  augment.provider.add_to(g, false);
  augment.corpus.add_to(g, true);
  g->add_option("--out", augment.out, "Verbose pair file (JSONL)");

  BaselineArgs baseline;
  auto* b = app.add_subcommand("baseline", "Run GPT Score (corpus) and GPT Ranking (pairs)");
  baseline.provider.add_to(b, false);
  baseline.corpus.add_to(b, false);
  b->add_option("--verbose-pairs", baseline.verbose_pairs, "Verbose pair file for GPT Ranking");
  b->add_flag("--include-flagged", baseline.include_flagged, "Also rank flagged pairs");
  b->add_flag("--pointwise-pairs", baseline.pointwise_pairs,
              "Also run GPT Score on both members of every pair");
  b->add_option("--out", baseline.out, "Baseline file (JSONL)");

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Correlate metrics with human annotations");
  an->add_option("--scores", analyze.scores, "Score file (repeatable)");
  an->add_option("--baseline", analyze.baselines, "Baseline file (repeatable)");
  an->add_option("--likert", analyze.likert, "Likert annotation file");
  an->add_option("--pairwise", analyze.pairwise, "Pairwise annotation file");
  an->add_flag("--median", analyze.median, "Median instead of mean over annotators");
  an->add_option("--p-method", analyze.p_method, "auto, exact or approx");
  an->add_option("--out", analyze.out, "Report JSON")->required();
  an->add_option("--text", analyze.text, "Text table (default: report path with .txt)");

  std::string report_in, report_out;
  auto* rp = app.add_subcommand("report", "Render a report JSON as text tables");
  rp->add_option("--in", report_in, "Report JSON")->required();
  rp->add_option("--out", report_out, "Text output file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const Context ctx{out, err, env};
  try {
    if (s->parsed()) return cmd_score(ctx, score);
    if (g->parsed()) return cmd_augment(ctx, augment);
    if (b->parsed()) return cmd_baseline(ctx, baseline);
    if (an->parsed()) return cmd_analyze(ctx, analyze);
    if (rp->parsed()) return cmd_report(ctx, report_in, report_out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRecordFailures;
  }
  return kExitUsage;
}

}  // namespace concise::cli
