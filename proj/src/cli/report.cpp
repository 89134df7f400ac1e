#include "concise/report.hpp"

#include "concise/errors.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace concise::report {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kOrientation = "higher = more concise";

std::vector<json> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw InvalidInput(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string str_field(const json& j, const char* key) {
  const auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

// A metric column read from one file: id -> value, plus what was left out.
struct MetricColumn {
  std::string name;
  std::string source;
  std::map<std::string, double> values;
  std::size_t errors = 0;
  std::size_t parse_failures = 0;
};

// A pairwise metric: (first, second) -> choice relative to that order.
struct RankingColumn {
  std::string name;
  std::string source;
  std::map<std::pair<std::string, std::string>, Choice> choices;
  std::size_t errors = 0;
  std::size_t parse_failures = 0;
};

struct LoadedScores {
  MetricColumn column;
  std::string judge_model;
};

LoadedScores load_scores(const fs::path& path) {
  LoadedScores out;
  out.column.source = path.filename().string();
  for (const auto& j : read_lines(path)) {
    const std::string id = str_field(j, "id");
    if (id.empty()) throw InvalidInput(path.string() + ": score record without id");
    if (out.judge_model.empty() && j.contains("models") && j["models"].is_object()) {
      out.judge_model = str_field(j["models"], "judge");
    }
    const auto score = j.find("score");
    if (score == j.end() || !score->is_number()) {
      ++out.column.errors;
      continue;
    }
    out.column.values[id] = score->get<double>();
  }
  out.column.name = "ConCISE-" + (out.judge_model.empty() ? std::string("?") : out.judge_model);
  return out;
}

void load_baselines(const fs::path& path, std::vector<MetricColumn>& pointwise,
                    std::vector<RankingColumn>& pairwise) {
  MetricColumn score;
  score.name = "GPT Score";
  score.source = path.filename().string();
  RankingColumn ranking;
  ranking.name = "GPT Ranking";
  ranking.source = score.source;
  bool any_score = false, any_ranking = false;
  for (const auto& j : read_lines(path)) {
    const std::string kind = str_field(j, "kind");
    const bool failed = j.contains("error") && !j["error"].is_null();
    if (kind == "gpt_score") {
      any_score = true;
      const auto v = j.find("score");
      if (failed) ++score.errors;
      else if (v == j.end() || !v->is_number_integer()) ++score.parse_failures;
      else score.values[str_field(j, "id")] = v->get<double>();
    } else if (kind == "gpt_ranking") {
      any_ranking = true;
      const auto c = j.contains("choice") && j["choice"].is_string()
                         ? parse_choice_name(j["choice"].get<std::string>())
                         : std::nullopt;
      if (failed) ++ranking.errors;
      else if (!c || *c == Choice::tie) ++ranking.parse_failures;
      else ranking.choices[{str_field(j, "first_id"), str_field(j, "second_id")}] = *c;
    } else {
      throw InvalidInput(path.string() + ": unknown baseline kind '" + kind + "'");
    }
  }
  if (any_score) pointwise.push_back(std::move(score));
  if (any_ranking) pairwise.push_back(std::move(ranking));
}

// Disambiguates rows that would otherwise share a name.
template <typename Column>
void disambiguate(std::vector<Column>& cols) {
  std::map<std::string, int> seen;
  for (const auto& c : cols) ++seen[c.name];
  for (auto& c : cols) {
    if (seen[c.name] > 1) c.name += " [" + c.source + "]";
  }
}

json correlation_json(const analysis::CorrelationResult& r) {
  return {{"coefficient", r.coefficient},
          {"p_value", r.p_value},
          {"p_method", std::string(analysis::p_method_name(r.p_method))},
          {"tie_correction", r.tie_correction},
          {"n", r.n}};
}

std::string mismatch_message(const std::string& row, const std::vector<std::string>& only_metric,
                             const std::vector<std::string>& only_human) {
  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > shown) s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s.empty() ? std::string("none") : s;
  };
  return row + " shares no record id with the annotations; only in metric file: " +
         list(only_metric) + "; only in annotations: " + list(only_human);
}

json table1_row(const MetricColumn& col, const std::map<std::string, double>& human,
                analysis::PValueMethod p) {
  json row;
  row["metric"] = col.name;
  row["source"] = col.source;
  row["orientation"] = kOrientation;
  row["excluded"] = {{"errors", col.errors}, {"parse_failures", col.parse_failures}};
  auto al = analysis::align(col.values, human);
  row["unmatched"] = {{"only_metric", al.only_metric}, {"only_human", al.only_human}};
  row["n"] = al.series.size();
  if (al.series.size() == 0) {
    throw IdMismatch(mismatch_message(col.name, al.only_metric, al.only_human));
  }
  try {
    row["spearman"] = correlation_json(analysis::spearman(al.series, p));
    row["kendall"] = correlation_json(analysis::kendall(al.series, p));
  } catch (const InvalidInput& e) {
    row.erase("spearman");
    row.erase("kendall");
    row["error"] = e.what();
  }
  return row;
}

using PairKey = std::pair<std::string, std::string>;

json finish_accuracy(json row, const std::vector<Choice>& metric, const std::vector<Choice>& human,
                     const std::vector<std::string>& unmatched,
                     const std::vector<dataset::PairVote>& votes) {
  row["unmatched_pairs"] = unmatched;
  row["pairs"] = metric.size();
  if (metric.empty()) {
    std::vector<std::string> ids;
    for (const auto& v : votes) ids.push_back(v.pair_id);
    throw IdMismatch(mismatch_message(row["metric"].get<std::string>(), {}, ids));
  }
  try {
    const auto acc = analysis::pairwise_accuracy(metric, human);
    row["accuracy_percent"] = acc.percent;
    row["matches"] = acc.matches;
    row["total"] = acc.total;
    row["metric_ties"] = acc.metric_ties;
    row["human_ties"] = acc.human_ties;
  } catch (const InvalidInput& e) {
    row["error"] = e.what();
  }
  return row;
}

json table2_concise(const MetricColumn& col, const std::vector<dataset::PairVote>& votes) {
  json row;
  row["metric"] = col.name;
  row["source"] = col.source;
  row["excluded"] = {{"errors", col.errors}, {"parse_failures", col.parse_failures}};
  std::vector<Choice> metric, human;
  std::vector<std::string> unmatched;
  for (const auto& v : votes) {
    const auto a = col.values.find(v.first_id), b = col.values.find(v.second_id);
    if (a == col.values.end() || b == col.values.end()) {
      unmatched.push_back(v.pair_id);
      continue;
    }
    metric.push_back(analysis::concise_choice(a->second, b->second));
    human.push_back(v.majority);
  }
  return finish_accuracy(std::move(row), metric, human, unmatched, votes);
}

json table2_ranking(const RankingColumn& col, const std::vector<dataset::PairVote>& votes) {
  json row;
  row["metric"] = col.name;
  row["source"] = col.source;
  row["excluded"] = {{"errors", col.errors}, {"parse_failures", col.parse_failures}};
  std::vector<Choice> metric, human;
  std::vector<std::string> unmatched;
  for (const auto& v : votes) {
    Choice c;
    if (auto it = col.choices.find(PairKey{v.first_id, v.second_id}); it != col.choices.end()) {
      c = it->second;
    } else if (auto jt = col.choices.find(PairKey{v.second_id, v.first_id});
               jt != col.choices.end()) {
      c = jt->second == Choice::first ? Choice::second : Choice::first;
    } else {
      unmatched.push_back(v.pair_id);
      continue;
    }
    metric.push_back(c);
    human.push_back(v.majority);
  }
  return finish_accuracy(std::move(row), metric, human, unmatched, votes);
}

json rejections_json(const std::vector<dataset::Rejection>& rs) {
  json out = json::array();
  for (const auto& r : rs) out.push_back({{"line", r.line}, {"reason", r.reason}});
  return out;
}

}  // namespace

json build_report(const ReportInputs& in) {
  if (in.score_files.empty() && in.baseline_files.empty()) {
    throw InvalidInput("analyze needs at least one --scores or --baseline file");
  }
  if (!in.likert && !in.pairwise) {
    throw InvalidInput("analyze needs --likert and/or --pairwise annotations");
  }

  std::vector<MetricColumn> pointwise;
  std::vector<RankingColumn> rankings;
  for (const auto& f : in.score_files) pointwise.push_back(load_scores(f).column);
  const std::size_t concise_rows = pointwise.size();
  for (const auto& f : in.baseline_files) load_baselines(f, pointwise, rankings);
  disambiguate(pointwise);
  disambiguate(rankings);

  // Per column (pointwise, then rankings): tables matched and mismatch messages.
  struct Outcome {
    std::size_t matched = 0;
    std::vector<std::string> mismatches;
  };
  std::vector<Outcome> outcomes(pointwise.size() + rankings.size());
  auto attempt = [&](std::size_t column, const auto& fn) {
    try {
      fn();
      ++outcomes[column].matched;
    } catch (const IdMismatch& e) {
      outcomes[column].mismatches.push_back(e.what());
    }
  };

  json report;
  report["aggregation"] = in.aggregate == dataset::LikertAggregate::mean ? "mean" : "median";
  report["p_method"] = std::string(analysis::p_method_name(in.p_method));
  json files = {{"scores", json::array()}, {"baselines", json::array()}};
  for (const auto& f : in.score_files) files["scores"].push_back(f.filename().string());
  for (const auto& f : in.baseline_files) files["baselines"].push_back(f.filename().string());
  report["inputs"] = files;
  report["table1"] = json::array();
  report["table2"] = json::array();

  if (in.likert) {
    auto likert = dataset::load_likert(*in.likert);
    const auto human = dataset::aggregate_likert(likert.records, in.aggregate);
    report["likert"] = {{"file", in.likert->filename().string()},
                        {"annotations", likert.records.size()},
                        {"records", human.size()},
                        {"rejections", rejections_json(likert.rejections)}};
    for (std::size_t i = 0; i < pointwise.size(); ++i) {
      attempt(i, [&] { report["table1"].push_back(table1_row(pointwise[i], human, in.p_method)); });
    }
  }
  if (in.pairwise) {
    auto pw = dataset::load_pairwise(*in.pairwise);
    const auto votes = dataset::aggregate_pairwise(pw.records);
    report["pairwise"] = {{"file", in.pairwise->filename().string()},
                          {"annotations", pw.records.size()},
                          {"pairs", votes.size()},
                          {"rejections", rejections_json(pw.rejections)}};
    for (std::size_t i = 0; i < concise_rows; ++i) {
      attempt(i, [&] { report["table2"].push_back(table2_concise(pointwise[i], votes)); });
    }
    for (std::size_t i = 0; i < rankings.size(); ++i) {
      attempt(pointwise.size() + i,
              [&] { report["table2"].push_back(table2_ranking(rankings[i], votes)); });
    }
  }

  // A file that matched nothing anywhere is an input error; one that only
  // missed a single table is noted and left out of it.
  json skipped = json::array();
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const auto& o = outcomes[c];
    if (o.mismatches.empty()) continue;
    if (o.matched == 0) throw IdMismatch(o.mismatches.front());
    for (const auto& m : o.mismatches) skipped.push_back(m);
  }
  report["skipped"] = skipped;
  return report;
}

std::string format_p(double p) {
  if (p < 0.001) return "< 0.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = cells[c];
      if (c + 1 < cells.size()) cell.resize(width[c] + 2, ' ');
      s += cell;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c + 1 < width.size() ? 2 : 0);
  out += std::string(total, '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string cell_number(const json& row, const char* key, int digits) {
  const auto it = row.find(key);
  return it != row.end() && it->is_number() ? fixed(it->get<double>(), digits) : "-";
}

}  // namespace

std::string render_text(const json& report) {
  std::ostringstream out;
  if (report.contains("table1") && !report["table1"].empty()) {
    out << "Correlation with human Likert ratings (" << report.value("aggregation", "mean")
        << " over annotators)\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;
    for (const auto& r : report["table1"]) {
      std::vector<std::string> cells{r.value("metric", "")};
      if (r.contains("error")) {
        cells.insert(cells.end(), {"-", "-", "-", "-"});
        notes.push_back(r.value("metric", "") + ": " + r.value("error", ""));
      } else {
        cells.push_back(fixed(r["spearman"]["coefficient"].get<double>(), 3));
        cells.push_back(format_p(r["spearman"]["p_value"].get<double>()));
        cells.push_back(fixed(r["kendall"]["coefficient"].get<double>(), 3));
        cells.push_back(format_p(r["kendall"]["p_value"].get<double>()));
      }
      cells.push_back(std::to_string(r.value("n", 0)));
      cells.push_back(r.value("orientation", ""));
      rows.push_back(std::move(cells));
    }
    out << render_table({"Metric", "r_s", "p_s", "tau", "p_k", "n", "Orientation"}, rows);
    for (const auto& n : notes) out << "  note: " << n << "\n";
    out << "\n";
  }
  if (report.contains("table2") && !report["table2"].empty()) {
    out << "Pairwise agreement with human preferences\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> notes;
    for (const auto& r : report["table2"]) {
      std::vector<std::string> cells{r.value("metric", "")};
      if (r.contains("error")) notes.push_back(r.value("metric", "") + ": " + r.value("error", ""));
      cells.push_back(cell_number(r, "accuracy_percent", 1));
      cells.push_back(r.contains("matches") ? std::to_string(r["matches"].get<std::size_t>()) : "-");
      cells.push_back(r.contains("total") ? std::to_string(r["total"].get<std::size_t>()) : "-");
      const std::size_t ties = r.value("metric_ties", std::size_t{0}) + r.value("human_ties", std::size_t{0});
      cells.push_back(std::to_string(ties));
      rows.push_back(std::move(cells));
    }
    out << render_table({"Metric", "Accuracy (%)", "Matches", "Total", "Ties"}, rows);
    for (const auto& n : notes) out << "  note: " << n << "\n";
    out << "\n";
  }
  auto unmatched_note = [&](const char* table, const char* field) {
    if (!report.contains(table)) return;
    for (const auto& r : report[table]) {
      std::size_t count = 0;
      if (r.contains(field)) {
        const auto& u = r[field];
        count = u.is_array() ? u.size() : u.value("only_metric", json::array()).size() +
                                             u.value("only_human", json::array()).size();
      }
      if (count > 0) {
        out << "  " << r.value("metric", "") << ": " << count << " unmatched id(s), see report JSON\n";
      }
      const auto& ex = r.value("excluded", json::object());
      const auto errs = ex.value("errors", 0), pf = ex.value("parse_failures", 0);
      if (errs + pf > 0) {
        out << "  " << r.value("metric", "") << ": excluded " << errs << " failed and " << pf
            << " unparseable record(s)\n";
      }
    }
  };
  unmatched_note("table1", "unmatched");
  unmatched_note("table2", "unmatched_pairs");
  return out.str();
}

}  // namespace concise::report
