#include "concise/analysis.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace concise::analysis {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw InvalidInput("series lengths differ (" + std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw InvalidInput("a correlation needs at least two pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidInput("series value at position " + std::to_string(i) + " is not finite");
    }
  }
}

// Twice the average rank: 2 * (number less) + (number equal) + 1.
std::vector<i64> doubled_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<i64> out(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const i64 r2 = 2 * static_cast<i64>(i) + static_cast<i64>(j - i) + 1;
    for (std::size_t k = i; k < j; ++k) out[order[k]] = r2;
    i = j;
  }
  return out;
}

bool has_ties(const std::vector<double>& v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

PValueMethod resolve(PValueMethod p, std::size_t n) {
  if (p != PValueMethod::automatic) return p;
  return n <= kExactLimit ? PValueMethod::exact : PValueMethod::approximate;
}

void check_exact_size(std::size_t n) {
  if (n > 12) {
    throw InvalidInput("exact permutation p-value is limited to n <= 12 (got " +
                       std::to_string(n) + ")");
  }
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// n * sum(x*y) - sum(x) * sum(y) over doubled ranks.
i128 rank_cross(const std::vector<i64>& x, const std::vector<i64>& y, i128 sx, i128 sy) {
  i128 sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += static_cast<i128>(x[i]) * y[i];
  return static_cast<i128>(x.size()) * sxy - sx * sy;
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

// Sum over tie groups of f(group size).
template <typename F>
double tie_sum(const std::vector<double>& v, F f) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  double total = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    total += f(static_cast<double>(j - i));
    i = j;
  }
  return total;
}

// Number of pairs i < j with a[i] > a[j]; sorts `a`.
i64 count_inversions(std::vector<double>& a, std::vector<double>& buf, std::size_t lo,
                     std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  i64 inv = count_inversions(a, buf, lo, mid) + count_inversions(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      inv += static_cast<i64>(mid - i);
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
  return inv;
}

struct KendallCounts {
  i64 s = 0;   // concordant - discordant
  i64 n0 = 0;  // n(n-1)/2
  i64 n1 = 0;  // pairs tied in x
  i64 n2 = 0;  // pairs tied in y
};

i64 pairs_in_groups(const std::vector<double>& sorted) {
  i64 total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<i64>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

KendallCounts knight_counts(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  KendallCounts c;
  c.n0 = static_cast<i64>(n) * static_cast<i64>(n - 1) / 2;
  i64 n3 = 0;  // pairs tied in both
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const auto t = static_cast<i64>(j - i);
    c.n1 += t * (t - 1) / 2;
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      const auto u = static_cast<i64>(b - a);
      n3 += u * (u - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const i64 swaps = count_inversions(ys, buf, 0, n);
  c.n2 = pairs_in_groups(ys);
  c.s = c.n0 - c.n1 - c.n2 + n3 - 2 * swaps;
  return c;
}

int sign(double d) { return (d > 0) - (d < 0); }

}  // namespace

void RankedSeries::validate() const {
  if (!ids.empty() && ids.size() != metric.size()) throw InvalidInput("series ids and values differ in length");
  check_pair(metric, human);
}

Alignment align(const std::map<std::string, double>& metric,
                const std::map<std::string, double>& human) {
  Alignment out;
  for (const auto& [id, value] : metric) {
    const auto it = human.find(id);
    if (it == human.end()) {
      out.only_metric.push_back(id);
      continue;
    }
    out.series.ids.push_back(id);
    out.series.metric.push_back(value);
    out.series.human.push_back(it->second);
  }
  for (const auto& [id, value] : human) {
    if (!metric.count(id)) out.only_human.push_back(id);
  }
  return out;
}

std::string_view method_name(CorrelationMethod m) {
  return m == CorrelationMethod::spearman ? "spearman" : "kendall";
}

std::string_view p_method_name(PValueMethod m) {
  switch (m) {
    case PValueMethod::automatic: return "automatic";
    case PValueMethod::exact: return "exact";
    case PValueMethod::approximate: break;
  }
  return "approximate";
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const auto r2 = doubled_ranks(values);
  std::vector<double> out(r2.size());
  for (std::size_t i = 0; i < r2.size(); ++i) out[i] = static_cast<double>(r2[i]) / 2.0;
  return out;
}

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                           PValueMethod p) {
  check_pair(x, y);
  const std::size_t n = x.size();
  const auto rx = doubled_ranks(x);
  auto ry = doubled_ranks(y);
  const i128 sx = std::accumulate(rx.begin(), rx.end(), i128{0});
  const i128 sy = std::accumulate(ry.begin(), ry.end(), i128{0});
  const i128 a = rank_cross(rx, rx, sx, sx);
  const i128 b = rank_cross(ry, ry, sy, sy);
  if (a == 0 || b == 0) throw UndefinedCorrelation("spearman: a series has zero rank variance");
  const i128 num = rank_cross(rx, ry, sx, sy);

  CorrelationResult out;
  out.method = CorrelationMethod::spearman;
  out.n = n;
  out.tie_correction = has_ties(x) || has_ties(y);
  out.coefficient = std::clamp(
      static_cast<double>(num) / std::sqrt(static_cast<double>(a) * static_cast<double>(b)), -1.0,
      1.0);
  out.p_method = resolve(p, n);

  if (out.p_method == PValueMethod::exact) {
    check_exact_size(n);
    const i128 observed = abs128(num);
    std::sort(ry.begin(), ry.end());
    std::uint64_t hits = 0, total = 0;
    do {
      ++total;
      if (abs128(rank_cross(rx, ry, sx, sy)) >= observed) ++hits;
    } while (std::next_permutation(ry.begin(), ry.end()));
    out.p_value = clamp01(static_cast<double>(hits) / static_cast<double>(total));
  } else {
    if (n < 3) throw InvalidInput("spearman: the t approximation needs n >= 3");
    const double r = out.coefficient;
    if (std::abs(r) >= 1.0) {
      out.p_value = 0.0;
    } else {
      const double df = static_cast<double>(n) - 2.0;
      const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
      const boost::math::students_t dist(df);
      out.p_value = clamp01(2.0 * boost::math::cdf(boost::math::complement(dist, t)));
    }
  }
  return out;
}

CorrelationResult spearman(const RankedSeries& s, PValueMethod p) {
  s.validate();
  return spearman(s.metric, s.human, p);
}

CorrelationResult kendall(const std::vector<double>& x, const std::vector<double>& y,
                          PValueMethod p) {
  check_pair(x, y);
  const std::size_t n = x.size();
  const KendallCounts c = knight_counts(x, y);
  if (c.n0 == c.n1 || c.n0 == c.n2) {
    throw UndefinedCorrelation("kendall: a series has no untied pairs");
  }

  CorrelationResult out;
  out.method = CorrelationMethod::kendall;
  out.n = n;
  out.tie_correction = c.n1 > 0 || c.n2 > 0;
  out.coefficient = std::clamp(
      static_cast<double>(c.s) /
          std::sqrt(static_cast<double>(c.n0 - c.n1) * static_cast<double>(c.n0 - c.n2)),
      -1.0, 1.0);
  out.p_method = resolve(p, n);

  if (out.p_method == PValueMethod::exact) {
    check_exact_size(n);
    // S depends only on the sign pattern, so compare integer sign sums.
    std::vector<int> sx(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) sx[i * n + j] = sign(x[j] - x[i]);
    }
    const auto ranks = doubled_ranks(y);
    std::vector<int> perm(ranks.begin(), ranks.end());
    std::sort(perm.begin(), perm.end());
    const i64 observed = std::abs(c.s);
    std::uint64_t hits = 0, total = 0;
    do {
      int s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int* row = &sx[i * n];
        const int yi = perm[i];
        for (std::size_t j = i + 1; j < n; ++j) s += row[j] * ((perm[j] > yi) - (perm[j] < yi));
      }
      ++total;
      if (std::abs(s) >= observed) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = clamp01(static_cast<double>(hits) / static_cast<double>(total));
  } else {
    const double nd = static_cast<double>(n);
    auto t1 = [](double t) { return t * (t - 1); };
    auto t2 = [](double t) { return t * (t - 1) * (t - 2); };
    auto t5 = [](double t) { return t * (t - 1) * (2 * t + 5); };
    double var = (nd * (nd - 1) * (2 * nd + 5) - tie_sum(x, t5) - tie_sum(y, t5)) / 18.0;
    var += tie_sum(x, t1) * tie_sum(y, t1) / (2 * nd * (nd - 1));
    if (n > 2) var += tie_sum(x, t2) * tie_sum(y, t2) / (9 * nd * (nd - 1) * (nd - 2));
    if (!(var > 0)) throw UndefinedCorrelation("kendall: zero variance under the null");
    // Continuity correction of one unit of S.
    const double z = std::max(0.0, std::abs(static_cast<double>(c.s)) - 1.0) / std::sqrt(var);
    const boost::math::normal_distribution<double> normal;
    out.p_value = clamp01(2.0 * boost::math::cdf(boost::math::complement(normal, z)));
  }
  return out;
}

CorrelationResult kendall(const RankedSeries& s, PValueMethod p) {
  s.validate();
  return kendall(s.metric, s.human, p);
}

AccuracyResult pairwise_accuracy(const std::vector<Choice>& metric_choices,
                                 const std::vector<Choice>& human_choices) {
  if (metric_choices.empty()) throw InvalidInput("pairwise accuracy needs at least one comparison");
  if (metric_choices.size() != human_choices.size()) {
    throw InvalidInput("metric and human choice lists differ in length (" +
                       std::to_string(metric_choices.size()) + " vs " +
                       std::to_string(human_choices.size()) + ")");
  }
  AccuracyResult out;
  for (std::size_t i = 0; i < metric_choices.size(); ++i) {
    if (human_choices[i] == Choice::tie) {
      ++out.human_ties;
    } else if (metric_choices[i] == Choice::tie) {
      ++out.metric_ties;
    } else {
      ++out.total;
      if (metric_choices[i] == human_choices[i]) ++out.matches;
    }
  }
  if (out.total == 0) throw InvalidInput("every comparison is a tie; accuracy is undefined");
  out.percent = 100.0 * static_cast<double>(out.matches) / static_cast<double>(out.total);
  return out;
}

Choice concise_choice(double score_a, double score_b) {
  if (score_a > score_b) return Choice::first;
  if (score_b > score_a) return Choice::second;
  return Choice::tie;
}

Choice concise_choice(const ConciseScore& a, const ConciseScore& b) {
  return concise_choice(a.score, b.score);
}

}  // namespace concise::analysis
