#pragma once

// Brute-force reference implementations for rank statistics. Ranks come
// from pairwise counting, Kendall counts from visiting every pair, and
// exact p-values from visiting all n! orderings of the second series.
// The final division matches the library expression so coefficients can
// be compared for bit equality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace concise::test_support {

// 2 * average rank = 2 * #less + #equal + 1, by counting.
inline std::vector<long long> oracle_doubled_ranks(const std::vector<double>& v) {
  std::vector<long long> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    long long less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    out[i] = 2 * less + equal + 1;
  }
  return out;
}

struct SpearmanParts {
  long long num = 0, a = 0, b = 0;
};

inline SpearmanParts oracle_spearman_parts(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  const auto rx = oracle_doubled_ranks(x);
  const auto ry = oracle_doubled_ranks(y);
  const long long n = static_cast<long long>(x.size());
  long long sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += rx[i] * rx[i];
    syy += ry[i] * ry[i];
    sxy += rx[i] * ry[i];
  }
  return {n * sxy - sx * sy, n * sxx - sx * sx, n * syy - sy * sy};
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto p = oracle_spearman_parts(x, y);
  return std::clamp(static_cast<double>(p.num) /
                        std::sqrt(static_cast<double>(p.a) * static_cast<double>(p.b)),
                    -1.0, 1.0);
}

// Pearson correlation of average ranks in floating point; an independent
// check on the integer route above.
inline double oracle_spearman_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = oracle_doubled_ranks(x);
  const auto ry = oracle_doubled_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / 2.0;
    my += ry[i] / 2.0;
  }
  mx /= n;
  my /= n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] / 2.0 - mx, dy = ry[i] / 2.0 - my;
    cxy += dx * dy;
    cxx += dx * dx;
    cyy += dy * dy;
  }
  return cxy / std::sqrt(cxx * cyy);
}

struct KendallParts {
  long long s = 0, n0 = 0, n1 = 0, n2 = 0;
};

inline KendallParts oracle_kendall_parts(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  KendallParts k;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++k.n0;
      const bool tx = x[i] == x[j], ty = y[i] == y[j];
      k.n1 += tx;
      k.n2 += ty;
      if (tx || ty) continue;
      k.s += ((x[i] < x[j]) == (y[i] < y[j])) ? 1 : -1;
    }
  }
  return k;
}

inline double oracle_kendall(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = oracle_kendall_parts(x, y);
  return std::clamp(static_cast<double>(k.s) / std::sqrt(static_cast<double>(k.n0 - k.n1) *
                                                         static_cast<double>(k.n0 - k.n2)),
                    -1.0, 1.0);
}

// Two-sided permutation p-value over all n! index orderings (Heap's
// algorithm), counting orderings whose |statistic| reaches the observed one.
template <typename Stat>
double oracle_permutation_p(const std::vector<double>& x, const std::vector<double>& y, Stat stat) {
  const double observed = std::abs(stat(x, y));
  const std::size_t n = y.size();
  std::vector<double> perm = y;
  std::vector<std::size_t> c(n, 0);
  std::uint64_t hits = 0, total = 0;
  auto visit = [&] {
    ++total;
    if (std::abs(stat(x, perm)) >= observed - 1e-12) ++hits;
  };
  visit();
  for (std::size_t i = 1; i < n;) {
    if (c[i] < i) {
      std::swap(perm[i % 2 == 0 ? 0 : c[i]], perm[i]);
      visit();
      ++c[i];
      i = 1;
    } else {
      c[i] = 0;
      ++i;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace concise::test_support
