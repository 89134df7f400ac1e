#pragma once

// Rank correlations with p-values, and pairwise agreement accuracy.

#include "concise/errors.hpp"
#include "concise/metric.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace concise::analysis {

/// Zero rank variance in one of the series.
class UndefinedCorrelation : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Paired observations, one per record id.
struct RankedSeries {
  std::vector<std::string> ids;
  std::vector<double> metric;
  std::vector<double> human;

  std::size_t size() const { return metric.size(); }
  /// Equal lengths, finite values, n >= 2.
  void validate() const;
};

/// Inner join of two id-keyed maps, in id order. Ids present on only one
/// side are listed.
struct Alignment {
  RankedSeries series;
  std::vector<std::string> only_metric;
  std::vector<std::string> only_human;
};
Alignment align(const std::map<std::string, double>& metric,
                const std::map<std::string, double>& human);

enum class CorrelationMethod { spearman, kendall };
std::string_view method_name(CorrelationMethod m);

/// `automatic` is exact for n <= kExactLimit and approximate above.
enum class PValueMethod { automatic, exact, approximate };
std::string_view p_method_name(PValueMethod m);

inline constexpr std::size_t kExactLimit = 10;

struct CorrelationResult {
  double coefficient = 0.0;
  double p_value = 1.0;  // two-sided
  CorrelationMethod method = CorrelationMethod::spearman;
  std::size_t n = 0;
  bool tie_correction = false;  // ties were present and corrected for
  PValueMethod p_method = PValueMethod::exact;  // never automatic
};

/// 1-based average ranks.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Pearson correlation of average ranks. The exact p-value enumerates every
/// arrangement of the second series; the approximation is Student's t with
/// n-2 degrees of freedom.
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y,
                           PValueMethod p = PValueMethod::automatic);
CorrelationResult spearman(const RankedSeries& s, PValueMethod p = PValueMethod::automatic);

/// Tau-b in O(n log n). The approximate p-value is normal with the
/// tie-adjusted variance of S = concordant - discordant.
CorrelationResult kendall(const std::vector<double>& x, const std::vector<double>& y,
                          PValueMethod p = PValueMethod::automatic);
CorrelationResult kendall(const RankedSeries& s, PValueMethod p = PValueMethod::automatic);

struct AccuracyResult {
  std::size_t matches = 0;
  std::size_t total = 0;        // decided comparisons only
  std::size_t metric_ties = 0;  // excluded: metric could not choose
  std::size_t human_ties = 0;   // excluded: annotators split evenly
  double percent = 0.0;
};

/// Percent of decided positions where both lists agree. Positions with a
/// tie on either side are excluded from `total` and counted separately.
/// Throws InvalidInput on empty or unequal lists, or when every position
/// is a tie.
AccuracyResult pairwise_accuracy(const std::vector<Choice>& metric_choices,
                                 const std::vector<Choice>& human_choices);

/// The higher score is the more concise answer; equal scores tie.
Choice concise_choice(double score_a, double score_b);
Choice concise_choice(const ConciseScore& a, const ConciseScore& b);

}  // namespace concise::analysis
