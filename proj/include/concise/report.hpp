#pragma once

// Correlation and pairwise-accuracy reports built from persisted score,
// baseline and annotation files. Nothing here talks to a provider.

#include "concise/analysis.hpp"
#include "concise/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace concise::report {

struct ReportInputs {
  std::vector<std::filesystem::path> score_files;
  std::vector<std::filesystem::path> baseline_files;
  std::optional<std::filesystem::path> likert;
  std::optional<std::filesystem::path> pairwise;
  dataset::LikertAggregate aggregate = dataset::LikertAggregate::mean;
  analysis::PValueMethod p_method = analysis::PValueMethod::automatic;
};

/// Id mismatch between a metric file and the annotations. The message
/// lists the unmatched ids.
class IdMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Builds the report object. Rows whose statistic is undefined carry an
/// "error" field; a metric sharing no id with the annotations raises
/// IdMismatch. Unreadable files raise IoError.
nlohmann::json build_report(const ReportInputs& inputs);

/// Fixed-width text rendering of a report object.
std::string render_text(const nlohmann::json& report);

/// "< 0.001" below one thousandth, else three decimals.
std::string format_p(double p);

}  // namespace concise::report
