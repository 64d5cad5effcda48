#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtlse/eval/metrics.hpp"

namespace mtlse::eval {

/// Scores for one trained model on one evaluation split. Scene fields are
/// unset for event-only models and event fields for scene-only models.
struct MetricReport {
  std::optional<double> scene_micro_f;
  std::optional<double> scene_macro_f;
  std::optional<double> event_micro_f;
  std::optional<double> event_macro_f;
  std::vector<double> per_scene_f;
  std::vector<double> per_event_f;
  std::optional<ConfusionMatrix> confusion;
};

struct SeedReport {
  std::uint64_t seed = 0;
  MetricReport metrics;
};

struct Summary {
  std::optional<double> scene_micro_f;
  std::optional<double> scene_macro_f;
  std::optional<double> event_micro_f;
  std::optional<double> event_macro_f;
  std::vector<double> per_event_f;
  std::vector<double> per_scene_f;
  /// Element-wise mean of the per-seed recall matrices.
  std::optional<Matrix<double>> confusion;
};

/// Per-seed metrics of one method plus their mean and sample standard
/// deviation (0 for a single seed).
struct RunReport {
  std::string method;
  std::vector<std::string> scene_names;
  std::vector<std::string> event_names;
  std::vector<SeedReport> seeds;
  /// Seeds whose training failed, with the error message.
  std::vector<std::pair<std::uint64_t, std::string>> failures;

  Summary mean() const;
  Summary stddev() const;
};

/// Column names of report.csv, in order.
std::vector<std::string> report_csv_columns(const std::vector<std::string>& event_names);

/// One row per seed, then `mean` and `std` rows. Missing values are empty.
/// Numbers use %.17g so they parse back to the same doubles.
std::string report_csv(const RunReport& r);
std::string report_json(const RunReport& r);
/// Mean recall matrix with scene names as row/column headers.
std::string confusion_csv(const Matrix<double>& m, const std::vector<std::string>& scene_names);

std::string format_number(double v);

}  // namespace mtlse::eval
