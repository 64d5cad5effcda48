#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtlse/eval/report.hpp"
#include "mtlse/training/experiment_config.hpp"

namespace mtlse::cli {

/// A set of methods sharing one dataset and seed list.
///
/// File format: `key = value` lines before the first section are shared by
/// every member; each `[method]` section adds or overrides keys for one
/// member, whose name defaults to the section title. `dataset` and `seeds`
/// may only appear in the shared part.
struct Grid {
  std::string name = "grid";
  std::vector<training::ExperimentConfig> members;
};

Grid parse_grid(const std::string& text, const std::string& origin = "<grid>",
                const std::filesystem::path& base_dir = {});
Grid load_grid(const std::filesystem::path& path);

struct GridRow {
  std::string method;
  /// Empty when the member failed before producing a report.
  std::optional<eval::RunReport> report;
  /// "ok", or "failed: <reason>".
  std::string status = "ok";
};

struct GridResult {
  std::filesystem::path dir;
  std::vector<GridRow> rows;
};

/// Column names of table.csv.
std::vector<std::string> grid_table_columns();
/// One row per method: mean and std of each overall metric.
std::string grid_table_csv(const std::vector<GridRow>& rows);
/// Rows are event classes plus a final `macro` row; columns are the methods
/// with an event branch, holding the mean per-event F.
std::string per_event_csv(const std::vector<GridRow>& rows);

/// Method names whose confusion matrices are emitted: the first scene-only
/// baseline, plain multitask, GRL at E1 and fake-event member, when present.
std::vector<std::string> confusion_methods(const Grid& g);

/// Runs each member into `out_dir/<method>` with at most `workers` members
/// in flight, then writes table.csv, per_event.csv, confusion_<method>.csv
/// and manifest.json. A failing member is recorded in its row; the rest of
/// the grid still runs.
GridResult run_grid(const Grid& g, const std::filesystem::path& out_dir, std::size_t workers = 1,
                    std::ostream* log = nullptr);

}  // namespace mtlse::cli
