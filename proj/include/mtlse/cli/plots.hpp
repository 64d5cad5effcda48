#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mtlse::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);

/// Total loss per epoch, one polyline per seed, from loss_curves.csv text.
std::string loss_curve_svg(const CsvTable& curves);
/// Recall heatmap from confusion.csv text; rows and columns keep file order.
std::string confusion_svg(const CsvTable& confusion, const std::string& title);
/// One bar per label.
std::string bar_chart_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                          const std::string& title);

/// Writes SVG plots under `<dir>/plots` for a run directory (report.csv) or
/// a grid directory (table.csv, plus every member run). Output depends only
/// on the report files. Throws InputError when `dir` holds neither report.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

}  // namespace mtlse::cli
