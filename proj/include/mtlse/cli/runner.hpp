#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mtlse/eval/report.hpp"
#include "mtlse/training/experiment_config.hpp"

namespace mtlse::cli {

namespace fs = std::filesystem;

/// $MTLSE_OUTPUT_ROOT, or "runs" when unset.
fs::path default_output_root();

struct RunResult {
  fs::path dir;
  eval::RunReport report;
};

/// Trains every seed of `cfg` on the training split of its dataset and
/// scores each on the held-out split. Writes into `out_dir`:
///   manifest.json, config.txt, network.json, report.json, report.csv,
///   confusion.csv (scene-capable variants), loss_curves.csv,
///   checkpoints/seed_<s>.mtlw
/// Seeds run on up to `workers` threads. Seeds that fail numerically are
/// listed in the report; other errors propagate.
RunResult run_experiment(const training::ExperimentConfig& cfg, const fs::path& out_dir, std::size_t workers = 1,
                         std::ostream* log = nullptr);

/// Re-scores the checkpoints stored in a run directory, without training.
eval::RunReport reevaluate(const fs::path& run_dir);

void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

}  // namespace mtlse::cli
