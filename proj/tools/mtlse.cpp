#include <CLI11.hpp>
#include <iostream>

#include "mtlse/cli/grid.hpp"
#include "mtlse/cli/plots.hpp"
#include "mtlse/cli/runner.hpp"
#include "mtlse/errors.hpp"
#include "mtlse/synth/dataset_io.hpp"
#include "mtlse/synth/generator.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace mtlse;
  CLI::App app{"Joint acoustic scene classification and sound event detection experiments"};
  app.require_subcommand(1);

  std::string config_path, grid_path, in_dir, out_dir, spec_path, profile_name;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::size_t clips_per_scene = 0;
  bool check = false;

  auto* run = app.add_subcommand("run", "Train and evaluate one experiment config");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Run directory (default: $MTLSE_OUTPUT_ROOT/<name>)");
  run->add_option("--workers", workers, "Seeds trained in parallel")->check(CLI::PositiveNumber);

  auto* grid = app.add_subcommand("grid", "Run every method of an ablation grid");
  grid->add_option("--grid", grid_path, "Grid file")->required();
  grid->add_option("--out", out_dir, "Grid directory (default: $MTLSE_OUTPUT_ROOT/<grid name>)");
  grid->add_option("--workers", workers, "Methods run in parallel")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Write SVG plots for a run or grid directory");
  plot->add_option("--in", in_dir, "Run or grid directory")->required();

  auto* eval = app.add_subcommand("eval", "Re-score the checkpoints of a run directory");
  eval->add_option("--in", in_dir, "Run directory")->required();
  eval->add_flag("--check", check, "Fail unless the result matches the stored report.csv");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  auto* spec_opt = gen->add_option("--spec", spec_path, "Generator spec (JSON)");
  gen->add_option("--profile", profile_name, "Built-in profile: default or fast")->excludes(spec_opt);
  gen->add_option("--out", out_dir, "Dataset directory")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--clips-per-scene", clips_per_scene, "Override clips per scene");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      const auto cfg = training::load_experiment_config(config_path);
      const auto dir = out_dir.empty() ? cli::default_output_root() / cfg.name : cli::fs::path(out_dir);
      const auto result = cli::run_experiment(cfg, dir, workers, &std::cerr);
      std::cout << eval::report_csv(result.report);
      std::cerr << "wrote " << dir.string() << "\n";
      return result.report.failures.empty() ? 0 : kRuntimeError;
    }
    if (*grid) {
      const auto g = cli::load_grid(grid_path);
      const auto dir = out_dir.empty() ? cli::default_output_root() / g.name : cli::fs::path(out_dir);
      const auto result = cli::run_grid(g, dir, workers, &std::cerr);
      std::cout << cli::grid_table_csv(result.rows);
      std::cerr << "wrote " << dir.string() << "\n";
      for (const auto& row : result.rows) {
        if (row.status != "ok") return kRuntimeError;
      }
      return 0;
    }
    if (*plot) {
      for (const auto& p : cli::emit_plots(in_dir)) std::cout << p.string() << "\n";
      return 0;
    }
    if (*eval) {
      const std::string csv = eval::report_csv(cli::reevaluate(in_dir));
      std::cout << csv;
      if (check && csv != cli::read_text_file(cli::fs::path(in_dir) / "report.csv")) {
        std::cerr << "re-evaluated report differs from the stored report.csv\n";
        return kRuntimeError;
      }
      return 0;
    }
    if (*gen) {
      synth::SynthSpec spec = !spec_path.empty() ? synth::load_spec(spec_path)
                                                 : synth::profile(profile_name.empty() ? "fast" : profile_name);
      if (clips_per_scene) spec.clips_per_scene = clips_per_scene;
      const auto data = synth::generate_dataset(spec, seed);
      synth::write_dataset(out_dir, data, &spec, seed);
      std::cerr << "wrote " << data.clips.size() << " clips to " << out_dir << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
