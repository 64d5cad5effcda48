#include "mtlse/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mtlse/errors.hpp"
#include "mtlse/synth/dataset_io.hpp"
#include "mtlse/training/trainer.hpp"

namespace mtlse::cli {

fs::path default_output_root() {
  const char* root = std::getenv("MTLSE_OUTPUT_ROOT");
  return root && *root ? fs::path(root) : fs::path("runs");
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string checkpoint_name(std::uint64_t seed) { return "seed_" + std::to_string(seed) + ".mtlw"; }

std::string loss_curves_csv(const std::vector<training::SeedRun>& runs) {
  std::ostringstream out;
  out << "seed,epoch,total,scene,event\n";
  for (const auto& r : runs) {
    for (const auto& e : r.curve) {
      out << r.seed << "," << e.epoch << "," << eval::format_number(e.total) << "," << eval::format_number(e.scene)
          << "," << eval::format_number(e.event) << "\n";
    }
  }
  return out.str();
}

eval::RunReport empty_report(const training::ExperimentConfig& cfg, const training::Dataset& d) {
  eval::RunReport r;
  r.method = cfg.name;
  r.scene_names = d.scene_names;
  r.event_names = d.event_names;
  return r;
}

void write_reports(const fs::path& dir, const eval::RunReport& report) {
  write_text_file(dir / "report.json", eval::report_json(report));
  write_text_file(dir / "report.csv", eval::report_csv(report));
  const auto mean = report.mean();
  if (mean.confusion) write_text_file(dir / "confusion.csv", eval::confusion_csv(*mean.confusion, report.scene_names));
}

}  // namespace

RunResult run_experiment(const training::ExperimentConfig& cfg, const fs::path& out_dir, std::size_t workers,
                         std::ostream* log) {
  training::validate(cfg);
  const training::Dataset data = synth::load_dataset(cfg.dataset);
  const training::Split split = training::split_dataset(data, cfg.test_fraction);

  fs::create_directories(out_dir / "checkpoints");
  write_text_file(out_dir / "config.txt", training::to_text(cfg));
  {
    auto net = model::Network::build(training::network_config_for(cfg, split.train), 0);
    write_text_file(out_dir / "network.json", net.manifest() + "\n");
  }

  std::vector<training::SeedRun> runs(cfg.seeds.size());
  std::vector<eval::MetricReport> metrics(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      const auto seed = cfg.seeds[i];
      try {
        try {
          runs[i] = training::train_seed(cfg, split.train, seed);
        } catch (const NumericalError& e) {
          runs[i].seed = seed;
          runs[i].error = e.what();
          continue;
        }
        auto net = training::restore_network(cfg, split.train, runs[i].state);
        metrics[i] = training::evaluate(net, split.test, cfg.event_threshold);
        nn::save_checkpoint((out_dir / "checkpoints" / checkpoint_name(seed)).string(), runs[i].state);
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << cfg.name << ": seed " << seed << " done\n";
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, cfg.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult result{out_dir, empty_report(cfg, data)};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].error) result.report.failures.emplace_back(cfg.seeds[i], *runs[i].error);
    else result.report.seeds.push_back({cfg.seeds[i], metrics[i]});
  }
  write_text_file(out_dir / "loss_curves.csv", loss_curves_csv(runs));
  write_reports(out_dir, result.report);

  nlohmann::ordered_json m;
  m["name"] = cfg.name;
  m["dataset"] = cfg.dataset.string();
  m["train_clips"] = split.train.clips.size();
  m["test_clips"] = split.test.clips.size();
  m["seeds"] = cfg.seeds;
  auto files = nlohmann::ordered_json::array({"config.txt", "network.json", "report.json", "report.csv",
                                              "loss_curves.csv"});
  if (result.report.mean().confusion) files.push_back("confusion.csv");
  for (const auto& s : result.report.seeds) files.push_back("checkpoints/" + checkpoint_name(s.seed));
  m["files"] = files;
  write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return result;
}

eval::RunReport reevaluate(const fs::path& run_dir) {
  if (!fs::exists(run_dir / "config.txt")) throw InputError("'" + run_dir.string() + "' holds no config.txt");
  const auto cfg = training::parse_experiment_config(read_text_file(run_dir / "config.txt"),
                                                     (run_dir / "config.txt").string());
  const training::Dataset data = synth::load_dataset(cfg.dataset);
  const training::Split split = training::split_dataset(data, cfg.test_fraction);
  eval::RunReport report = empty_report(cfg, data);
  for (auto seed : cfg.seeds) {
    const fs::path ckpt = run_dir / "checkpoints" / checkpoint_name(seed);
    if (!fs::exists(ckpt)) {
      report.failures.emplace_back(seed, "no checkpoint");
      continue;
    }
    auto net = training::restore_network(cfg, split.train, nn::load_checkpoint(ckpt.string()));
    report.seeds.push_back({seed, training::evaluate(net, split.test, cfg.event_threshold)});
  }
  return report;
}

}  // namespace mtlse::cli
