#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtlse/eval/report.hpp"
#include "mtlse/model/network.hpp"
#include "mtlse/training/dataset.hpp"
#include "mtlse/training/experiment_config.hpp"

namespace mtlse::training {

/// Mean batch losses over one epoch.
struct EpochLoss {
  std::size_t epoch = 0;
  double total = 0.0;
  double scene = 0.0;
  double event = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpochLoss> curve;
  /// Final weights and batch-norm statistics; empty when the run failed.
  std::vector<nn::NamedTensor> state;
  /// Set when training aborted (e.g. on a NumericalError).
  std::optional<std::string> error;
};

/// Network config for `cfg` adapted to the dataset's class counts and input
/// geometry.
model::NetworkConfig network_config_for(const ExperimentConfig& cfg, const Dataset& d);

using EpochCallback = std::function<void(std::uint64_t seed, const EpochLoss&)>;

/// Trains one seed. All randomness (initialization, fake labels, batch
/// order) comes from a single stream seeded with `seed`. Batches of fewer
/// than two clips are skipped. NumericalError propagates.
SeedRun train_seed(const ExperimentConfig& cfg, const Dataset& train, std::uint64_t seed,
                   const EpochCallback& on_epoch = {});

/// Trains every configured seed in order. A NumericalError ends that seed
/// and is recorded in SeedRun::error; other seeds still run.
std::vector<SeedRun> run_training(const ExperimentConfig& cfg, const Dataset& train, const EpochCallback& on_epoch = {});

/// Rebuilds the network for `cfg` and loads `state` into it.
model::Network restore_network(const ExperimentConfig& cfg, const Dataset& d, const std::vector<nn::NamedTensor>& state);

/// Eval-mode predictions scored against the dataset's labels. Scene metrics
/// are filled when the network has a scene branch, event metrics when it has
/// an event branch.
eval::MetricReport evaluate(model::Network& net, const Dataset& test, double event_threshold = 0.5,
                            std::size_t batch_size = 32);

}  // namespace mtlse::training
