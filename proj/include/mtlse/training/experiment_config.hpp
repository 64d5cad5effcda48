#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtlse/model/config.hpp"

namespace mtlse::training {

enum class FakeLabels { None, Scene, Event };

std::string to_string(FakeLabels f);
FakeLabels parse_fake_labels(const std::string& s);

/// One training/evaluation recipe. n_scenes, n_events and the input
/// geometry's frames/bins are taken from the dataset at run time.
struct ExperimentConfig {
  std::string name = "experiment";
  model::NetworkConfig network;
  FakeLabels fake_labels = FakeLabels::None;
  /// Draw fresh fake labels every epoch instead of once per run.
  bool fake_resample = false;
  std::vector<std::uint64_t> seeds{1};
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::filesystem::path dataset;
  double test_fraction = 0.2;
  double event_threshold = 0.5;
};

/// Throws ConfigError. Fake labels and a GRL may not be combined.
void validate(const ExperimentConfig& c);

/// A `key = value` line and where it came from (`file:line`).
struct ConfigEntry {
  std::string key;
  std::string value;
  std::string where;
};

/// Splits `key = value` text into entries. Blank lines and `#` comments are
/// skipped. Throws ConfigError naming `origin:line` on malformed lines.
std::vector<ConfigEntry> parse_entries(const std::string& text, const std::string& origin);

/// Builds a config from entries; later entries override earlier ones. The
/// dataset path is resolved against `base_dir` when relative and stored as
/// an absolute path. Errors name the offending entry's location. `dataset`
/// is required.
///
/// Keys: name, variant (mtl|asc|sed), grl_position (none|S1|S2|E1|E2),
/// grl_lambda, fake_labels (none|scene|event), fake_resample (true|false),
/// alpha, beta, seeds (comma list), epochs, batch_size, learning_rate,
/// dataset, test_fraction, event_threshold, geometry (default|fast),
/// trunk_channels, scene_channels, trunk_freq_pools (comma list),
/// scene_time_pool, gru_units, fc_units, leaky_slope.
ExperimentConfig build_experiment_config(const std::vector<ConfigEntry>& entries, const std::string& origin,
                                         const std::filesystem::path& base_dir);

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin = "<config>",
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical `key = value` text that parses back to an equal config.
std::string to_text(const ExperimentConfig& c);

}  // namespace mtlse::training
