#pragma once

#include <string>
#include <vector>

#include "mtlse/nn/losses.hpp"

namespace mtlse::model {

enum class Variant { Mtl, SceneOnly, EventOnly };

/// Where a gradient reversal layer sits:
///   S1 - scene branch input, between trunk and the first scene conv block
///   S2 - scene branch, after global max pooling, before the scene FC stack
///   E1 - event branch input, between trunk and the BiGRU
///   E2 - event branch, after the BiGRU, before the event FC stack
enum class GrlPosition { None, S1, S2, E1, E2 };

std::string to_string(Variant v);
std::string to_string(GrlPosition p);
/// Accepts "mtl", "asc"/"scene", "sed"/"event" (case-insensitive).
Variant parse_variant(const std::string& s);
/// Accepts "none", "s1", "s2", "e1", "e2" (case-insensitive).
GrlPosition parse_grl_position(const std::string& s);

struct GrlConfig {
  GrlPosition position = GrlPosition::None;
  double lambda = 1.0;
};

/// Layer widths and pooling factors. The defaults are the published
/// 500 x 64 topology.
struct Geometry {
  std::size_t frames = 500;
  std::size_t bins = 64;
  std::size_t trunk_channels = 128;
  std::size_t scene_channels = 256;
  std::vector<std::size_t> trunk_freq_pools{8, 2, 2};
  std::size_t scene_time_pool = 25;
  std::size_t gru_units = 32;
  std::size_t fc_units = 32;
  double leaky_slope = 0.01;

  /// Frequency bins left after the trunk.
  std::size_t trunk_out_bins() const;
};

/// Reduced-width geometry for 100 x 16 inputs.
Geometry fast_geometry();

struct NetworkConfig {
  std::size_t n_scenes = 4;
  std::size_t n_events = 25;
  GrlConfig grl;
  Variant variant = Variant::Mtl;
  nn::LossWeights loss_weights;
  Geometry geometry;
};

/// Throws ConfigError for inadmissible configurations.
void validate(const NetworkConfig& c);

}  // namespace mtlse::model
