#include "mtlse/model/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mtlse/errors.hpp"

namespace mtlse::model {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Mtl: return "mtl";
    case Variant::SceneOnly: return "asc";
    case Variant::EventOnly: return "sed";
  }
  return "?";
}

std::string to_string(GrlPosition p) {
  switch (p) {
    case GrlPosition::None: return "none";
    case GrlPosition::S1: return "S1";
    case GrlPosition::S2: return "S2";
    case GrlPosition::E1: return "E1";
    case GrlPosition::E2: return "E2";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  const auto v = lower(s);
  if (v == "mtl") return Variant::Mtl;
  if (v == "asc" || v == "scene") return Variant::SceneOnly;
  if (v == "sed" || v == "event") return Variant::EventOnly;
  throw ConfigError("unknown variant '" + s + "' (expected mtl, asc or sed)");
}

GrlPosition parse_grl_position(const std::string& s) {
  const auto v = lower(s);
  if (v == "none" || v.empty()) return GrlPosition::None;
  if (v == "s1") return GrlPosition::S1;
  if (v == "s2") return GrlPosition::S2;
  if (v == "e1") return GrlPosition::E1;
  if (v == "e2") return GrlPosition::E2;
  throw ConfigError("unknown GRL position '" + s + "' (expected none, S1, S2, E1 or E2)");
}

std::size_t Geometry::trunk_out_bins() const {
  std::size_t b = bins;
  for (std::size_t p : trunk_freq_pools) b = p ? b / p : 0;
  return b;
}

Geometry fast_geometry() {
  Geometry g;
  g.frames = 100;
  g.bins = 16;
  g.trunk_channels = 16;
  g.scene_channels = 32;
  g.trunk_freq_pools = {4, 2, 2};
  g.scene_time_pool = 25;
  g.gru_units = 16;
  g.fc_units = 32;
  return g;
}

void validate(const NetworkConfig& c) {
  if (c.n_scenes < 2) throw ConfigError("n_scenes must be >= 2");
  if (c.n_events < 1) throw ConfigError("n_events must be >= 1");
  if (c.variant != Variant::Mtl && c.grl.position != GrlPosition::None) {
    throw ConfigError("GRL position " + to_string(c.grl.position) + " requires the mtl variant");
  }
  if (!(c.grl.lambda >= 0.0) || !std::isfinite(c.grl.lambda)) throw ConfigError("grl lambda must be finite and >= 0");
  nn::validate(c.loss_weights);
  const Geometry& g = c.geometry;
  if (g.trunk_channels == 0 || g.scene_channels == 0 || g.gru_units == 0 || g.fc_units == 0) {
    throw ConfigError("layer widths must be positive");
  }
  if (g.trunk_freq_pools.empty()) throw ConfigError("trunk needs at least one conv block");
  if (g.scene_time_pool == 0) throw ConfigError("scene time pool must be positive");
  if (std::any_of(g.trunk_freq_pools.begin(), g.trunk_freq_pools.end(), [](std::size_t p) { return p == 0; })) {
    throw ConfigError("trunk pooling factors must be positive");
  }
  if (!(g.leaky_slope > 0.0 && g.leaky_slope < 1.0)) throw ConfigError("leaky slope must lie in (0, 1)");
}

}  // namespace mtlse::model
