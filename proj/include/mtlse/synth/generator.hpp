#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlse/training/dataset.hpp"

namespace mtlse::synth {

/// One acoustic scene: how often each event class occurs in its clips and
/// the per-band background level its features sit on.
struct SceneSpec {
  std::string name;
  /// Probability that a clip of this scene contains the event (one
  /// instance at most per clip and class).
  std::vector<double> event_priors;
  /// Log-mel background level per band.
  std::vector<double> background;
};

/// Generator recipe. Features are produced directly in log-mel space:
/// background + Gaussian noise, plus each placed event's template added over
/// its frame interval.
struct SynthSpec {
  std::vector<std::string> event_names;
  /// Per event, additive log-energy pattern over the bands.
  std::vector<std::vector<double>> event_templates;
  std::vector<SceneSpec> scenes;
  std::size_t clips_per_scene = 100;
  std::size_t frames = 100;
  std::size_t bins = 16;
  double noise_std = 1.0;
  std::size_t min_event_frames = 10;
  std::size_t max_event_frames = 40;
};

/// 4 scenes, 25 events, 500 x 64 clips.
SynthSpec default_profile();
/// 4 scenes, 6 events, 100 x 16 clips.
SynthSpec fast_profile();
/// "default" or "fast"; throws SpecError otherwise.
SynthSpec profile(const std::string& name);

/// Throws SpecError for malformed or degenerate specs.
void validate(const SynthSpec& s);

/// The placed event intervals of one clip, in placement order.
struct Placement {
  std::size_t event = 0;
  std::size_t onset = 0;
  std::size_t offset = 0;  // exclusive
};

struct GeneratedClip {
  training::LabeledClip clip;
  std::vector<Placement> placements;
};

/// One clip from its own RNG stream derived from (seed, scene, index).
GeneratedClip generate_clip(const SynthSpec& s, std::size_t scene, std::size_t index, std::uint64_t seed);

/// clips_per_scene clips for each scene, scene-major order. Identical
/// (spec, seed) pairs give identical datasets.
training::Dataset generate_dataset(const SynthSpec& s, std::uint64_t seed);

std::string spec_to_json(const SynthSpec& s);
SynthSpec spec_from_json(const std::string& text);
SynthSpec load_spec(const std::string& path);

}  // namespace mtlse::synth
