#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlse/eval/metrics.hpp"
#include "mtlse/features/features.hpp"
#include "mtlse/tensor.hpp"

namespace mtlse::training {

/// One clip with its targets: a one-hot scene vector and a frames x events
/// binary roll.
struct LabeledClip {
  std::string id;
  features::FeatureClip features;
  std::vector<std::uint8_t> scene;
  eval::BinaryMatrix events;

  std::size_t scene_index() const;
};

struct Dataset {
  std::vector<std::string> scene_names;
  std::vector<std::string> event_names;
  std::vector<LabeledClip> clips;

  std::size_t n_scenes() const { return scene_names.size(); }
  std::size_t n_events() const { return event_names.size(); }
  std::size_t frames() const;
  std::size_t bins() const;
};

/// Throws LabelError on a non-one-hot scene vector or non-binary roll, and
/// ShapeError when clips disagree in geometry or roll size.
void validate(const Dataset& d);

std::vector<std::uint8_t> one_hot(std::size_t index, std::size_t n);

struct Split {
  Dataset train;
  Dataset test;
};

/// Per scene, the last round(test_fraction * count) clips (in dataset order)
/// go to the test side; every scene keeps at least one clip on each side when
/// it has two or more.
Split split_dataset(const Dataset& d, double test_fraction);

/// Stacks clips[indices] into an N x 1 x T x F input tensor.
Tensor batch_features(const Dataset& d, const std::vector<std::size_t>& indices);
/// N x n_scenes one-hot targets.
Tensor batch_scene_targets(const Dataset& d, const std::vector<std::size_t>& indices);
/// N x T x n_events binary targets.
Tensor batch_event_targets(const Dataset& d, const std::vector<std::size_t>& indices);

}  // namespace mtlse::training
