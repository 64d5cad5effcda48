#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtlse/nn/layer.hpp"
#include "mtlse/training/dataset.hpp"

namespace mtlse::training {

/// Uniformly random permutation of a label vector's elements.
std::vector<std::uint8_t> shuffle_labels(std::span<const std::uint8_t> v, nn::Rng& rng);

/// Copy of `d` whose scene vectors are each independently permuted. The
/// input dataset is left untouched and keeps the true labels.
Dataset fake_scene_labels(const Dataset& d, nn::Rng& rng);

/// Copy of `d` whose event rolls have every frame's class vector permuted
/// independently. Per-frame active counts are preserved.
Dataset fake_event_labels(const Dataset& d, nn::Rng& rng);

}  // namespace mtlse::training
