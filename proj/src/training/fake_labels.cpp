#include "mtlse/training/fake_labels.hpp"

#include <algorithm>

namespace mtlse::training {

std::vector<std::uint8_t> shuffle_labels(std::span<const std::uint8_t> v, nn::Rng& rng) {
  std::vector<std::uint8_t> out(v.begin(), v.end());
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

Dataset fake_scene_labels(const Dataset& d, nn::Rng& rng) {
  Dataset out = d;
  for (auto& c : out.clips) c.scene = shuffle_labels(c.scene, rng);
  return out;
}

Dataset fake_event_labels(const Dataset& d, nn::Rng& rng) {
  Dataset out = d;
  for (auto& c : out.clips) {
    auto& roll = c.events;
    for (std::size_t t = 0; t < roll.rows; ++t) {
      auto first = roll.values.begin() + static_cast<std::ptrdiff_t>(t * roll.cols);
      std::shuffle(first, first + static_cast<std::ptrdiff_t>(roll.cols), rng);
    }
  }
  return out;
}

}  // namespace mtlse::training
