#include "mtlse/training/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "mtlse/errors.hpp"

namespace mtlse::training {

std::size_t LabeledClip::scene_index() const {
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (scene[i]) return i;
  }
  throw LabelError("clip '" + id + "' has no active scene label");
}

std::size_t Dataset::frames() const { return clips.empty() ? 0 : clips.front().features.frames; }

std::size_t Dataset::bins() const { return clips.empty() ? 0 : clips.front().features.bins; }

void validate(const Dataset& d) {
  for (const auto& c : d.clips) {
    if (c.scene.size() != d.n_scenes()) throw ShapeError("clip '" + c.id + "': scene vector length mismatch");
    std::size_t ones = 0;
    for (auto v : c.scene) {
      if (v > 1) throw LabelError("clip '" + c.id + "': scene vector is not binary");
      ones += v;
    }
    if (ones != 1) throw LabelError("clip '" + c.id + "': scene vector is not one-hot");
    if (c.features.frames != d.frames() || c.features.bins != d.bins() ||
        c.features.values.size() != c.features.frames * c.features.bins) {
      throw ShapeError("clip '" + c.id + "': feature geometry differs from the first clip");
    }
    if (c.events.rows != c.features.frames || c.events.cols != d.n_events() ||
        c.events.values.size() != c.events.rows * c.events.cols) {
      throw ShapeError("clip '" + c.id + "': event roll must be frames x n_events");
    }
    for (auto v : c.events.values) {
      if (v > 1) throw LabelError("clip '" + c.id + "': event roll is not binary");
    }
  }
}

std::vector<std::uint8_t> one_hot(std::size_t index, std::size_t n) {
  if (index >= n) throw LabelError("scene index " + std::to_string(index) + " out of range");
  std::vector<std::uint8_t> v(n, 0);
  v[index] = 1;
  return v;
}

Split split_dataset(const Dataset& d, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  Split s;
  s.train.scene_names = s.test.scene_names = d.scene_names;
  s.train.event_names = s.test.event_names = d.event_names;
  std::vector<std::vector<std::size_t>> by_scene(d.n_scenes());
  for (std::size_t i = 0; i < d.clips.size(); ++i) by_scene[d.clips[i].scene_index()].push_back(i);
  std::vector<bool> is_test(d.clips.size(), false);
  for (const auto& members : by_scene) {
    const std::size_t n = members.size();
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    for (std::size_t k = n - std::min(n_test, n); k < n; ++k) is_test[members[k]] = true;
  }
  for (std::size_t i = 0; i < d.clips.size(); ++i) (is_test[i] ? s.test : s.train).clips.push_back(d.clips[i]);
  return s;
}

Tensor batch_features(const Dataset& d, const std::vector<std::size_t>& indices) {
  const std::size_t t = d.frames(), f = d.bins();
  Tensor x({indices.size(), 1, t, f});
  double* out = x.data();
  for (std::size_t i : indices) {
    for (float v : d.clips[i].features.values) *out++ = v;
  }
  return x;
}

Tensor batch_scene_targets(const Dataset& d, const std::vector<std::size_t>& indices) {
  Tensor y({indices.size(), d.n_scenes()});
  double* out = y.data();
  for (std::size_t i : indices) {
    for (auto v : d.clips[i].scene) *out++ = v;
  }
  return y;
}

Tensor batch_event_targets(const Dataset& d, const std::vector<std::size_t>& indices) {
  Tensor y({indices.size(), d.frames(), d.n_events()});
  double* out = y.data();
  for (std::size_t i : indices) {
    for (auto v : d.clips[i].events.values) *out++ = v;
  }
  return y;
}

}  // namespace mtlse::training
