#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtlse/training/dataset.hpp"

namespace mtlse::synth {

struct SynthSpec;

struct Interval {
  std::size_t event = 0;
  std::size_t onset = 0;
  std::size_t offset = 0;  // exclusive
};

/// Maximal runs of active frames per class, ordered by class then onset.
std::vector<Interval> roll_to_intervals(const eval::BinaryMatrix& roll);

/// Directory layout:
///   features/<clip_id>.lmel   feature files
///   labels.csv                clip_id,scene_id,event_class,onset_frame,offset_frame
///                             (one row per interval; event fields empty for
///                             clips without events; offsets exclusive)
///   spec.json                 scene and event names, plus the generator
///                             recipe when there is one
void write_dataset(const std::filesystem::path& dir, const training::Dataset& d, const SynthSpec* spec = nullptr,
                   std::optional<std::uint64_t> seed = std::nullopt);

/// Throws InputError for a missing directory or file and FormatError for
/// malformed contents.
training::Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace mtlse::synth
