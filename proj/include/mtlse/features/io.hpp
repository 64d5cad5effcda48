#pragma once

#include <string>

#include "mtlse/features/features.hpp"

namespace mtlse::features {

/// Feature file layout (little-endian): "LMEL", u32 frames, u32 bins, then
/// frames * bins float32 values, row-major.
std::string encode_feature_file(const FeatureClip& clip);
FeatureClip decode_feature_file(const std::string& bytes);

void save_feature_file(const std::string& path, const FeatureClip& clip);
FeatureClip load_feature_file(const std::string& path);

/// 16-bit PCM mono RIFF/WAVE.
Waveform decode_wav(const std::string& bytes);
std::string encode_wav_pcm16(const Waveform& w);
Waveform load_wav(const std::string& path);

}  // namespace mtlse::features
