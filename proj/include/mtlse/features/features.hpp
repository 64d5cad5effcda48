#pragma once

#include <cstddef>
#include <vector>

#include "mtlse/tensor.hpp"

namespace mtlse::features {

/// Mono audio.
struct Waveform {
  std::vector<double> samples;
  unsigned sample_rate = 0;
};

/// Log-mel frame sequence, `frames` x `bins`, row-major single precision.
struct FeatureClip {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<float> values;
  double frame_hop_s = 0.02;
  double frame_len_s = 0.04;

  float at(std::size_t t, std::size_t d) const { return values[t * bins + d]; }
  float& at(std::size_t t, std::size_t d) { return values[t * bins + d]; }
};

enum class Window { Hamming, Rectangular };

struct FrontEndConfig {
  double frame_len_s = 0.04;
  double hop_s = 0.02;
  std::size_t n_mels = 64;
  Window window = Window::Hamming;
  double log_floor = 1e-10;
};

/// HTK mel scale: 2595 log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Number of analysis frames for `n_samples`: ceil(n_samples / hop). The
/// signal is zero-padded at the end so the last frame is complete, which
/// gives exactly 500 frames for 10 s at a 20 ms hop. Throws InputTooShort
/// when n_samples < frame.
std::size_t frame_count(std::size_t n_samples, std::size_t frame, std::size_t hop);

/// Frame length in samples rounded up to an even DFT size.
std::size_t dft_size(double frame_len_s, unsigned sample_rate);

/// Magnitude spectrogram, frames x (n_fft / 2 + 1), with n_fft = dft_size().
Tensor stft_magnitude(const Waveform& w, double frame_len_s, double hop_s, Window window = Window::Hamming);

/// Center frequencies (Hz) of `n_mels` triangles spaced evenly on the mel
/// scale between 0 and sample_rate / 2.
std::vector<double> mel_center_frequencies(std::size_t n_mels, unsigned sample_rate);

/// Triangular mel filters, n_mels x n_fft_bins. Bin k sits at
/// k * sample_rate / (2 (n_fft_bins - 1)) Hz. Throws FilterbankDegenerate if
/// any filter has no positive weight.
Tensor mel_filterbank(std::size_t n_fft_bins, std::size_t n_mels, unsigned sample_rate);

/// ln(filterbank . |STFT|^2 + floor), frames x n_mels.
FeatureClip extract_logmel(const Waveform& w, const FrontEndConfig& config = {});

}  // namespace mtlse::features
