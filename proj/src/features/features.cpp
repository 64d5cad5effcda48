#include "mtlse/features/features.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "mtlse/errors.hpp"

namespace mtlse::features {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::size_t to_samples(double seconds, unsigned sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * static_cast<double>(sample_rate)));
}

std::vector<double> make_window(std::size_t n, std::size_t active, Window kind) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < active; ++i) {
    w[i] = kind == Window::Hamming
               ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(active))
               : 1.0;
  }
  return w;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t frame_count(std::size_t n_samples, std::size_t frame, std::size_t hop) {
  if (frame < 2 || hop == 0) throw InputError("frame length must be >= 2 samples and hop > 0");
  if (n_samples < frame) {
    throw InputTooShort("waveform has " + std::to_string(n_samples) + " samples, shorter than one " +
                        std::to_string(frame) + "-sample frame");
  }
  return (n_samples + hop - 1) / hop;
}

std::size_t dft_size(double frame_len_s, unsigned sample_rate) {
  const std::size_t frame = to_samples(frame_len_s, sample_rate);
  return frame + (frame % 2);
}

Tensor stft_magnitude(const Waveform& w, double frame_len_s, double hop_s, Window window) {
  if (w.sample_rate == 0) throw InputError("sample rate must be positive");
  const std::size_t frame = to_samples(frame_len_s, w.sample_rate);
  const std::size_t hop = to_samples(hop_s, w.sample_rate);
  const std::size_t rows = frame_count(w.samples.size(), frame, hop);
  const std::size_t n_fft = frame + (frame % 2);
  const std::size_t bins = n_fft / 2 + 1;
  const auto win = make_window(n_fft, frame, window);

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.get(), out.get(), FFTW_ESTIMATE));
  }

  Tensor mag({rows, bins});
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t start = r * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      const std::size_t src = start + i;
      in.get()[i] = (i < frame && src < w.samples.size()) ? w.samples[src] * win[i] : 0.0;
    }
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < bins; ++k) mag[r * bins + k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  }
  return mag;
}

std::vector<double> mel_center_frequencies(std::size_t n_mels, unsigned sample_rate) {
  const double top = hz_to_mel(static_cast<double>(sample_rate) / 2.0);
  std::vector<double> centers(n_mels);
  for (std::size_t j = 0; j < n_mels; ++j) {
    centers[j] = mel_to_hz(top * static_cast<double>(j + 1) / static_cast<double>(n_mels + 1));
  }
  return centers;
}

Tensor mel_filterbank(std::size_t n_fft_bins, std::size_t n_mels, unsigned sample_rate) {
  if (n_mels == 0) throw FilterbankDegenerate("n_mels must be >= 1");
  if (n_fft_bins < 2 || n_fft_bins < n_mels) {
    throw FilterbankDegenerate(std::to_string(n_mels) + " mel filters need at least as many FFT bins, got " +
                               std::to_string(n_fft_bins));
  }
  const double nyquist = static_cast<double>(sample_rate) / 2.0;
  const double top = hz_to_mel(nyquist);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  Tensor fb({n_mels, n_fft_bins});
  const double bin_hz = nyquist / static_cast<double>(n_fft_bins - 1);
  for (std::size_t j = 0; j < n_mels; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    bool any = false;
    for (std::size_t k = 0; k < n_fft_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (f > lo && f <= mid) {
        v = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        v = (hi - f) / (hi - mid);
      }
      fb[j * n_fft_bins + k] = v;
      any = any || v > 0.0;
    }
    if (!any) {
      throw FilterbankDegenerate("mel filter " + std::to_string(j) + " covers no FFT bin; " + std::to_string(n_mels) +
                                 " filters exceed the usable resolution of " + std::to_string(n_fft_bins) + " bins");
    }
  }
  return fb;
}

FeatureClip extract_logmel(const Waveform& w, const FrontEndConfig& config) {
  const Tensor mag = stft_magnitude(w, config.frame_len_s, config.hop_s, config.window);
  const std::size_t rows = mag.dim(0), bins = mag.dim(1);
  const Tensor fb = mel_filterbank(bins, config.n_mels, w.sample_rate);
  FeatureClip clip;
  clip.frames = rows;
  clip.bins = config.n_mels;
  clip.frame_hop_s = config.hop_s;
  clip.frame_len_s = config.frame_len_s;
  clip.values.resize(rows * config.n_mels);
  std::vector<double> power(bins);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < bins; ++k) power[k] = mag[r * bins + k] * mag[r * bins + k];
    for (std::size_t j = 0; j < config.n_mels; ++j) {
      double e = 0.0;
      const double* row = fb.data() + j * bins;
      for (std::size_t k = 0; k < bins; ++k) e += row[k] * power[k];
      clip.at(r, j) = static_cast<float>(std::log(e + config.log_floor));
    }
  }
  return clip;
}

}  // namespace mtlse::features
