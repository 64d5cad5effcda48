#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include "mtlse/errors.hpp"
#include "mtlse/features/features.hpp"
#include "mtlse/features/io.hpp"

using namespace mtlse;
using namespace mtlse::features;

namespace {

constexpr double kFloor = 1e-10;

// Direct O(n^2) DFT magnitude of one zero-padded, windowed frame.
std::vector<double> naive_dft_magnitude(const std::vector<double>& samples, std::size_t start, std::size_t frame,
                                        std::size_t n_fft, bool hamming) {
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < frame; ++n) {
      const double x = start + n < samples.size() ? samples[start + n] : 0.0;
      const double w = hamming ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / frame) : 1.0;
      acc += x * w * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / n_fft);
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

double mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

Waveform white_noise(std::size_t n, unsigned sr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  Waveform w{std::vector<double>(n), sr};
  for (auto& s : w.samples) s = g(rng);
  return w;
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mtlse_features_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Stft, DcSignalConcentratesInBinZero) {
  Waveform w{std::vector<double>(1600, 1.0), 16000};
  const Tensor mag = stft_magnitude(w, 0.04, 0.02, Window::Rectangular);
  const std::size_t bins = mag.dim(1);
  // The zero-padded tail frames still peak at DC.
  for (std::size_t r = 0; r < mag.dim(0); ++r) {
    for (std::size_t k = 1; k < bins; ++k) EXPECT_LT(mag[r * bins + k], mag[r * bins]);
  }
  EXPECT_NEAR(mag[0], 640.0, 1e-9);
  for (std::size_t k = 1; k < bins; ++k) EXPECT_NEAR(mag[k], 0.0, 1e-9);
}

TEST(Stft, ZeroSignalGivesZeroMagnitude) {
  Waveform w{std::vector<double>(4000, 0.0), 8000};
  const Tensor mag = stft_magnitude(w, 0.04, 0.02);
  for (double v : mag.values()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, SinePeaksAtItsBinAndMatchesNaiveDft) {
  const unsigned sr = 8000;
  const std::size_t frame = 320, k0 = 17;
  const double f0 = static_cast<double>(k0) * sr / frame;
  Waveform w{std::vector<double>(3200), sr};
  for (std::size_t n = 0; n < w.samples.size(); ++n) w.samples[n] = std::sin(2.0 * std::numbers::pi * f0 * n / sr);
  const Tensor mag = stft_magnitude(w, 0.04, 0.02, Window::Rectangular);
  const std::size_t bins = mag.dim(1);
  for (std::size_t r = 0; r < mag.dim(0); ++r) {
    const auto oracle = naive_dft_magnitude(w.samples, r * 160, frame, frame, false);
    for (std::size_t k = 0; k < bins; ++k) EXPECT_NEAR(mag[r * bins + k], oracle[k], 1e-8);
    if ((r + 2) * 160 <= w.samples.size()) {
      const double* row = mag.data() + r * bins;
      EXPECT_EQ(static_cast<std::size_t>(std::max_element(row, row + bins) - row), k0);
    }
  }
}

TEST(Stft, HammingFramesMatchNaiveDft) {
  const auto w = white_noise(2205, 22050, 3);
  const Tensor mag = stft_magnitude(w, 0.04, 0.02);
  const std::size_t frame = 882, n_fft = dft_size(0.04, 22050), bins = mag.dim(1);
  ASSERT_EQ(n_fft, 882u);
  ASSERT_EQ(bins, n_fft / 2 + 1);
  for (std::size_t r = 0; r < mag.dim(0); ++r) {
    const auto oracle = naive_dft_magnitude(w.samples, r * 441, frame, n_fft, true);
    for (std::size_t k = 0; k < bins; ++k) EXPECT_NEAR(mag[r * bins + k], oracle[k], 1e-9);
  }
}

TEST(Stft, OddFrameLengthIsPaddedToEvenDftSize) {
  EXPECT_EQ(dft_size(0.04, 44100), 1764u);
  EXPECT_EQ(dft_size(0.04, 11025), 442u);  // 441 samples
}

TEST(Stft, ShorterThanOneFrameThrows) {
  Waveform w{std::vector<double>(100, 0.0), 16000};
  EXPECT_THROW(stft_magnitude(w, 0.04, 0.02), InputTooShort);
}

TEST(Stft, FrameCountPadsToWholeHops) {
  EXPECT_EQ(frame_count(441000, 1764, 882), 500u);
  EXPECT_EQ(frame_count(160000, 640, 320), 500u);
  EXPECT_EQ(frame_count(640, 640, 320), 2u);
  EXPECT_THROW(frame_count(639, 640, 320), InputTooShort);
}

TEST(MelFilterbank, SingleFilterSpansBand) {
  const Tensor fb = mel_filterbank(257, 1, 16000);
  double sum = 0.0;
  std::size_t positive = 0;
  for (double v : fb.values()) {
    EXPECT_GE(v, 0.0);
    sum += v;
    positive += v > 0.0;
  }
  EXPECT_GT(sum, 0.0);
  EXPECT_GT(positive, 200u);
}

TEST(MelFilterbank, DefaultHas64IncreasingTriangles) {
  const std::size_t bins = dft_size(0.04, 44100) / 2 + 1;
  const Tensor fb = mel_filterbank(bins, 64, 44100);
  ASSERT_EQ(fb.shape(), (Shape{64, bins}));
  double prev_peak = -1.0;
  for (std::size_t j = 0; j < 64; ++j) {
    const double* row = fb.data() + j * bins;
    const auto peak = static_cast<double>(std::max_element(row, row + bins) - row);
    EXPECT_GT(*std::max_element(row, row + bins), 0.0);
    EXPECT_GE(peak, prev_peak);
    prev_peak = peak;
    // Triangular: nondecreasing up to the peak, nonincreasing after.
    const auto p = static_cast<std::size_t>(peak);
    for (std::size_t k = 1; k <= p; ++k) EXPECT_LE(row[k - 1], row[k]);
    for (std::size_t k = p + 1; k < bins; ++k) EXPECT_LE(row[k], row[k - 1]);
  }
  const auto centers = mel_center_frequencies(64, 44100);
  for (std::size_t j = 1; j < centers.size(); ++j) EXPECT_GT(centers[j], centers[j - 1]);
}

TEST(MelFilterbank, CentersMatchMelFormula) {
  for (unsigned sr : {8000u, 16000u, 44100u}) {
    const std::size_t n = 40;
    const auto centers = mel_center_frequencies(n, sr);
    const double top = mel(sr / 2.0);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(centers[j], inv_mel(top * (j + 1.0) / (n + 1.0)), 1e-9 * sr);
      EXPECT_NEAR(hz_to_mel(centers[j]), top * (j + 1.0) / (n + 1.0), 1e-9);
    }
  }
  EXPECT_NEAR(hz_to_mel(1000.0), 2595.0 * std::log10(1.0 + 1000.0 / 700.0), 1e-12);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(4321.0)), 4321.0, 1e-9);
}

TEST(MelFilterbank, TooManyFiltersIsDegenerate) {
  EXPECT_THROW(mel_filterbank(10, 11, 16000), FilterbankDegenerate);
  EXPECT_THROW(mel_filterbank(33, 32, 16000), FilterbankDegenerate);
  EXPECT_THROW(mel_filterbank(10, 0, 16000), FilterbankDegenerate);
}

TEST(LogMel, SilenceIsTheLogFloor) {
  Waveform w{std::vector<double>(441000, 0.0), 44100};
  const auto clip = extract_logmel(w);
  ASSERT_EQ(clip.frames, 500u);
  ASSERT_EQ(clip.bins, 64u);
  for (float v : clip.values) EXPECT_EQ(v, static_cast<float>(std::log(kFloor)));
}

TEST(LogMel, TenSecondsGive500By64) {
  for (unsigned sr : {16000u, 22050u, 44100u, 48000u}) {
    const auto clip = extract_logmel(white_noise(10 * sr, sr, sr));
    EXPECT_EQ(clip.frames, 500u) << sr;
    EXPECT_EQ(clip.bins, 64u) << sr;
    for (float v : clip.values) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(LogMel, NoiseMatchesNaiveOracleChain) {
  const unsigned sr = 8000;
  const auto w = white_noise(2000, sr, 11);
  FrontEndConfig cfg;
  cfg.n_mels = 24;
  const auto clip = extract_logmel(w, cfg);
  const std::size_t frame = 320, hop = 160, n_fft = 320, bins = n_fft / 2 + 1;

  // Independent filterbank from the mel formula.
  const double top = mel(sr / 2.0);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = inv_mel(top * i / (cfg.n_mels + 1.0));
  auto weight = [&](std::size_t j, std::size_t k) {
    const double f = k * (sr / 2.0) / (bins - 1);
    if (f > edges[j] && f <= edges[j + 1]) return (f - edges[j]) / (edges[j + 1] - edges[j]);
    if (f > edges[j + 1] && f < edges[j + 2]) return (edges[j + 2] - f) / (edges[j + 2] - edges[j + 1]);
    return 0.0;
  };

  double oracle_mean = 0.0, mean = 0.0;
  for (std::size_t r = 0; r < clip.frames; ++r) {
    const auto mag = naive_dft_magnitude(w.samples, r * hop, frame, n_fft, true);
    for (std::size_t j = 0; j < cfg.n_mels; ++j) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += weight(j, k) * mag[k] * mag[k];
      const double expected = std::log(e + kFloor);
      EXPECT_NEAR(clip.at(r, j), expected, 1e-5 * std::max(1.0, std::abs(expected)));
      oracle_mean += expected;
      mean += clip.at(r, j);
    }
  }
  EXPECT_NEAR(mean, oracle_mean, 1e-4 * std::abs(oracle_mean));
}

TEST(LogMel, ScalingUpNeverDecreasesEnergy) {
  const auto w = white_noise(16000, 16000, 5);
  const auto base = extract_logmel(w);
  for (double c : {1.01, 2.0, 10.0}) {
    Waveform s = w;
    for (auto& v : s.samples) v *= c;
    const auto scaled = extract_logmel(s);
    for (std::size_t i = 0; i < base.values.size(); ++i) ASSERT_GE(scaled.values[i], base.values[i]);
  }
}

TEST(LogMel, DeterministicBytes) {
  const auto w = white_noise(16000, 16000, 9);
  EXPECT_EQ(encode_feature_file(extract_logmel(w)), encode_feature_file(extract_logmel(w)));
}

TEST(LogMel, TooShortPropagates) {
  EXPECT_THROW(extract_logmel(Waveform{std::vector<double>(10, 0.0), 44100}), InputTooShort);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 3.0f);
  FeatureClip clip;
  clip.frames = 500;
  clip.bins = 64;
  clip.values.resize(500 * 64);
  for (auto& v : clip.values) v = g(rng);
  const auto path = temp_file("roundtrip.lmel");
  save_feature_file(path.string(), clip);
  const auto back = load_feature_file(path.string());
  EXPECT_EQ(back.frames, 500u);
  EXPECT_EQ(back.bins, 64u);
  ASSERT_EQ(back.values.size(), clip.values.size());
  EXPECT_EQ(std::memcmp(back.values.data(), clip.values.data(), clip.values.size() * sizeof(float)), 0);
}

TEST(FeatureFile, ShortPayloadIsFormatError) {
  FeatureClip clip;
  clip.frames = 2;
  clip.bins = 63;
  clip.values.assign(2 * 63, 1.0f);
  std::string bytes = encode_feature_file(clip);
  bytes[8] = 64;  // header now claims 64 bins
  EXPECT_THROW(decode_feature_file(bytes), FormatError);
  EXPECT_THROW(decode_feature_file("LMEX" + bytes.substr(4)), FormatError);
  EXPECT_THROW(decode_feature_file("LM"), FormatError);
}

TEST(FeatureFile, SilenceFileHoldsLogFloor) {
  const auto clip = extract_logmel(Waveform{std::vector<double>(16000, 0.0), 16000});
  const auto path = temp_file("silence.lmel");
  save_feature_file(path.string(), clip);
  for (float v : load_feature_file(path.string()).values) EXPECT_EQ(v, static_cast<float>(std::log(kFloor)));
}

TEST(Wav, Pcm16RoundTrip) {
  Waveform w{{0.0, 0.5, -0.5, 0.25, -1.0}, 16000};
  const auto back = decode_wav(encode_wav_pcm16(w));
  EXPECT_EQ(back.sample_rate, 16000u);
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32768.0);
  EXPECT_THROW(decode_wav("RIFF"), FormatError);
}
