#include "mtlse/features/io.hpp"

#include <algorithm>
#include <cmath>

#include "mtlse/detail/binary_io.hpp"
#include "mtlse/errors.hpp"

namespace mtlse::features {

std::string encode_feature_file(const FeatureClip& clip) {
  if (clip.values.size() != clip.frames * clip.bins) throw ShapeError("feature clip value count mismatch");
  detail::ByteWriter w;
  w.bytes("LMEL");
  w.u32(static_cast<std::uint32_t>(clip.frames));
  w.u32(static_cast<std::uint32_t>(clip.bins));
  for (float v : clip.values) w.f32(v);
  return w.str();
}

FeatureClip decode_feature_file(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 12 || r.bytes(4) != "LMEL") throw FormatError("feature file: bad magic or header");
  FeatureClip clip;
  clip.frames = r.u32();
  clip.bins = r.u32();
  const std::size_t expected = clip.frames * clip.bins;
  if (r.remaining() != expected * 4) {
    throw FormatError("feature file: header declares " + std::to_string(clip.frames) + "x" +
                      std::to_string(clip.bins) + " but payload holds " + std::to_string(r.remaining() / 4) +
                      " values");
  }
  clip.values.resize(expected);
  for (auto& v : clip.values) v = r.f32();
  return clip;
}

void save_feature_file(const std::string& path, const FeatureClip& clip) {
  detail::write_file(path, encode_feature_file(clip));
}

FeatureClip load_feature_file(const std::string& path) { return decode_feature_file(detail::read_file(path)); }

Waveform decode_wav(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 12 || r.bytes(4) != "RIFF") throw FormatError("wav: missing RIFF header");
  r.u32();
  if (r.bytes(4) != "WAVE") throw FormatError("wav: missing WAVE tag");
  Waveform w;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const std::string id(r.bytes(4));
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("wav: short fmt chunk");
      const std::string_view body = r.bytes(size);
      detail::ByteReader f{body};
      const std::uint32_t format_and_channels = f.u32();
      const auto format = format_and_channels & 0xFFFFu;
      const auto channels = format_and_channels >> 16;
      w.sample_rate = f.u32();
      f.u32();  // byte rate
      const std::uint32_t align_and_bits = f.u32();
      const auto bits = align_and_bits >> 16;
      if (format != 1 || channels != 1 || bits != 16) {
        throw FormatError("wav: only 16-bit PCM mono is supported");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      const std::string_view body = r.bytes(std::min<std::size_t>(size, r.remaining()));
      w.samples.resize(body.size() / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto lo = static_cast<unsigned char>(body[2 * i]);
        const auto hi = static_cast<unsigned char>(body[2 * i + 1]);
        const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return w;
    } else {
      r.bytes(std::min<std::size_t>(size + (size % 2), r.remaining()));
    }
  }
  throw FormatError("wav: no data chunk");
}

std::string encode_wav_pcm16(const Waveform& w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  detail::ByteWriter out;
  out.bytes("RIFF");
  out.u32(36 + data_bytes);
  out.bytes("WAVE");
  out.bytes("fmt ");
  out.u32(16);
  out.u32(1u | (1u << 16));
  out.u32(w.sample_rate);
  out.u32(w.sample_rate * 2);
  out.u32(2u | (16u << 16));
  out.bytes("data");
  out.u32(data_bytes);
  std::string body;
  body.reserve(data_bytes);
  for (double s : w.samples) {
    const auto v = static_cast<std::int16_t>(std::clamp(std::lround(s * 32768.0), -32768L, 32767L));
    const auto u = static_cast<std::uint16_t>(v);
    body.push_back(static_cast<char>(u & 0xFF));
    body.push_back(static_cast<char>(u >> 8));
  }
  out.bytes(body);
  return out.str();
}

Waveform load_wav(const std::string& path) { return decode_wav(detail::read_file(path)); }

}  // namespace mtlse::features
