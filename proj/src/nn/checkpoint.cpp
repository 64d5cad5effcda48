#include "mtlse/nn/checkpoint.hpp"

#include "mtlse/detail/binary_io.hpp"
#include "mtlse/errors.hpp"

namespace mtlse::nn {

std::string encode_checkpoint(std::span<const NamedTensor> entries) {
  detail::ByteWriter w;
  w.bytes("MTLW");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name);
    w.u32(static_cast<std::uint32_t>(e.tensor.rank()));
    for (std::size_t d : e.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : e.tensor.values()) w.f64(v);
  }
  return w.str();
}

std::vector<NamedTensor> decode_checkpoint(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (r.bytes(4) != "MTLW") throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    const std::uint32_t len = r.u32();
    e.name = std::string(r.bytes(len));
    const std::uint32_t rank = r.u32();
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    const std::size_t n = shape_size(shape);
    if (r.remaining() / 8 < n) throw FormatError("checkpoint: truncated values for " + e.name);
    std::vector<double> values(n);
    for (auto& v : values) v = r.f64();
    e.tensor = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  return out;
}

void save_checkpoint(const std::string& path, std::span<const NamedTensor> entries) {
  detail::write_file(path, encode_checkpoint(entries));
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) { return decode_checkpoint(detail::read_file(path)); }

}  // namespace mtlse::nn
