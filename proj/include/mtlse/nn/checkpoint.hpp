#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtlse/tensor.hpp"

namespace mtlse::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout (little-endian): "MTLW", u32 version, u32 entry count, then per
/// entry: u32 name length, name bytes, u32 rank, rank x u32 dims, float64
/// values in row-major order.
std::string encode_checkpoint(std::span<const NamedTensor> entries);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, std::span<const NamedTensor> entries);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

}  // namespace mtlse::nn
