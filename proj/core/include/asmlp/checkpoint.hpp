#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "asmlp/tensor.hpp"

// Binary layout (all integers little-endian):
//   "ASMLPCK1" | u32 version | u32 tensor count
//   per tensor: u16 name length, UTF-8 name, u8 dtype (1 = f32, 2 = f64),
//               u8 rank, rank x u32 dims, raw row-major element bytes
//   u64 CRC-64/XZ of every preceding byte

namespace asmlp {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

using AnyTensor = std::variant<Tensor<float>, Tensor<double>>;

struct NamedTensor {
  std::string name;
  AnyTensor value;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::vector<NamedTensor> tensors;

  void put(std::string name, AnyTensor value);
  const AnyTensor* find(const std::string& name) const;
  /// Tensor `name` converted to T; throws CheckpointError when missing.
  template <std::floating_point T>
  Tensor<T> get(const std::string& name) const;
  /// Scalar stored as a one-element tensor.
  double scalar(const std::string& name) const;
  void put_scalar(std::string name, double v) { put(std::move(name), Tensor<double>::scalar(v)); }
};

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xor-out).
std::uint64_t crc64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace asmlp
