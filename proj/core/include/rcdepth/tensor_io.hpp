#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rcdepth/tensor.hpp"

namespace rcdepth {

// .rcdt binary layout, all little-endian:
//   magic   4 bytes "RCDT"
//   version u16 == 1
//   rank    u16 (1-4)
//   dims    rank x u32
//   payload product(dims) x IEEE-754 binary64
// Version 1 carries 64-bit payloads only; round trips are bit-exact.

inline constexpr char kTensorMagic[4] = {'R', 'C', 'D', 'T'};
inline constexpr std::uint16_t kTensorFormatVersion = 1;
inline constexpr const char* kTensorFileExtension = ".rcdt";

std::vector<std::uint8_t> write_tensor(const Tensor& t);
Tensor read_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

}  // namespace rcdepth
