// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "neubtf/btf/dataset.hpp"

namespace neubtf::btf {

// NBTF container, little-endian:
//   "NBTF" | version u16 = 1 | flags u16 (bit0: float16 payload) |
//   height u32 | width u32 | n_pairs u32 | texel_size_mm f32 |
//   n_pairs x {theta_cam, phi_cam, theta_light, phi_light} f32 |
//   payload [pair][row][col][r, g, b] as f16 or f32.
inline constexpr std::uint16_t kNbtfVersion = 1;
inline constexpr std::uint16_t kNbtfFlagFloat16 = 0x1;
inline constexpr std::size_t kNbtfHeaderBytes = 24;
inline constexpr std::size_t kNbtfPairRecordBytes = 16;

enum class PayloadPrecision { Float16, Float32 };

std::vector<std::uint8_t> encode_btf(const BtfDataset& dataset, PayloadPrecision precision = PayloadPrecision::Float16);
BtfDataset decode_btf(std::span<const std::uint8_t> bytes);

void save_btf(const BtfDataset& dataset, const std::filesystem::path& path,
              PayloadPrecision precision = PayloadPrecision::Float16);
BtfDataset load_btf(const std::filesystem::path& path);

std::size_t nbtf_file_size(int height, int width, std::size_t n_pairs, PayloadPrecision precision);

}  // namespace neubtf::btf
