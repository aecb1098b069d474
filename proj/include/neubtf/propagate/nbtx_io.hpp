// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "neubtf/btf/nbtf_io.hpp"
#include "neubtf/propagate/neural_btf.hpp"

namespace neubtf::propagate {

// NBTX container, little-endian:
//   "NBTX" | version u16 = 1 | H u32 | W u32 | D u16 | texel_size_mm f32 |
//   flags u16 (bit 0: float16 texture) | texture [row][col][channel] |
//   renderer as NBCK tensor records: a rank-0 `renderer.omega0`, then the
//   renderer parameters in order.
inline constexpr std::uint16_t kNbtxVersion = 1;
inline constexpr std::uint16_t kNbtxFlagFloat16 = 1;
inline constexpr std::size_t kNbtxHeaderBytes = 22;

using btf::PayloadPrecision;

std::vector<std::uint8_t> encode_neural_btf(const NeuralBtf& btf,
                                            PayloadPrecision precision = PayloadPrecision::Float16);
NeuralBtf decode_neural_btf(std::span<const std::uint8_t> bytes);

void export_neural_btf(const NeuralBtf& btf, const std::filesystem::path& path,
                       PayloadPrecision precision = PayloadPrecision::Float16);
NeuralBtf import_neural_btf(const std::filesystem::path& path);

}  // namespace neubtf::propagate
