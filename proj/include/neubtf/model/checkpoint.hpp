// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neubtf/common/binary_io.hpp"
#include "neubtf/model/model.hpp"

namespace neubtf::model {

// NBCK container, little-endian:
//   "NBCK" | version u16 = 1 | config length u32 + UTF-8 config text |
//   tensor count u32 | per tensor: name length u16 + UTF-8 name, rank u8,
//   extents u32[rank], float32 payload.
inline constexpr std::uint16_t kNbckVersion = 1;

/// Training metadata stored in the config text next to the model keys. The
/// sampler's random streams are derived from (seed, step), so the pair is
/// the full RNG state.
struct CheckpointInfo {
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
    /// Additional `key = value` lines (for example the training config).
    std::string extra_config;
};

struct Checkpoint {
    std::unique_ptr<Model> model;
    CheckpointInfo info;
};

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const CheckpointInfo& info);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointInfo& info);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Tensor framing shared with other containers: count u32, then records.
void write_tensors(ByteWriter& out, const std::vector<NamedTensor>& tensors);
/// Reads `expected.size()` records into the matching tensors in place,
/// requiring identical names, order, and shapes.
void read_tensors_into(ByteReader& in, const std::vector<NamedTensor>& expected);

}  // namespace neubtf::model
