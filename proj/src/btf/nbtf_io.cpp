// SPDX-License-Identifier: Apache-2.0
#include "neubtf/btf/nbtf_io.hpp"

#include <cmath>

#include "neubtf/common/binary_io.hpp"

namespace neubtf::btf {

namespace {
constexpr float kHalfMax = 65504.0f;
}

std::size_t nbtf_file_size(int height, int width, std::size_t n_pairs, PayloadPrecision precision) {
    const std::size_t scalar = precision == PayloadPrecision::Float16 ? 2 : 4;
    return kNbtfHeaderBytes + n_pairs * kNbtfPairRecordBytes +
           n_pairs * static_cast<std::size_t>(height) * width * 3 * scalar;
}

std::vector<std::uint8_t> encode_btf(const BtfDataset& dataset, PayloadPrecision precision) {
    const bool half = precision == PayloadPrecision::Float16;
    ByteWriter w;
    w.put_bytes("NBTF");
    w.put<std::uint16_t>(kNbtfVersion);
    w.put<std::uint16_t>(half ? kNbtfFlagFloat16 : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.height()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.width()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.size()));
    w.put<float>(dataset.texel_size_mm());
    for (const auto& p : dataset.pairs()) {
        w.put<float>(p.camera.theta);
        w.put<float>(p.camera.phi);
        w.put<float>(p.light.theta);
        w.put<float>(p.light.phi);
    }
    for (const auto& s : dataset.slices()) {
        for (float v : s.pixels()) {
            if (half) {
                if (v > kHalfMax) throw ValidationError("radiance exceeds the float16 range; save with float32 payload");
                w.put<std::uint16_t>(float_to_half(v));
            } else {
                w.put<float>(v);
            }
        }
    }
    return w.bytes();
}

BtfDataset decode_btf(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "NBTF");
    if (r.get_string(4, "magic") != "NBTF") r.fail_at("bad magic, expected \"NBTF\"", 0);
    const auto version_at = r.offset();
    if (const auto version = r.get<std::uint16_t>("version"); version != kNbtfVersion) {
        r.fail_at("unsupported version " + std::to_string(version), version_at);
    }
    const auto flags_at = r.offset();
    const auto flags = r.get<std::uint16_t>("flags");
    if (flags & ~kNbtfFlagFloat16) r.fail_at("unknown flag bits " + std::to_string(flags), flags_at);
    const bool half = flags & kNbtfFlagFloat16;
    const auto dims_at = r.offset();
    const auto height = r.get<std::uint32_t>("height");
    const auto width = r.get<std::uint32_t>("width");
    const auto n_pairs = r.get<std::uint32_t>("n_pairs");
    if (height == 0 || width == 0 || n_pairs == 0) r.fail_at("zero extent or pair count", dims_at);
    if (height > (1u << 16) || width > (1u << 16)) r.fail_at("implausible extent", dims_at);
    const float texel_size = r.get<float>("texel_size_mm");

    const std::size_t texels = static_cast<std::size_t>(height) * width * 3;
    const std::size_t expected = n_pairs * (kNbtfPairRecordBytes + texels * (half ? 2 : 4));
    if (r.remaining() < expected) {
        r.fail("truncated: header declares " + std::to_string(expected) + " more bytes, " +
               std::to_string(r.remaining()) + " present");
    }
    if (r.remaining() > expected) r.fail_at("trailing bytes after payload", r.offset() + expected);

    std::vector<DirectionPair> pairs(n_pairs);
    for (auto& p : pairs) {
        p.camera.theta = r.get<float>("theta_cam");
        p.camera.phi = r.get<float>("phi_cam");
        p.light.theta = r.get<float>("theta_light");
        p.light.phi = r.get<float>("phi_light");
    }
    std::vector<BtfSlice> slices;
    slices.reserve(n_pairs);
    for (std::uint32_t i = 0; i < n_pairs; ++i) {
        std::vector<float> px(texels);
        for (auto& v : px) v = half ? half_to_float(r.get<std::uint16_t>("payload")) : r.get<float>("payload");
        slices.emplace_back(static_cast<int>(height), static_cast<int>(width), 3, std::move(px));
    }
    return BtfDataset(static_cast<int>(height), static_cast<int>(width), texel_size, std::move(pairs),
                      std::move(slices));
}

void save_btf(const BtfDataset& dataset, const std::filesystem::path& path, PayloadPrecision precision) {
    write_file_bytes(path, encode_btf(dataset, precision));
}

BtfDataset load_btf(const std::filesystem::path& path) { return decode_btf(read_file_bytes(path)); }

}  // namespace neubtf::btf
