// SPDX-License-Identifier: Apache-2.0
#include "neubtf/propagate/nbtx_io.hpp"

#include <cmath>

#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/model/checkpoint.hpp"

namespace neubtf::propagate {

namespace {

constexpr const char* kOmegaName = "renderer.omega0";
constexpr float kHalfMax = 65504.0f;

std::vector<model::NamedTensor> renderer_records(const model::RendererMlp& renderer, const tensor::Tensor& omega) {
    std::vector<model::NamedTensor> records{{kOmegaName, omega}};
    for (const auto& e : renderer.parameters().entries()) records.push_back({"renderer." + e.name, e.value});
    return records;
}

/// Reads the record count, omega0, and the first layer's shape without
/// consuming `in`, and derives the renderer configuration.
model::RendererConfig probe_renderer_config(ByteReader in, int latent_channels) {
    model::RendererConfig config;
    config.latent_channels = latent_channels;
    const auto count_at = in.offset();
    const auto count = in.get<std::uint32_t>("tensor count");
    if (count < 3 || (count - 3) % 4 != 0) in.fail_at("tensor count " + std::to_string(count) + " is not a renderer", count_at);
    if ((count - 3) / 4 > 64) in.fail_at("implausible renderer depth", count_at);
    config.hidden_layers = static_cast<int>((count - 3) / 4);
    const auto omega_at = in.offset();
    const auto name_len = in.get<std::uint16_t>("tensor name length");
    if (in.get_string(name_len, "tensor name") != kOmegaName || in.get<std::uint8_t>("tensor rank") != 0) {
        in.fail_at(std::string("expected rank-0 `") + kOmegaName + "` first", omega_at);
    }
    config.omega0 = in.get<float>("omega0");
    if (!(config.omega0 > 0.0f) || !std::isfinite(config.omega0)) in.fail_at("omega0 must be positive", omega_at);
    if (config.hidden_layers > 0) {
        const auto len = in.get<std::uint16_t>("tensor name length");
        in.get_string(len, "tensor name");
        const auto rank_at = in.offset();
        if (in.get<std::uint8_t>("tensor rank") != 4) in.fail_at("first renderer layer must be rank 4", rank_at);
        const auto width = in.get<std::uint32_t>("tensor extent");
        if (width == 0 || width > 4096) in.fail_at("implausible renderer width", rank_at + 1);
        config.width = static_cast<int>(width);
    }
    return config;
}

}  // namespace

std::vector<std::uint8_t> encode_neural_btf(const NeuralBtf& btf, PayloadPrecision precision) {
    const bool half = precision == PayloadPrecision::Float16;
    const auto& tex = btf.texture();
    ByteWriter w;
    w.put_bytes("NBTX");
    w.put<std::uint16_t>(kNbtxVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tex.height()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tex.width()));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(tex.depth()));
    w.put<float>(btf.texel_size_mm());
    w.put<std::uint16_t>(half ? kNbtxFlagFloat16 : 0);
    for (int y = 0; y < tex.height(); ++y)
        for (int x = 0; x < tex.width(); ++x)
            for (int c = 0; c < tex.depth(); ++c) {
                const float v = tex.at(y, x, c);
                if (half) {
                    if (std::abs(v) > kHalfMax) throw ValidationError("latent exceeds the float16 range; export as float32");
                    w.put<std::uint16_t>(float_to_half(v));
                } else {
                    w.put<float>(v);
                }
            }
    model::write_tensors(w, renderer_records(btf.renderer(), tensor::Tensor::scalar(btf.renderer().config().omega0)));
    return w.bytes();
}

NeuralBtf decode_neural_btf(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "NBTX");
    if (r.get_string(4, "magic") != "NBTX") r.fail_at("bad magic, expected \"NBTX\"", 0);
    const auto version_at = r.offset();
    if (const auto v = r.get<std::uint16_t>("version"); v != kNbtxVersion) {
        r.fail_at("unsupported version " + std::to_string(v), version_at);
    }
    const auto dims_at = r.offset();
    const auto height = r.get<std::uint32_t>("height");
    const auto width = r.get<std::uint32_t>("width");
    const auto depth = r.get<std::uint16_t>("depth");
    if (height == 0 || width == 0 || depth == 0) r.fail_at("zero texture extent", dims_at);
    if (height > (1u << 16) || width > (1u << 16)) r.fail_at("implausible texture extent", dims_at);
    const auto texel_at = r.offset();
    const float texel_size = r.get<float>("texel_size_mm");
    if (!(texel_size > 0.0f) || !std::isfinite(texel_size)) r.fail_at("texel size must be positive", texel_at);
    const auto flags_at = r.offset();
    const auto flags = r.get<std::uint16_t>("flags");
    if (flags & ~kNbtxFlagFloat16) r.fail_at("unknown flag bits " + std::to_string(flags), flags_at);
    const bool half = flags & kNbtxFlagFloat16;

    const std::size_t count = static_cast<std::size_t>(height) * width * depth;
    if (r.remaining() < count * (half ? 2 : 4)) r.fail("truncated texture payload");
    model::NeuralTexture texture(static_cast<int>(height), static_cast<int>(width), depth);
    const auto payload_at = r.offset();
    for (std::uint32_t y = 0; y < height; ++y)
        for (std::uint32_t x = 0; x < width; ++x)
            for (int c = 0; c < depth; ++c) {
                const float v = half ? half_to_float(r.get<std::uint16_t>("texture")) : r.get<float>("texture");
                if (!std::isfinite(v)) r.fail_at("texture holds non-finite values", payload_at);
                texture.at(static_cast<int>(y), static_cast<int>(x), c) = v;
            }

    const auto renderer_at = r.offset();
    const auto config = probe_renderer_config(r, depth);
    Rng unused(0);
    std::unique_ptr<model::RendererMlp> renderer;
    try {
        renderer = std::make_unique<model::RendererMlp>(config, unused);
    } catch (const ConfigError& e) {
        r.fail_at(std::string("invalid renderer: ") + e.what(), renderer_at);
    }
    tensor::Tensor omega = tensor::Tensor::scalar(config.omega0);
    model::read_tensors_into(r, renderer_records(*renderer, omega));
    if (r.remaining() != 0) r.fail("trailing bytes after renderer");
    return NeuralBtf(std::move(texture), *renderer, texel_size);
}

void export_neural_btf(const NeuralBtf& btf, const std::filesystem::path& path, PayloadPrecision precision) {
    write_file_bytes(path, encode_neural_btf(btf, precision));
}

NeuralBtf import_neural_btf(const std::filesystem::path& path) { return decode_neural_btf(read_file_bytes(path)); }

}  // namespace neubtf::propagate
