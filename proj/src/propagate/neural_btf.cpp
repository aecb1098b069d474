// SPDX-License-Identifier: Apache-2.0
#include "neubtf/propagate/neural_btf.hpp"

#include <algorithm>
#include <cmath>

#include "neubtf/common/error.hpp"
#include "neubtf/common/kv_config.hpp"

namespace neubtf::propagate {

std::unique_ptr<model::RendererMlp> clone_renderer(const model::RendererMlp& renderer) {
    Rng unused(0);
    auto copy = std::make_unique<model::RendererMlp>(renderer.config(), unused);
    const auto& src = renderer.parameters().entries();
    const auto& dst = copy->parameters().entries();
    for (std::size_t i = 0; i < src.size(); ++i) {
        tensor::Tensor d = dst[i].value;
        std::copy(src[i].value.data().begin(), src[i].value.data().end(), d.data().begin());
    }
    return copy;
}

NeuralBtf::NeuralBtf(model::NeuralTexture texture, const model::RendererMlp& renderer, float texel_size_mm)
    : texture_(std::move(texture)), renderer_(clone_renderer(renderer)), texel_size_mm_(texel_size_mm) {
    if (texture_.depth() != renderer.config().latent_channels) {
        throw DimensionError("texture depth " + std::to_string(texture_.depth()) + " does not match renderer latent " +
                             std::to_string(renderer.config().latent_channels));
    }
    if (!(texel_size_mm > 0.0f) || !std::isfinite(texel_size_mm)) {
        throw ValidationError("texel size must be positive and finite");
    }
}

model::Rgb NeuralBtf::query(double u, double v, const btf::Direction& camera, const btf::Direction& light) const {
    const int h = height(), w = width(), d = texture_.depth();
    const double x = (u - std::floor(u)) * w - 0.5;
    const double y = (v - std::floor(v)) * h - 0.5;
    const double fx0 = std::floor(x), fy0 = std::floor(y);
    const double fx = x - fx0, fy = y - fy0;
    auto wrap = [](long i, int n) { return static_cast<int>(((i % n) + n) % n); };
    const int x0 = wrap(static_cast<long>(fx0), w), x1 = wrap(static_cast<long>(fx0) + 1, w);
    const int y0 = wrap(static_cast<long>(fy0), h), y1 = wrap(static_cast<long>(fy0) + 1, h);
    std::vector<float> latent(d);
    for (int c = 0; c < d; ++c) {
        const double top = (1.0 - fx) * texture_.at(y0, x0, c) + fx * texture_.at(y0, x1, c);
        const double bottom = (1.0 - fx) * texture_.at(y1, x0, c) + fx * texture_.at(y1, x1, c);
        latent[c] = static_cast<float>((1.0 - fy) * top + fy * bottom);
    }
    return model::render_point(*renderer_, latent, camera, light);
}

btf::BtfSlice NeuralBtf::render(const btf::DirectionPair& pair) const {
    return model::render_slice(*renderer_, texture_, pair);
}

NeuralBtf propagate(const model::Model& model, const Image& guidance, float texel_size_mm) {
    return NeuralBtf(model::encode(model.autoencoder(), guidance), model.renderer(), texel_size_mm);
}

NeuralBtf make_tileable(const model::Model& model, const Image& tileable_guidance, float texel_size_mm) {
    return propagate(model, tileable_guidance, texel_size_mm);
}

double seam_metric(const NeuralBtf& btf, const btf::DirectionPair& pair) {
    const int dy = btf.height() / 2, dx = btf.width() / 2;
    const auto direct = btf.render(pair);
    const auto shifted =
        roll(model::render_slice(btf.renderer(), btf.texture().rolled(dy, dx), pair), -dy, -dx);
    double worst = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i)
        worst = std::max(worst, static_cast<double>(std::abs(direct.pixels()[i] - shifted.pixels()[i])));
    return worst;
}

MultiresResult make_multires(const model::Model& model, const Image& guidance, double scale,
                             double min_relative_scale, float texel_size_mm) {
    if (!(scale > 0.0) || scale > 1.0) throw DomainError("multi-resolution scale must lie in (0, 1]");
    const int stride = model.config().autoencoder.stride();
    std::vector<std::string> warnings;
    if (scale == 1.0) {
        return {propagate(model, guidance, texel_size_mm), std::move(warnings)};
    }
    const int h = static_cast<int>(std::lround(guidance.height() * scale));
    const int w = static_cast<int>(std::lround(guidance.width() * scale));
    if (h < stride || w < stride) {
        throw DimensionError("scale " + format_double(scale) + " gives a " + std::to_string(h) + "x" +
                             std::to_string(w) + " guidance, below one stride unit (" + std::to_string(stride) + ")");
    }
    if (h % stride != 0 || w % stride != 0) {
        throw DimensionError("scale " + format_double(scale) + " gives a " + std::to_string(h) + "x" +
                             std::to_string(w) + " guidance; both extents must be multiples of " +
                             std::to_string(stride));
    }
    if (scale < min_relative_scale) {
        warnings.push_back("scale " + format_double(scale) + " is below the smallest relative rescale seen in training (" +
                           format_double(min_relative_scale) + "); quality is not guaranteed");
    }
    const auto small = resample_area(guidance, h, w);
    return {propagate(model, small, static_cast<float>(texel_size_mm / scale)), std::move(warnings)};
}

}  // namespace neubtf::propagate
