// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/model.hpp"

#include <algorithm>

#include "neubtf/common/error.hpp"

namespace neubtf::model {

namespace nt = tensor;

namespace {

std::vector<NamedTensor> prefixed(const ParameterSet& set, const std::string& prefix) {
    std::vector<NamedTensor> out;
    for (const auto& e : set.entries()) out.push_back({prefix + e.name, e.value});
    return out;
}

}  // namespace

Model::Model(const ModelConfig& config, std::uint64_t seed)
    : Model(config, Rng(mix_seed(seed, 1)), Rng(mix_seed(seed, 2))) {}

Model::Model(const ModelConfig& config, Rng&& autoencoder_rng, Rng&& renderer_rng)
    : config_(config),
      autoencoder_(config.autoencoder, autoencoder_rng),
      renderer_(config.renderer, renderer_rng) {
    config_.validate();
}

std::vector<NamedTensor> Model::named_parameters() const {
    auto out = prefixed(autoencoder_.parameters(), "autoencoder.");
    auto r = prefixed(renderer_.parameters(), "renderer.");
    out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<Tensor> Model::parameters() const {
    std::vector<Tensor> out;
    for (auto& e : named_parameters()) out.push_back(e.value);
    return out;
}

Tensor image_to_tensor(const Image& image) { return images_to_batch(std::span<const Image>(&image, 1)); }

Tensor images_to_batch(std::span<const Image> images) {
    if (images.empty()) throw DimensionError("cannot batch zero images");
    const int h = images[0].height(), w = images[0].width(), c = images[0].channels();
    Tensor out({static_cast<int>(images.size()), c, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto& img = images[n];
        if (img.height() != h || img.width() != w || img.channels() != c) {
            throw DimensionError("batched images must share extents");
        }
        const float* src = img.pixels().data();
        float* dst = out.raw() + n * c * plane;
        for (std::size_t p = 0; p < plane; ++p)
            for (int ch = 0; ch < c; ++ch) dst[ch * plane + p] = src[p * c + ch];
    }
    return out;
}

Image tensor_to_image(const Tensor& t, int n) {
    if (t.rank() != 4 || n < 0 || n >= t.dim(0)) throw DimensionError("tensor_to_image expects N x C x H x W");
    const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    Image out(h, w, c);
    const float* src = t.raw() + static_cast<std::size_t>(n) * c * plane;
    float* dst = out.pixels().data();
    for (std::size_t p = 0; p < plane; ++p)
        for (int ch = 0; ch < c; ++ch) dst[p * c + ch] = src[ch * plane + p];
    return out;
}

NeuralTexture encode(const Autoencoder& net, const Image& guidance) {
    if (guidance.channels() != 3) throw DimensionError("guidance must have 3 channels");
    return NeuralTexture(net.forward(image_to_tensor(guidance)));
}

std::vector<Rgb> render_points(const RendererMlp& net, std::span<const float> latents,
                               std::span<const btf::DirectionPair> pairs) {
    const int d = net.config().latent_channels;
    const std::size_t n = pairs.size();
    if (latents.size() != n * d) {
        throw DimensionError("render_points: expected " + std::to_string(n) + " latents of length " +
                             std::to_string(d) + ", got " + std::to_string(latents.size()) + " values");
    }
    // Samples become the width axis of a 1 x (D + 4) x 1 x N image.
    Tensor input({1, d + 4, 1, static_cast<int>(n)});
    float* p = input.raw();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) p[c * n + i] = latents[i * d + c];
        const auto cam = btf::direction_to_projected(pairs[i].camera);
        const auto light = btf::direction_to_projected(pairs[i].light);
        p[(d + 0) * n + i] = cam[0];
        p[(d + 1) * n + i] = cam[1];
        p[(d + 2) * n + i] = light[0];
        p[(d + 3) * n + i] = light[1];
    }
    const auto out = net.forward(input);
    std::vector<Rgb> rgb(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) rgb[i][c] = std::max(0.0f, out.data()[c * n + i]);
    return rgb;
}

Rgb render_point(const RendererMlp& net, std::span<const float> latent, const btf::Direction& camera,
                 const btf::Direction& light) {
    const btf::DirectionPair pair{camera, light};
    return render_points(net, latent, std::span<const btf::DirectionPair>(&pair, 1))[0];
}

btf::BtfSlice render_slice(const RendererMlp& net, const NeuralTexture& texture, const btf::DirectionPair& pair) {
    if (texture.depth() != net.config().latent_channels) {
        throw DimensionError("texture depth " + std::to_string(texture.depth()) + " does not match renderer latent " +
                             std::to_string(net.config().latent_channels));
    }
    auto out = tensor_to_image(net.forward(texture.tensor(), std::span<const btf::DirectionPair>(&pair, 1)));
    for (float& v : out.pixels()) v = std::max(0.0f, v);
    return out;
}

}  // namespace neubtf::model
