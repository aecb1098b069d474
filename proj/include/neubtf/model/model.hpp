// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include "neubtf/btf/dataset.hpp"
#include "neubtf/common/image.hpp"
#include "neubtf/model/networks.hpp"
#include "neubtf/model/texture.hpp"

namespace neubtf::model {

using Rgb = std::array<float, 3>;

/// Autoencoder and renderer trained together.
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    Autoencoder& autoencoder() { return autoencoder_; }
    const Autoencoder& autoencoder() const { return autoencoder_; }
    RendererMlp& renderer() { return renderer_; }
    const RendererMlp& renderer() const { return renderer_; }

    /// Every trainable tensor, autoencoder first, names prefixed by network.
    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;

private:
    Model(const ModelConfig& config, Rng&& autoencoder_rng, Rng&& renderer_rng);

    ModelConfig config_;
    Autoencoder autoencoder_;
    RendererMlp renderer_;
};

/// H x W x C image -> 1 x C x H x W tensor.
Tensor image_to_tensor(const Image& image);
/// Stacks same-sized images into N x C x H x W.
Tensor images_to_batch(std::span<const Image> images);
/// Item `n` of an N x C x H x W tensor as an H x W x C image.
Image tensor_to_image(const Tensor& t, int n = 0);

/// A(G): guidance (H x W x 3, H and W multiples of the stride) -> texture.
NeuralTexture encode(const Autoencoder& net, const Image& guidance);

/// R(latent, cam, light), clamped at zero.
Rgb render_point(const RendererMlp& net, std::span<const float> latent, const btf::Direction& camera,
                 const btf::Direction& light);
/// Batched render_point: latents holds N rows of D values, one pair per row.
std::vector<Rgb> render_points(const RendererMlp& net, std::span<const float> latents,
                               std::span<const btf::DirectionPair> pairs);
/// One fully-convolutional pass over the texture for a fixed pair, clamped at zero.
btf::BtfSlice render_slice(const RendererMlp& net, const NeuralTexture& texture, const btf::DirectionPair& pair);

}  // namespace neubtf::model
