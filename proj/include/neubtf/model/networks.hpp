// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>

#include "neubtf/btf/direction.hpp"
#include "neubtf/common/rng.hpp"
#include "neubtf/model/config.hpp"
#include "neubtf/model/parameters.hpp"
#include "neubtf/tensor/ops.hpp"

namespace neubtf::model {

/// Fully-convolutional U-Net mapping an N x 3 x H x W guidance batch
/// (values in [0, 1]) to an N x D x H x W latent field. All convolutions
/// pad circularly, so the map commutes with cyclic shifts by multiples of
/// the total stride.
class Autoencoder {
public:
    Autoencoder(const AutoencoderConfig& config, Rng& rng);

    const AutoencoderConfig& config() const { return config_; }
    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }

    /// Differentiable when a tape is active. Throws DimensionError when H or
    /// W is not a multiple of stride().
    Tensor forward(const Tensor& guidance) const;

    struct Conv {
        Tensor weight, bias;
        tensor::Conv2dOptions options;
        Tensor operator()(const Tensor& x) const { return tensor::conv2d(x, weight, bias, options); }
    };
    struct Block {
        Conv depthwise;
        Tensor norm_gamma, norm_beta;
        Conv expand, project;
        Tensor scale;
    };

private:
    Conv make_conv(const std::string& name, int in, int out, int kernel, int stride, int groups, Rng& rng);
    Block make_block(const std::string& name, int width, Rng& rng);
    Tensor block(const Block& b, const Tensor& x) const;
    Tensor attention(const Tensor& x) const;

    AutoencoderConfig config_;
    ParameterSet params_;
    Conv stem_, head_;
    std::vector<Block> encoder_, decoder_;
    std::vector<Conv> down_dw_, down_proj_, up_proj_, skip_;
    Block bottleneck_;
    Conv attn_hidden_, attn_out_, attn_spatial_;
};

/// Pointwise SIREN-style decoder: (latent, projected camera, projected light)
/// -> RGB. Hidden layers are 1 x 1 convolutions followed by layer norm and
/// sin(omega0 x), with identity residuals between equal-width layers.
class RendererMlp {
public:
    RendererMlp(const RendererConfig& config, Rng& rng);

    const RendererConfig& config() const { return config_; }
    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }

    /// N x (D + 4) x H x W -> N x 3 x H x W, unclamped.
    Tensor forward(const Tensor& input) const;
    /// Concatenates `latent` (N x D x H x W) with per-item direction planes.
    Tensor forward(const Tensor& latent, std::span<const btf::DirectionPair> pairs) const;

private:
    struct Layer {
        Tensor weight, bias, gamma, beta;
    };
    RendererConfig config_;
    ParameterSet params_;
    std::vector<Layer> hidden_;
    Tensor out_weight_, out_bias_;
};

/// N x 4 x H x W constant planes (cam x, cam y, light x, light y) per item.
Tensor direction_planes(std::span<const btf::DirectionPair> pairs, int height, int width);

std::size_t count_parameters(const Autoencoder& net);
std::size_t count_parameters(const RendererMlp& net);

}  // namespace neubtf::model
