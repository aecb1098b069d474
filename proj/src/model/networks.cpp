// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/networks.hpp"

#include "neubtf/common/error.hpp"
#include "neubtf/tensor/init.hpp"

namespace neubtf::model {

namespace nt = tensor;
using nt::Shape;

// ---- autoencoder -------------------------------------------------------------

Autoencoder::Conv Autoencoder::make_conv(const std::string& name, int in, int out, int kernel, int stride, int groups,
                                         Rng& rng) {
    Conv c;
    c.weight = params_.add(name + ".weight", nt::init_orthogonal({out, in / groups, kernel, kernel}, rng));
    c.bias = params_.add(name + ".bias", Tensor({out}));
    c.options = {.stride = stride, .padding = nt::Padding::Circular, .groups = groups};
    return c;
}

Autoencoder::Block Autoencoder::make_block(const std::string& name, int width, Rng& rng) {
    Block b;
    b.depthwise = make_conv(name + ".dw", width, width, config_.kernel_size, 1, width, rng);
    b.norm_gamma = params_.add(name + ".norm.gamma", Tensor({width}, 1.0f));
    b.norm_beta = params_.add(name + ".norm.beta", Tensor({width}));
    b.expand = make_conv(name + ".expand", width, width * config_.expansion, 1, 1, 1, rng);
    b.project = make_conv(name + ".project", width * config_.expansion, width, 1, 1, 1, rng);
    b.scale = params_.add(name + ".scale", Tensor({1, width, 1, 1}, config_.residual_scale));
    return b;
}

Autoencoder::Autoencoder(const AutoencoderConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    const auto& w = config_.widths;
    const int levels = config_.levels;
    stem_ = make_conv("stem", 3, w[0], 1, 1, 1, rng);
    for (int l = 0; l < levels; ++l) {
        const int next = w[std::min(l + 1, levels - 1)];
        encoder_.push_back(make_block("enc" + std::to_string(l), w[l], rng));
        down_dw_.push_back(make_conv("down" + std::to_string(l) + ".dw", w[l], w[l], config_.kernel_size, 2, w[l], rng));
        down_proj_.push_back(make_conv("down" + std::to_string(l) + ".proj", w[l], next, 1, 1, 1, rng));
    }
    const int deepest = w[levels - 1];
    bottleneck_ = make_block("bottleneck", deepest, rng);
    const int hidden = std::max(1, deepest / config_.attention_reduction);
    attn_hidden_ = make_conv("attention.hidden", deepest, hidden, 1, 1, 1, rng);
    attn_out_ = make_conv("attention.out", hidden, deepest, 1, 1, 1, rng);
    attn_spatial_ = make_conv("attention.spatial", 2, 1, config_.spatial_kernel, 1, 1, rng);
    int current = deepest;
    for (int l = levels - 1; l >= 0; --l) {
        up_proj_.push_back(make_conv("up" + std::to_string(l), current, w[l], 1, 1, 1, rng));
        skip_.push_back(make_conv("skip" + std::to_string(l), w[l], w[l], 1, 1, 1, rng));
        decoder_.push_back(make_block("dec" + std::to_string(l), w[l], rng));
        current = w[l];
    }
    head_ = make_conv("head", w[0], config_.latent_channels, 1, 1, 1, rng);
}

Tensor Autoencoder::block(const Block& b, const Tensor& x) const {
    auto y = b.depthwise(x);
    y = nt::layer_norm(y, b.norm_gamma, b.norm_beta);
    y = nt::gelu(b.expand(y));
    y = b.project(y);
    return nt::add(x, nt::mul(y, b.scale));
}

Tensor Autoencoder::attention(const Tensor& x) const {
    auto mlp = [&](const Tensor& pooled) { return attn_out_(nt::gelu(attn_hidden_(pooled))); };
    const auto channel = nt::sigmoid(nt::add(mlp(nt::reduce_mean(x, {2, 3})), mlp(nt::reduce_max(x, {2, 3}))));
    const auto y = nt::mul(x, channel);
    const auto stats = nt::concat<float>({nt::reduce_mean(y, {1}), nt::reduce_max(y, {1})}, 1);
    return nt::mul(y, nt::sigmoid(attn_spatial_(stats)));
}

Tensor Autoencoder::forward(const Tensor& guidance) const {
    if (guidance.rank() != 4 || guidance.dim(1) != 3) {
        throw DimensionError("autoencoder input must be N x 3 x H x W, got " + nt::to_string(guidance.shape()));
    }
    const int s = config_.stride();
    if (guidance.dim(2) % s != 0 || guidance.dim(3) % s != 0) {
        throw DimensionError("guidance extent " + std::to_string(guidance.dim(2)) + "x" +
                             std::to_string(guidance.dim(3)) + " must be a multiple of " + std::to_string(s));
    }
    auto x = stem_(guidance);
    std::vector<Tensor> skips;
    for (int l = 0; l < config_.levels; ++l) {
        x = block(encoder_[l], x);
        skips.push_back(x);
        x = down_proj_[l](down_dw_[l](x));
    }
    x = attention(block(bottleneck_, x));
    for (int i = 0; i < config_.levels; ++i) {
        const int l = config_.levels - 1 - i;
        x = nt::upsample_nearest(up_proj_[i](x), 2);
        x = nt::add(x, skip_[i](skips[l]));
        x = block(decoder_[i], x);
    }
    return head_(x);
}

// ---- renderer ------------------------------------------------------------------

RendererMlp::RendererMlp(const RendererConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    int in = config_.input_channels();
    for (int i = 0; i < config_.hidden_layers; ++i) {
        const std::string name = "layer" + std::to_string(i);
        Layer l;
        l.weight = params_.add(name + ".weight", nt::init_siren({config_.width, in, 1, 1}, i, in, config_.omega0, rng));
        l.bias = params_.add(name + ".bias", Tensor({config_.width}));
        // Unit frequency at initialization: sin(omega0 * gamma * x) with gamma = 1 / omega0.
        l.gamma = params_.add("norm" + std::to_string(i) + ".gamma", Tensor({config_.width}, 1.0f / config_.omega0));
        l.beta = params_.add("norm" + std::to_string(i) + ".beta", Tensor({config_.width}));
        hidden_.push_back(l);
        in = config_.width;
    }
    out_weight_ = params_.add("output.weight",
                              nt::init_siren({3, in, 1, 1}, config_.hidden_layers, in, config_.omega0, rng));
    out_bias_ = params_.add("output.bias", Tensor({3}));
}

Tensor RendererMlp::forward(const Tensor& input) const {
    if (input.rank() != 4 || input.dim(1) != config_.input_channels()) {
        throw DimensionError("renderer input must be N x " + std::to_string(config_.input_channels()) +
                             " x H x W, got " + nt::to_string(input.shape()));
    }
    Tensor x = input;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
        const auto& l = hidden_[i];
        auto h = nt::conv2d(x, l.weight, l.bias);
        h = nt::sine(nt::layer_norm(h, l.gamma, l.beta), config_.omega0);
        x = (i > 0) ? nt::add(h, x) : h;
    }
    return nt::conv2d(x, out_weight_, out_bias_);
}

Tensor RendererMlp::forward(const Tensor& latent, std::span<const btf::DirectionPair> pairs) const {
    if (latent.rank() != 4 || static_cast<std::size_t>(latent.dim(0)) != pairs.size()) {
        throw DimensionError("renderer needs one direction pair per latent batch item");
    }
    const auto planes = direction_planes(pairs, latent.dim(2), latent.dim(3));
    return forward(nt::concat<float>({latent, planes}, 1));
}

Tensor direction_planes(std::span<const btf::DirectionPair> pairs, int height, int width) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    Tensor out({static_cast<int>(pairs.size()), 4, height, width});
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto cam = btf::direction_to_projected(pairs[n].camera);
        const auto light = btf::direction_to_projected(pairs[n].light);
        const float values[4] = {cam[0], cam[1], light[0], light[1]};
        for (int c = 0; c < 4; ++c) {
            float* p = out.raw() + (n * 4 + c) * plane;
            std::fill(p, p + plane, values[c]);
        }
    }
    return out;
}

std::size_t count_parameters(const Autoencoder& net) { return net.parameters().count(); }
std::size_t count_parameters(const RendererMlp& net) { return net.parameters().count(); }

}  // namespace neubtf::model
