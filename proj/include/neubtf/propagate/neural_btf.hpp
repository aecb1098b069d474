// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "neubtf/btf/dataset.hpp"
#include "neubtf/model/model.hpp"

namespace neubtf::propagate {

/// Deployable BTF: a neural texture plus its own copy of the renderer
/// weights, addressed with repeat wrapping. Immutable, so concurrent
/// queries are safe.
class NeuralBtf {
public:
    /// Deep-copies the renderer. Throws DimensionError when the texture
    /// depth differs from the renderer's latent width.
    NeuralBtf(model::NeuralTexture texture, const model::RendererMlp& renderer, float texel_size_mm = 0.1f);

    const model::NeuralTexture& texture() const { return texture_; }
    const model::RendererMlp& renderer() const { return *renderer_; }
    float texel_size_mm() const { return texel_size_mm_; }
    int height() const { return texture_.height(); }
    int width() const { return texture_.width(); }

    /// Bilinear latent fetch at (u, v) in texture space (texel centers at
    /// (x + 0.5) / W), wrapped modulo 1, decoded by the renderer.
    model::Rgb query(double u, double v, const btf::Direction& camera, const btf::Direction& light) const;

    /// The full slice for one direction pair.
    btf::BtfSlice render(const btf::DirectionPair& pair) const;

private:
    model::NeuralTexture texture_;
    std::shared_ptr<const model::RendererMlp> renderer_;
    float texel_size_mm_;
};

/// Independent copy of a renderer's configuration and weights.
std::unique_ptr<model::RendererMlp> clone_renderer(const model::RendererMlp& renderer);

/// Encodes `guidance` (tone-mapped, extents multiples of the stride) with the
/// trained autoencoder and bundles the texture with the renderer.
NeuralBtf propagate(const model::Model& model, const Image& guidance, float texel_size_mm = 0.1f);

/// propagate() for guidance the caller declares cyclic; the result tiles
/// seamlessly exactly when the guidance does.
NeuralBtf make_tileable(const model::Model& model, const Image& tileable_guidance, float texel_size_mm = 0.1f);

/// Max abs RGB difference between the slice rendered from the texture and
/// the slice rendered from the texture rolled by half its extent, rolled back.
double seam_metric(const NeuralBtf& btf, const btf::DirectionPair& pair);

struct MultiresResult {
    NeuralBtf btf;
    std::vector<std::string> warnings;
};

/// Area-downsamples the guidance by `scale` (<= 1) and propagates. The texel
/// size grows by 1 / scale. Scales below `min_relative_scale` lie outside
/// the range of relative rescales seen in training and add a warning.
MultiresResult make_multires(const model::Model& model, const Image& guidance, double scale,
                             double min_relative_scale = 0.5, float texel_size_mm = 0.1f);

}  // namespace neubtf::propagate
