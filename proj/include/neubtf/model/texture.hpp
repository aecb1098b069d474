// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "neubtf/tensor/tensor.hpp"

namespace neubtf::model {

/// H x W x D latent field. Stored channel-major as a 1 x D x H x W tensor,
/// the layout both networks consume.
class NeuralTexture {
public:
    NeuralTexture() = default;
    /// Takes a 1 x D x H x W tensor; throws DimensionError otherwise and
    /// NumericError on non-finite values.
    explicit NeuralTexture(tensor::Tensor values);
    NeuralTexture(int height, int width, int depth);

    int height() const { return values_.dim(2); }
    int width() const { return values_.dim(3); }
    int depth() const { return values_.dim(1); }

    float at(int y, int x, int c) const;
    float& at(int y, int x, int c);
    /// The D-vector at texel (y, x).
    std::vector<float> latent(int y, int x) const;

    const tensor::Tensor& tensor() const { return values_; }
    bool operator==(const NeuralTexture& other) const;

    /// Cyclic shift of the texel grid: out(y, x) = in(y - dy, x - dx).
    NeuralTexture rolled(int dy, int dx) const;

private:
    tensor::Tensor values_;
};

}  // namespace neubtf::model
