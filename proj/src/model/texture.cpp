// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/texture.hpp"

#include <algorithm>

#include "neubtf/common/error.hpp"
#include "neubtf/tensor/ops.hpp"

namespace neubtf::model {

NeuralTexture::NeuralTexture(tensor::Tensor values) : values_(std::move(values)) {
    if (!values_.defined() || values_.rank() != 4 || values_.dim(0) != 1) {
        throw DimensionError("neural texture must be a 1 x D x H x W tensor");
    }
    tensor::check_finite(values_, "neural texture");
}

NeuralTexture::NeuralTexture(int height, int width, int depth) : values_(tensor::Shape{1, depth, height, width}) {
    if (height < 1 || width < 1 || depth < 1) throw DimensionError("neural texture extents must be positive");
}

float NeuralTexture::at(int y, int x, int c) const {
    return values_.data()[(static_cast<std::size_t>(c) * height() + y) * width() + x];
}

float& NeuralTexture::at(int y, int x, int c) {
    return values_.data()[(static_cast<std::size_t>(c) * height() + y) * width() + x];
}

std::vector<float> NeuralTexture::latent(int y, int x) const {
    std::vector<float> out(depth());
    for (int c = 0; c < depth(); ++c) out[c] = at(y, x, c);
    return out;
}

bool NeuralTexture::operator==(const NeuralTexture& other) const {
    if (values_.defined() != other.values_.defined()) return false;
    if (!values_.defined()) return true;
    return values_.shape() == other.values_.shape() &&
           std::equal(values_.data().begin(), values_.data().end(), other.values_.data().begin());
}

NeuralTexture NeuralTexture::rolled(int dy, int dx) const { return NeuralTexture(tensor::roll(values_, dy, dx)); }

}  // namespace neubtf::model
