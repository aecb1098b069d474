// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "neubtf/common/rng.hpp"
#include "neubtf/tensor/tensor.hpp"

namespace neubtf::tensor {

/// Orthogonal matrix over (shape[0], product of the remaining extents):
/// W W^T = I when shape[0] is the smaller side, W^T W = I otherwise.
Tensor init_orthogonal(const Shape& shape, Rng& rng, float gain = 1.0f);

/// SIREN-style uniform bounds: 1 / fan_in for the first layer, sqrt(6 / fan_in) / omega0 after.
Tensor init_siren(const Shape& shape, int layer_index, int fan_in, float omega0, Rng& rng);
float siren_bound(int layer_index, int fan_in, float omega0);

Tensor init_uniform(const Shape& shape, float bound, Rng& rng);

}  // namespace neubtf::tensor
