// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "neubtf/tensor/ops.hpp"

// Reconstruction losses on N x 3 x H x W linear-radiance batches. All are
// differentiable in `pred` when a tape is active.
namespace neubtf::training {

using tensor::Tensor;

struct LossWeights {
    double l1 = 1.0;
    double style = 0.1;
    double freq = 0.1;

    void validate() const;
};

struct LossReport {
    double total = 0.0;
    double l1_log = 0.0;
    double style = 0.0;
    double freq = 0.0;
};

struct LossTerms {
    Tensor total, l1_log, style, freq;
};

/// mean |log1p(max(pred, -0.999)) - log1p(target)|.
Tensor loss_l1_log(const Tensor& pred, const Tensor& target);

/// Activations of the fixed three-level random convolutional pyramid.
std::vector<Tensor> style_features(const Tensor& x);

/// Batch mean of the squared Frobenius distance between the normalized Gram
/// matrices of two N x C x H x W feature maps.
Tensor gram_distance(const Tensor& a, const Tensor& b);

/// Mean over pyramid levels of gram_distance.
Tensor loss_style(const Tensor& pred, const Tensor& target);

/// Focal frequency loss on the unitary 2D DFT of each channel. Bin weights
/// (d^alpha normalized by the channel maximum) are treated as constants.
Tensor loss_focal_freq(const Tensor& pred, const Tensor& target, double alpha = 1.0);

LossTerms loss_terms(const Tensor& pred, const Tensor& target, const LossWeights& weights);

/// Scalar values of the three components; `total` is their weighted sum.
LossReport report(const LossTerms& terms, const LossWeights& weights);

LossReport total_loss(const Tensor& pred, const Tensor& target, const LossWeights& weights);

}  // namespace neubtf::training
