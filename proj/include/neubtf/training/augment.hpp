// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "neubtf/btf/dataset.hpp"
#include "neubtf/common/image.hpp"
#include "neubtf/common/rng.hpp"

namespace neubtf::training {

struct AugmentationConfig {
    int crop_size = 64;
    /// Shrink the crop to the largest stride multiple that fits the smallest
    /// rescaled slice instead of rejecting small datasets.
    bool fit_crop = true;
    double scale_min = 0.7;
    double scale_max = 1.4;
    double hue_max_degrees = 360.0;
    double blur_sigma_max = 1.5;
    double noise_sigma_max = 0.02;

    void validate(int stride) const;
};

/// Crop extent used for a height x width dataset. Throws ConfigError when
/// the crop cannot fit.
int effective_crop_size(const AugmentationConfig& config, int height, int width, int stride);

struct TrainingPair {
    /// Tone-mapped guidance in [0, 1), photometric and geometric augmentations applied.
    Image input_view;
    /// Linear radiance, geometric augmentations only.
    Image target_view;
    btf::DirectionPair input_pair;
    btf::DirectionPair target_pair;
};

/// Draws input and target pairs independently, applies one shared rescale
/// and wrap-addressed crop to both, then hue, blur, and noise to the input.
TrainingPair sample_training_pair(const btf::BtfDataset& dataset, const AugmentationConfig& config, int stride,
                                  Rng& rng);

/// Rotation of linear RGB about the gray axis, negatives clamped to zero.
Image rotate_hue(const Image& image, double degrees);

/// Separable wrap-addressed Gaussian blur, kernel radius ceil(3 sigma).
Image gaussian_blur(const Image& image, double sigma);

}  // namespace neubtf::training
