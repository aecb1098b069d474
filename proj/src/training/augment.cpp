// SPDX-License-Identifier: Apache-2.0
#include "neubtf/training/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neubtf/common/error.hpp"
#include "neubtf/common/kv_config.hpp"

namespace neubtf::training {

void AugmentationConfig::validate(int stride) const {
    if (crop_size <= 0 || crop_size % stride != 0) {
        throw ConfigError("augment.crop_size must be a positive multiple of " + std::to_string(stride));
    }
    if (!(scale_min > 0.0) || !(scale_max >= scale_min)) {
        throw ConfigError("augment.scale_min/scale_max must satisfy 0 < min <= max");
    }
    if (hue_max_degrees < 0.0 || blur_sigma_max < 0.0 || noise_sigma_max < 0.0) {
        throw ConfigError("augmentation magnitudes must be non-negative");
    }
}

int effective_crop_size(const AugmentationConfig& config, int height, int width, int stride) {
    config.validate(stride);
    const int fits = static_cast<int>(std::floor(std::min(height, width) * config.scale_min + 1e-9));
    if (config.crop_size <= fits) return config.crop_size;
    const int shrunk = fits / stride * stride;
    if (!config.fit_crop || shrunk < stride) {
        throw ConfigError("crop " + std::to_string(config.crop_size) + " does not fit a " + std::to_string(height) +
                          "x" + std::to_string(width) + " slice rescaled by " + format_double(config.scale_min));
    }
    return shrunk;
}

Image rotate_hue(const Image& image, double degrees) {
    const double a = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a), k = 1.0 / std::sqrt(3.0);
    // Rodrigues rotation about (1, 1, 1) / sqrt(3).
    const double d = (1.0 - c) / 3.0, e = s * k;
    const double m[3][3] = {{c + d, d - e, d + e}, {d + e, c + d, d - e}, {d - e, d + e, c + d}};
    Image out(image.height(), image.width(), 3);
    const auto in = image.pixels();
    auto px = out.pixels();
    for (std::size_t i = 0; i < in.size(); i += 3) {
        for (int r = 0; r < 3; ++r) {
            const double v = m[r][0] * in[i] + m[r][1] * in[i + 1] + m[r][2] * in[i + 2];
            px[i + r] = static_cast<float>(std::max(0.0, v));
        }
    }
    return out;
}

Image gaussian_blur(const Image& image, double sigma) {
    if (sigma <= 0.0) return image;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel) k /= total;

    const int h = image.height(), w = image.width(), ch = image.channels();
    auto pass = [&](const Image& src, bool vertical) {
        Image dst(h, w, ch);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (int i = -radius; i <= radius; ++i) {
                        acc += kernel[i + radius] * (vertical ? src.wrapped(y + i, x, c) : src.wrapped(y, x + i, c));
                    }
                    dst.at(y, x, c) = static_cast<float>(acc);
                }
        return dst;
    };
    return pass(pass(image, false), true);
}

TrainingPair sample_training_pair(const btf::BtfDataset& dataset, const AugmentationConfig& config, int stride,
                                  Rng& rng) {
    const int crop = effective_crop_size(config, dataset.height(), dataset.width(), stride);
    const auto input_index = rng.index(dataset.size());
    const auto target_index = rng.index(dataset.size());
    const double scale = rng.uniform(config.scale_min, config.scale_max);
    const int scaled_h = std::max(1, static_cast<int>(std::lround(dataset.height() * scale)));
    const int scaled_w = std::max(1, static_cast<int>(std::lround(dataset.width() * scale)));
    const int origin_y = static_cast<int>(rng.index(scaled_h));
    const int origin_x = static_cast<int>(rng.index(scaled_w));
    const double hue = rng.uniform(0.0, config.hue_max_degrees);
    const double blur = rng.uniform(0.0, config.blur_sigma_max);
    const double noise = rng.uniform(0.0, config.noise_sigma_max);

    auto geometric = [&](const Image& slice) {
        return scaled_crop(slice, scale, scale, origin_y, origin_x, crop, crop);
    };
    TrainingPair pair;
    pair.input_pair = dataset.pairs()[input_index];
    pair.target_pair = dataset.pairs()[target_index];
    pair.target_view = geometric(dataset.slice(target_index));
    Image input = geometric(dataset.slice(input_index));
    if (hue != 0.0) input = rotate_hue(input, hue);
    if (blur != 0.0) input = gaussian_blur(input, blur);
    for (float& v : input.pixels()) {
        if (noise != 0.0) v = std::max(0.0f, v + static_cast<float>(noise * rng.normal()));
    }
    pair.input_view = tonemap(input);
    return pair;
}

}  // namespace neubtf::training
