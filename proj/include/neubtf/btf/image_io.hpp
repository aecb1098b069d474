// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "neubtf/common/image.hpp"

namespace neubtf::btf {

/// LDR linear RGB in [0, 1] whose extents are multiples of the autoencoder stride.
using GuidanceImage = Image;

inline constexpr int kDefaultStride = 8;

/// Reads an 8/16-bit PNG (sRGB-decoded to linear) or a PFM (passed through)
/// into an H x W x 3 image.
Image load_image(const std::filesystem::path& path);

/// PNG output is clamped to [0, 1]; `encode_srgb` applies the sRGB OETF first.
/// PFM output stores the floats unchanged.
void save_image(const Image& image, const std::filesystem::path& path, bool encode_srgb = true);

/// load_image plus guidance checks: values in [0, 1] and extents divisible by `stride`.
GuidanceImage load_guidance(const std::filesystem::path& path, int stride = kDefaultStride);
void validate_guidance(const Image& image, int stride = kDefaultStride);

float srgb_to_linear(float encoded);
float linear_to_srgb(float linear);

}  // namespace neubtf::btf
