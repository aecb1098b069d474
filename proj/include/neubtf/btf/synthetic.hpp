// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "neubtf/btf/dataset.hpp"

namespace neubtf::btf {

/// Spatially-varying BRDF parameter maps sharing one H x W extent.
/// `roughness` holds the GGX alpha directly; `specular` scales the
/// microfacet lobe (k_s). Normals are unit tangent-space vectors.
struct SvbrdfMaps {
    Image albedo;     // H x W x 3
    Image normal;     // H x W x 3
    Image roughness;  // H x W x 1, in (0, 1]
    Image specular;   // H x W x 1
    float f0 = 0.04f;
};

/// Unshadowed point-light shading with unit irradiance:
/// (albedo / pi + k_s * D * G * F / (4 cos_o cos_i)) * cos_i, zero below the horizon.
BtfDataset render_synthetic_btf(const SvbrdfMaps& maps, const std::vector<DirectionPair>& pairs,
                                float texel_size_mm = 0.1f);

/// BRDF value (before the cosine) for a single texel, used by the generator.
std::array<double, 3> evaluate_brdf(const std::array<double, 3>& albedo, const std::array<double, 3>& normal,
                                    double alpha, double k_s, double f0, const std::array<double, 3>& wo,
                                    const std::array<double, 3>& wi);

/// Uniform grey Lambertian material (albedo 0.6, flat normals, no specular).
SvbrdfMaps lambertian_maps(int size, float albedo = 0.6f);

/// Tileable two-material procedural texture: a bumpy warm/rough region and a
/// cool/glossier region separated by a smooth mask.
SvbrdfMaps ggx_textured_maps(int size, std::uint64_t seed = 7);

}  // namespace neubtf::btf
