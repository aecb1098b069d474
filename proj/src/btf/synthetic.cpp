// SPDX-License-Identifier: Apache-2.0
#include "neubtf/btf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neubtf/common/error.hpp"
#include "neubtf/common/rng.hpp"

namespace neubtf::btf {

namespace {

using Vec3 = std::array<double, 3>;
constexpr double kPi = std::numbers::pi;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

double smith_g1(double cos_theta, double alpha) {
    const double a2 = alpha * alpha;
    return 2.0 * cos_theta / (cos_theta + std::sqrt(a2 + (1.0 - a2) * cos_theta * cos_theta));
}

void check_maps(const SvbrdfMaps& maps) {
    const int h = maps.albedo.height();
    const int w = maps.albedo.width();
    auto same = [&](const Image& im, int channels, const char* name) {
        if (im.height() != h || im.width() != w || im.channels() != channels) {
            throw ValidationError(std::string("SVBRDF map `") + name + "` does not match the albedo extent");
        }
    };
    same(maps.albedo, 3, "albedo");
    same(maps.normal, 3, "normal");
    same(maps.roughness, 1, "roughness");
    same(maps.specular, 1, "specular");
    for (float a : maps.roughness.pixels()) {
        if (!(a > 0.0f && a <= 1.0f)) throw ValidationError("roughness must lie in (0, 1]");
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec3 n{maps.normal.at(y, x, 0), maps.normal.at(y, x, 1), maps.normal.at(y, x, 2)};
            const double len = std::sqrt(dot(n, n));
            if (len < 1e-6) throw ValidationError("zero-length normal at texel (" + std::to_string(y) + ", " +
                                                  std::to_string(x) + ")");
            if (std::abs(len - 1.0) > 1e-3) throw ValidationError("normals must be unit length");
        }
    }
}

}  // namespace

std::array<double, 3> evaluate_brdf(const std::array<double, 3>& albedo, const std::array<double, 3>& normal,
                                    double alpha, double k_s, double f0, const std::array<double, 3>& wo,
                                    const std::array<double, 3>& wi) {
    const double cos_o = dot(normal, wo);
    const double cos_i = dot(normal, wi);
    if (cos_o <= 0.0 || cos_i <= 0.0) return {0.0, 0.0, 0.0};
    double spec = 0.0;
    if (k_s != 0.0) {
        const Vec3 h = normalized({wo[0] + wi[0], wo[1] + wi[1], wo[2] + wi[2]});
        const double nh = dot(normal, h);
        const double a2 = alpha * alpha;
        const double denom = nh * nh * (a2 - 1.0) + 1.0;
        const double d = a2 / (kPi * denom * denom);
        const double g = smith_g1(cos_o, alpha) * smith_g1(cos_i, alpha);
        const double f = f0 + (1.0 - f0) * std::pow(1.0 - std::clamp(dot(wo, h), 0.0, 1.0), 5.0);
        spec = k_s * d * g * f / (4.0 * cos_o * cos_i);
    }
    return {albedo[0] / kPi + spec, albedo[1] / kPi + spec, albedo[2] / kPi + spec};
}

BtfDataset render_synthetic_btf(const SvbrdfMaps& maps, const std::vector<DirectionPair>& pairs,
                                float texel_size_mm) {
    check_maps(maps);
    const int h = maps.albedo.height();
    const int w = maps.albedo.width();
    std::vector<BtfSlice> slices;
    slices.reserve(pairs.size());
    for (const auto& pair : pairs) {
        validate(pair);
        const Vec3 wo = to_vector(pair.camera);
        const Vec3 wi = to_vector(pair.light);
        BtfSlice slice(h, w, 3);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec3 n = normalized({maps.normal.at(y, x, 0), maps.normal.at(y, x, 1), maps.normal.at(y, x, 2)});
                const Vec3 albedo{maps.albedo.at(y, x, 0), maps.albedo.at(y, x, 1), maps.albedo.at(y, x, 2)};
                const auto f = evaluate_brdf(albedo, n, maps.roughness.at(y, x, 0), maps.specular.at(y, x, 0),
                                             maps.f0, wo, wi);
                const double cos_i = std::max(0.0, dot(n, wi));
                for (int c = 0; c < 3; ++c) slice.at(y, x, c) = static_cast<float>(f[c] * cos_i);
            }
        }
        slices.push_back(std::move(slice));
    }
    return BtfDataset(h, w, texel_size_mm, pairs, std::move(slices));
}

SvbrdfMaps lambertian_maps(int size, float albedo) {
    SvbrdfMaps maps;
    maps.albedo = Image(size, size, 3, albedo);
    maps.normal = Image(size, size, 3);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) maps.normal.at(y, x, 2) = 1.0f;
    maps.roughness = Image(size, size, 1, 1.0f);
    maps.specular = Image(size, size, 1, 0.0f);
    return maps;
}

SvbrdfMaps ggx_textured_maps(int size, std::uint64_t seed) {
    // Height and mask fields are sums of sinusoids with integer frequencies,
    // so every map is exactly periodic over the texture extent.
    struct Wave {
        int fx, fy;
        double amp, phase;
    };
    Rng rng(seed);
    auto make_waves = [&](int count, int max_freq) {
        std::vector<Wave> waves;
        for (int i = 0; i < count; ++i) {
            Wave wv{};
            do {
                wv.fx = static_cast<int>(rng.index(2 * max_freq + 1)) - max_freq;
                wv.fy = static_cast<int>(rng.index(2 * max_freq + 1)) - max_freq;
            } while (wv.fx == 0 && wv.fy == 0);
            wv.amp = rng.uniform(0.5, 1.0) / std::hypot(wv.fx, wv.fy);
            wv.phase = rng.uniform(0.0, 2.0 * kPi);
            waves.push_back(wv);
        }
        return waves;
    };
    const auto bumps = make_waves(6, 5);
    const auto regions = make_waves(4, 3);

    SvbrdfMaps maps;
    maps.albedo = Image(size, size, 3);
    maps.normal = Image(size, size, 3);
    maps.roughness = Image(size, size, 1);
    maps.specular = Image(size, size, 1);

    const Vec3 warm{0.62, 0.30, 0.16};
    const Vec3 cool{0.14, 0.24, 0.45};
    const double bump_strength = 0.05;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const double v = (y + 0.5) / size;
            double height = 0.0, dhdu = 0.0, dhdv = 0.0;
            for (const auto& wv : bumps) {
                const double arg = 2.0 * kPi * (wv.fx * u + wv.fy * v) + wv.phase;
                height += wv.amp * std::sin(arg);
                dhdu += wv.amp * 2.0 * kPi * wv.fx * std::cos(arg);
                dhdv += wv.amp * 2.0 * kPi * wv.fy * std::cos(arg);
            }
            double field = 0.0;
            for (const auto& wv : regions) field += wv.amp * std::sin(2.0 * kPi * (wv.fx * u + wv.fy * v) + wv.phase);
            const double t = std::clamp((field + 0.15) / 0.3, 0.0, 1.0);
            const double mask = t * t * (3.0 - 2.0 * t);  // 1 = warm region

            const double shade = 0.85 + 0.1 * height;
            for (int c = 0; c < 3; ++c) {
                maps.albedo.at(y, x, c) =
                    static_cast<float>(std::clamp((mask * warm[c] + (1.0 - mask) * cool[c]) * shade, 0.0, 1.0));
            }
            // Bumps are stronger in the warm region.
            const double s = bump_strength * (0.4 + 0.6 * mask);
            const Vec3 n = normalized({-s * dhdu, -s * dhdv, 1.0});
            for (int c = 0; c < 3; ++c) maps.normal.at(y, x, c) = static_cast<float>(n[c]);
            maps.roughness.at(y, x, 0) = static_cast<float>(mask * 0.5 + (1.0 - mask) * 0.28);
            maps.specular.at(y, x, 0) = static_cast<float>(mask * 0.4 + (1.0 - mask) * 1.0);
        }
    }
    return maps;
}

}  // namespace neubtf::btf
