// SPDX-License-Identifier: Apache-2.0
#include "neubtf/btf/direction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "neubtf/common/error.hpp"

namespace neubtf::btf {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

bool is_valid(const Direction& d) {
    return std::isfinite(d.theta) && std::isfinite(d.phi) && d.theta >= 0.0f && d.theta < 90.0f &&
           d.phi >= 0.0f && d.phi < 360.0f;
}

void validate(const Direction& d) {
    if (!is_valid(d)) {
        throw ValidationError("direction " + to_string(d) + " outside theta in [0, 90), phi in [0, 360)");
    }
}

void validate(const DirectionPair& p) {
    validate(p.camera);
    validate(p.light);
}

std::array<double, 3> to_vector(const Direction& d) {
    const double t = d.theta * kDeg;
    const double p = d.phi * kDeg;
    return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

std::array<float, 2> direction_to_projected(const Direction& d) {
    const double t = d.theta * kDeg;
    const double p = d.phi * kDeg;
    return {static_cast<float>(std::sin(t) * std::cos(p)), static_cast<float>(std::sin(t) * std::sin(p))};
}

double angular_distance(const Direction& a, const Direction& b) {
    const auto u = to_vector(a);
    const auto v = to_vector(b);
    const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    return std::acos(std::clamp(dot, -1.0, 1.0));
}

double angular_distance(const DirectionPair& a, const DirectionPair& b) {
    return angular_distance(a.camera, b.camera) + angular_distance(a.light, b.light);
}

std::string to_string(const Direction& d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(theta=%g, phi=%g)", d.theta, d.phi);
    return buf;
}

std::string to_string(const DirectionPair& p) {
    return "{camera " + to_string(p.camera) + ", light " + to_string(p.light) + "}";
}

std::vector<Direction> hemisphere_grid(const std::vector<float>& thetas, const std::vector<float>& phis) {
    std::vector<Direction> out;
    for (float t : thetas) {
        if (t == 0.0f) {
            out.push_back({0.0f, 0.0f});
            continue;
        }
        for (float p : phis) out.push_back({t, p});
    }
    for (const auto& d : out) validate(d);
    return out;
}

std::vector<Direction> default_hemisphere() {
    return hemisphere_grid({0, 15, 30, 45, 60, 75}, {0, 90, 180, 270});
}

std::vector<DirectionPair> all_pairs(const std::vector<Direction>& cameras, const std::vector<Direction>& lights) {
    std::vector<DirectionPair> out;
    out.reserve(cameras.size() * lights.size());
    for (const auto& c : cameras)
        for (const auto& l : lights) out.push_back({c, l});
    return out;
}

std::vector<DirectionPair> strided_hemisphere_pairs(int count) {
    const auto dirs = default_hemisphere();
    const auto all = all_pairs(dirs, dirs);
    if (count < 1 || static_cast<std::size_t>(count) > all.size()) {
        throw ConfigError("pair count must be in [1, " + std::to_string(all.size()) + "], got " +
                          std::to_string(count));
    }
    std::vector<DirectionPair> out;
    for (int k = 0; k < count; ++k) out.push_back(all[static_cast<std::size_t>(k) * all.size() / count]);
    return out;
}

std::vector<DirectionPair> grid7_pairs() {
    const std::vector<Direction> dirs = {{0, 0}, {30, 0}, {30, 120}, {30, 240}, {60, 60}, {60, 180}, {60, 300}};
    return all_pairs(dirs, dirs);
}

}  // namespace neubtf::btf
