// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

namespace neubtf::btf {

/// Hemisphere direction in degrees: polar angle theta in [0, 90), azimuth phi in [0, 360).
struct Direction {
    float theta = 0.0f;
    float phi = 0.0f;

    auto operator<=>(const Direction&) const = default;
};

struct DirectionPair {
    Direction camera;
    Direction light;

    auto operator<=>(const DirectionPair&) const = default;
};

bool is_valid(const Direction& d);
void validate(const Direction& d);
void validate(const DirectionPair& p);

/// Unit vector in the local shading frame (z = surface normal).
std::array<double, 3> to_vector(const Direction& d);

/// Orthographic projection of the direction onto the tangent plane:
/// (sin theta cos phi, sin theta sin phi), inside the unit disk.
std::array<float, 2> direction_to_projected(const Direction& d);

/// Angle in radians between two directions.
double angular_distance(const Direction& a, const Direction& b);
double angular_distance(const DirectionPair& a, const DirectionPair& b);

std::string to_string(const Direction& d);
std::string to_string(const DirectionPair& p);

/// Directions on the theta x phi grid; theta = 0 contributes a single pole entry.
std::vector<Direction> hemisphere_grid(const std::vector<float>& thetas, const std::vector<float>& phis);

/// Default sampling: theta in {0, 15, ..., 75} x phi in {0, 90, 180, 270} (21 directions).
std::vector<Direction> default_hemisphere();

/// Every (camera, light) combination, camera-major.
std::vector<DirectionPair> all_pairs(const std::vector<Direction>& cameras, const std::vector<Direction>& lights);

/// `count` pairs taken at an even stride from all_pairs(default_hemisphere(), default_hemisphere()).
std::vector<DirectionPair> strided_hemisphere_pairs(int count);

/// The 7 x 7 grid: directions {(0,0)} u {30, 60} x three azimuths, all camera/light combinations.
std::vector<DirectionPair> grid7_pairs();

}  // namespace neubtf::btf
