// SPDX-License-Identifier: Apache-2.0
#include "neubtf/btf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neubtf/common/error.hpp"

namespace neubtf::btf {

BtfDataset::BtfDataset(int height, int width, float texel_size_mm, std::vector<DirectionPair> pairs,
                       std::vector<BtfSlice> slices)
    : height_(height), width_(width), texel_size_mm_(texel_size_mm), pairs_(std::move(pairs)),
      slices_(std::move(slices)) {
    if (height_ < 1 || width_ < 1) throw ValidationError("BTF extents must be positive");
    if (pairs_.empty()) throw ValidationError("BTF must contain at least one slice");
    if (pairs_.size() != slices_.size()) {
        throw ValidationError("BTF has " + std::to_string(pairs_.size()) + " pairs but " +
                              std::to_string(slices_.size()) + " slices");
    }
    if (!std::isfinite(texel_size_mm_) || texel_size_mm_ <= 0.0f) {
        throw ValidationError("texel size must be finite and positive");
    }
    for (const auto& p : pairs_) validate(p);
    auto sorted = pairs_;
    std::sort(sorted.begin(), sorted.end());
    if (const auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
        throw ValidationError("duplicate direction pair " + to_string(*dup));
    }
    for (std::size_t i = 0; i < slices_.size(); ++i) {
        const auto& s = slices_[i];
        if (s.height() != height_ || s.width() != width_ || s.channels() != 3) {
            throw ValidationError("slice " + std::to_string(i) + " is " + std::to_string(s.height()) + "x" +
                                  std::to_string(s.width()) + "x" + std::to_string(s.channels()) + ", expected " +
                                  std::to_string(height_) + "x" + std::to_string(width_) + "x3");
        }
        for (float v : s.pixels()) {
            if (!std::isfinite(v) || v < 0.0f) {
                throw ValidationError("slice " + std::to_string(i) + " contains non-finite or negative radiance");
            }
        }
    }
}

const BtfSlice& BtfDataset::get_slice(const DirectionPair& pair) const {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (pairs_[i] == pair) return slices_[i];
        const double d = angular_distance(pairs_[i], pair);
        if (d < best) {
            best = d;
            nearest = i;
        }
    }
    throw LookupError("pair " + to_string(pair) + " is not sampled; nearest is " + to_string(pairs_[nearest]));
}

BtfDataset BtfDataset::select(const std::vector<std::size_t>& indices) const {
    std::vector<DirectionPair> pairs;
    std::vector<BtfSlice> slices;
    for (std::size_t i : indices) {
        pairs.push_back(pairs_.at(i));
        slices.push_back(slices_.at(i));
    }
    return BtfDataset(height_, width_, texel_size_mm_, std::move(pairs), std::move(slices));
}

const BtfSlice& get_slice(const BtfDataset& dataset, const DirectionPair& pair) { return dataset.get_slice(pair); }

std::size_t most_frontal_pair(const BtfDataset& dataset) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dataset.size(); ++i) {
        const auto& p = dataset.pairs()[i];
        const auto& b = dataset.pairs()[best];
        if (p.camera.theta + p.light.theta < b.camera.theta + b.light.theta) best = i;
    }
    return best;
}

std::vector<std::size_t> holdout_indices(std::size_t n_pairs, std::size_t count) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = 2 + 5 * k;
        if (i >= n_pairs) {
            throw ConfigError("cannot hold out " + std::to_string(count) + " of " + std::to_string(n_pairs) +
                              " pairs at stride 5");
        }
        out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& indices) {
    std::vector<bool> taken(n, false);
    for (std::size_t i : indices) taken.at(i) = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) out.push_back(i);
    return out;
}

}  // namespace neubtf::btf
