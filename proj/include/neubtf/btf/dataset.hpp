// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "neubtf/btf/direction.hpp"
#include "neubtf/common/image.hpp"

namespace neubtf::btf {

/// One H x W x 3 linear-radiance image under a fixed (camera, light) pair.
using BtfSlice = Image;

/// Tabulated BTF. Immutable after construction; the constructor enforces
/// every invariant (matching extents, unique valid pairs, finite
/// non-negative radiance).
class BtfDataset {
public:
    BtfDataset(int height, int width, float texel_size_mm, std::vector<DirectionPair> pairs,
               std::vector<BtfSlice> slices);

    int height() const { return height_; }
    int width() const { return width_; }
    float texel_size_mm() const { return texel_size_mm_; }
    std::size_t size() const { return pairs_.size(); }
    const std::vector<DirectionPair>& pairs() const { return pairs_; }
    const std::vector<BtfSlice>& slices() const { return slices_; }
    const BtfSlice& slice(std::size_t i) const { return slices_.at(i); }

    /// Exact lookup; throws LookupError naming the nearest stored pair.
    const BtfSlice& get_slice(const DirectionPair& pair) const;

    /// Subset by index, keeping order.
    BtfDataset select(const std::vector<std::size_t>& indices) const;

    bool operator==(const BtfDataset&) const = default;

private:
    int height_;
    int width_;
    float texel_size_mm_;
    std::vector<DirectionPair> pairs_;
    std::vector<BtfSlice> slices_;
};

const BtfSlice& get_slice(const BtfDataset& dataset, const DirectionPair& pair);

/// Index of the pair with the smallest theta_camera + theta_light (ties: first).
std::size_t most_frontal_pair(const BtfDataset& dataset);

/// Held-out split used by the generalization runs: indices 2, 7, 12, ... (stride 5), `count` of them.
std::vector<std::size_t> holdout_indices(std::size_t n_pairs, std::size_t count);
std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& indices);

}  // namespace neubtf::btf
