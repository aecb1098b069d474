// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstring>

#include "op_util.hpp"

namespace neubtf::tensor {

using detail::make_output;
using detail::should_record;

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
    if (numel(shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
    }
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(std::move(shape), rec);
    std::copy(x.data().begin(), x.data().end(), out.data().begin());
    if (rec) {
        detail::record<T>("reshape", [x, out]() mutable {
            if (!out.has_grad()) return;
            auto dx = x.ensure_grad();
            auto g = out.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i];
        });
    }
    return out;
}

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, int axis) {
    if (parts.empty()) throw DimensionError("concat of zero tensors");
    const int r = parts[0].rank();
    const int ax = detail::normalize_axis(axis, r);
    Shape out_shape = parts[0].shape();
    out_shape[ax] = 0;
    for (const auto& p : parts) {
        if (p.rank() != r) throw DimensionError("concat: rank mismatch");
        for (int d = 0; d < r; ++d) {
            if (d != ax && p.dim(d) != parts[0].dim(d)) {
                throw DimensionError("concat: shape " + to_string(p.shape()) + " incompatible with " +
                                     to_string(parts[0].shape()) + " on axis " + std::to_string(d));
            }
        }
        out_shape[ax] += p.dim(ax);
    }
    std::size_t outer = 1, inner = 1;
    for (int d = 0; d < ax; ++d) outer *= static_cast<std::size_t>(out_shape[d]);
    for (int d = ax + 1; d < r; ++d) inner *= static_cast<std::size_t>(out_shape[d]);
    bool rec = false;
    if (BasicTape<T>::active() != nullptr)
        for (const auto& p : parts) rec = rec || p.requires_grad();
    auto out = make_output<T>(out_shape, rec);
    const std::size_t out_row = static_cast<std::size_t>(out_shape[ax]) * inner;
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        const std::size_t row = static_cast<std::size_t>(p.dim(ax)) * inner;
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(p.raw() + o * row, row, out.raw() + o * out_row + offset);
        offsets.push_back(offset);
        offset += row;
    }
    if (rec) {
        detail::record<T>("concat", [parts, out, offsets, outer, inner, out_row, ax]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            for (std::size_t i = 0; i < parts.size(); ++i) {
                auto& p = parts[i];
                if (!p.requires_grad()) continue;
                const std::size_t row = static_cast<std::size_t>(p.dim(ax)) * inner;
                T* dp = p.ensure_grad().data();
                for (std::size_t o = 0; o < outer; ++o)
                    for (std::size_t j = 0; j < row; ++j) dp[o * row + j] += g[o * out_row + offsets[i] + j];
            }
        });
    }
    return out;
}

namespace {

inline int wrap(int i, int n) {
    const int m = i % n;
    return m < 0 ? m + n : m;
}

/// Generic gather over the two trailing axes: out(y, x) = in(map_y(y), map_x(x)).
template <typename T>
BasicTensor<T> spatial_gather(const BasicTensor<T>& x, int oh, int ow, const std::vector<int>& src_y,
                              const std::vector<int>& src_x, const char* name) {
    if (x.rank() < 2) throw DimensionError(std::string(name) + " needs at least two axes");
    const int w = x.dim(x.rank() - 1);
    Shape out_shape = x.shape();
    out_shape[x.rank() - 2] = oh;
    out_shape[x.rank() - 1] = ow;
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(out_shape, rec);
    const std::size_t planes = x.numel() / (static_cast<std::size_t>(x.dim(x.rank() - 2)) * w);
    const std::size_t in_plane = static_cast<std::size_t>(x.dim(x.rank() - 2)) * w;
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    for (std::size_t p = 0; p < planes; ++p) {
        const T* src = x.raw() + p * in_plane;
        T* dst = out.raw() + p * out_plane;
        for (int y = 0; y < oh; ++y) {
            const T* srow = src + static_cast<std::size_t>(src_y[y]) * w;
            for (int c = 0; c < ow; ++c) dst[y * ow + c] = srow[src_x[c]];
        }
    }
    if (rec) {
        detail::record<T>(name, [x, out, src_y, src_x, planes, in_plane, out_plane, oh, ow, w]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            T* dx = x.ensure_grad().data();
            for (std::size_t p = 0; p < planes; ++p)
                for (int y = 0; y < oh; ++y)
                    for (int c = 0; c < ow; ++c)
                        dx[p * in_plane + static_cast<std::size_t>(src_y[y]) * w + src_x[c]] +=
                            g[p * out_plane + y * ow + c];
        });
    }
    return out;
}

}  // namespace

template <typename T>
BasicTensor<T> pad_circular(const BasicTensor<T>& x, int amount) {
    if (x.rank() == 1) {
        const int n = x.dim(0);
        if (amount < 0 || amount >= n) {
            throw DimensionError("pad_circular: amount " + std::to_string(amount) + " must be below extent " +
                                 std::to_string(n));
        }
        std::vector<int> sx(n + 2 * amount);
        for (int i = 0; i < static_cast<int>(sx.size()); ++i) sx[i] = wrap(i - amount, n);
        auto padded = spatial_gather(reshape(x, Shape{1, n}), 1, n + 2 * amount, {0}, sx, "pad_circular");
        return reshape(padded, Shape{n + 2 * amount});
    }
    if (x.rank() < 2) throw DimensionError("pad_circular needs at least one axis");
    const int h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
    if (amount < 0 || amount >= h || amount >= w) {
        throw DimensionError("pad_circular: amount " + std::to_string(amount) + " must be below extents " +
                             std::to_string(h) + "x" + std::to_string(w));
    }
    std::vector<int> sy(h + 2 * amount), sx(w + 2 * amount);
    for (int i = 0; i < static_cast<int>(sy.size()); ++i) sy[i] = wrap(i - amount, h);
    for (int i = 0; i < static_cast<int>(sx.size()); ++i) sx[i] = wrap(i - amount, w);
    return spatial_gather(x, h + 2 * amount, w + 2 * amount, sy, sx, "pad_circular");
}

template <typename T>
BasicTensor<T> roll(const BasicTensor<T>& x, int dy, int dx) {
    if (x.rank() < 2) throw DimensionError("roll needs at least two axes");
    const int h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
    std::vector<int> sy(h), sx(w);
    for (int i = 0; i < h; ++i) sy[i] = wrap(i - dy, h);
    for (int i = 0; i < w; ++i) sx[i] = wrap(i - dx, w);
    return spatial_gather(x, h, w, sy, sx, "roll");
}

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, int factor) {
    if (x.rank() < 2) throw DimensionError("upsample_nearest needs at least two axes");
    if (factor < 1) throw DimensionError("upsample_nearest: factor must be positive");
    const int h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
    std::vector<int> sy(h * factor), sx(w * factor);
    for (int i = 0; i < h * factor; ++i) sy[i] = i / factor;
    for (int i = 0; i < w * factor; ++i) sx[i] = i / factor;
    return spatial_gather(x, h * factor, w * factor, sy, sx, "upsample_nearest");
}

#define NEUBTF_INSTANTIATE(T)                                                              \
    template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                         \
    template BasicTensor<T> concat(const std::vector<BasicTensor<T>>&, int);               \
    template BasicTensor<T> pad_circular(const BasicTensor<T>&, int);                      \
    template BasicTensor<T> roll(const BasicTensor<T>&, int, int);                         \
    template BasicTensor<T> upsample_nearest(const BasicTensor<T>&, int);

NEUBTF_INSTANTIATE(float)
NEUBTF_INSTANTIATE(double)
#undef NEUBTF_INSTANTIATE

}  // namespace neubtf::tensor
