// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "neubtf/common/error.hpp"
#include "neubtf/tensor/ops.hpp"

namespace neubtf::tensor::detail {

/// True when a tape is active and some input requires grad.
template <typename T>
bool should_record(std::initializer_list<const BasicTensor<T>*> inputs) {
    if (BasicTape<T>::active() == nullptr) return false;
    for (const auto* t : inputs)
        if (t != nullptr && t->defined() && t->requires_grad()) return true;
    return false;
}

template <typename T>
BasicTensor<T> make_output(Shape shape, bool record) {
    BasicTensor<T> out(std::move(shape));
    if (record) out.set_requires_grad(true);
    return out;
}

template <typename T>
void record(const char* op, typename BasicTape<T>::Backward fn) {
    BasicTape<T>::active()->record(op, std::move(fn));
}

/// Row-major strides; broadcast axes (extent 1 against a larger output) get stride 0.
inline std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
    std::vector<std::size_t> strides(in.size(), 0);
    std::size_t s = 1;
    for (int d = static_cast<int>(in.size()) - 1; d >= 0; --d) {
        strides[d] = (in[d] == 1 && out[d] != 1) ? 0 : s;
        s *= static_cast<std::size_t>(in[d]);
    }
    return strides;
}

/// Calls f(out_index, a_index, b_index) over every element of `out`.
template <typename F>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
                        F&& f) {
    const int r = static_cast<int>(out.size());
    if (r == 0) {
        f(std::size_t{0}, std::size_t{0}, std::size_t{0});
        return;
    }
    const std::size_t total = numel(out);
    if (total == 0) return;
    std::vector<int> idx(r, 0);
    const int inner = out[r - 1];
    const std::size_t ia_step = sa[r - 1], ib_step = sb[r - 1];
    std::size_t o = 0;
    while (o < total) {
        std::size_t ia = 0, ib = 0;
        for (int d = 0; d < r - 1; ++d) {
            ia += idx[d] * sa[d];
            ib += idx[d] * sb[d];
        }
        for (int i = 0; i < inner; ++i, ++o) f(o, ia + i * ia_step, ib + i * ib_step);
        for (int d = r - 2; d >= 0; --d) {
            if (++idx[d] < out[d]) break;
            idx[d] = 0;
        }
    }
}

inline int normalize_axis(int axis, int rank) {
    const int a = axis < 0 ? axis + rank : axis;
    if (a < 0 || a >= rank) throw DimensionError("axis " + std::to_string(axis) + " out of range for rank " +
                                                 std::to_string(rank));
    return a;
}

template <typename T>
void require_rank(const BasicTensor<T>& x, int rank, const char* op) {
    if (x.rank() != rank) {
        throw DimensionError(std::string(op) + " expects rank " + std::to_string(rank) + ", got shape " +
                             to_string(x.shape()));
    }
}

}  // namespace neubtf::tensor::detail
