// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>
#include <unsupported/Eigen/SpecialFunctions>

#include "op_util.hpp"

namespace neubtf::tensor {

using detail::make_output;
using detail::should_record;

template <typename T>
void check_finite(const BasicTensor<T>& x, const char* op) {
    for (T v : x.data()) {
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
    }
}

namespace {

enum class BinaryKind { Add, Sub, Mul };

template <typename T>
BasicTensor<T> binary(const BasicTensor<T>& a, const BasicTensor<T>& b, BinaryKind kind, const char* name) {
    if (a.rank() != b.rank()) {
        throw DimensionError(std::string(name) + ": rank mismatch " + to_string(a.shape()) + " vs " +
                             to_string(b.shape()));
    }
    Shape out_shape(a.rank());
    std::string bad;
    for (int d = 0; d < a.rank(); ++d) {
        const int x = a.shape()[d], y = b.shape()[d];
        if (x != y && x != 1 && y != 1) bad += (bad.empty() ? "" : ", ") + std::to_string(d);
        out_shape[d] = std::max(x, y);
    }
    if (!bad.empty()) {
        throw DimensionError(std::string(name) + ": cannot broadcast " + to_string(a.shape()) + " with " +
                             to_string(b.shape()) + " on axes " + bad);
    }
    const bool rec = should_record<T>({&a, &b});
    auto out = make_output<T>(out_shape, rec);
    const bool same = a.shape() == b.shape();
    const auto sa = detail::broadcast_strides(a.shape(), out_shape);
    const auto sb = detail::broadcast_strides(b.shape(), out_shape);
    const T* pa = a.raw();
    const T* pb = b.raw();
    T* po = out.raw();
    const std::size_t n = out.numel();
    auto apply = [kind](T x, T y) {
        switch (kind) {
            case BinaryKind::Add: return x + y;
            case BinaryKind::Sub: return x - y;
            default: return x * y;
        }
    };
    if (same) {
        for (std::size_t i = 0; i < n; ++i) po[i] = apply(pa[i], pb[i]);
    } else {
        detail::for_each_broadcast(out_shape, sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) {
            po[o] = apply(pa[ia], pb[ib]);
        });
    }
    check_finite(out, name);
    if (rec) {
        detail::record<T>(name, [a, b, out, kind, same, sa, sb, out_shape]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            const bool ga = a.requires_grad(), gb = b.requires_grad();
            T* da = ga ? a.ensure_grad().data() : nullptr;
            T* db = gb ? b.ensure_grad().data() : nullptr;
            const T* pa = a.raw();
            const T* pb = b.raw();
            auto step = [&](std::size_t o, std::size_t ia, std::size_t ib) {
                switch (kind) {
                    case BinaryKind::Add:
                        if (da) da[ia] += g[o];
                        if (db) db[ib] += g[o];
                        break;
                    case BinaryKind::Sub:
                        if (da) da[ia] += g[o];
                        if (db) db[ib] -= g[o];
                        break;
                    case BinaryKind::Mul:
                        if (da) da[ia] += g[o] * pb[ib];
                        if (db) db[ib] += g[o] * pa[ia];
                        break;
                }
            };
            if (same) {
                for (std::size_t i = 0; i < out.numel(); ++i) step(i, i, i);
            } else {
                detail::for_each_broadcast(out_shape, sa, sb, step);
            }
        });
    }
    return out;
}

/// Elementwise map with derivative dy/dx = deriv(x, y).
template <typename T, typename F, typename D>
BasicTensor<T> unary(const BasicTensor<T>& x, const char* name, F f, D deriv) {
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(x.shape(), rec);
    const T* px = x.raw();
    T* py = out.raw();
    for (std::size_t i = 0; i < x.numel(); ++i) py[i] = f(px[i]);
    check_finite(out, name);
    if (rec) {
        detail::record<T>(name, [x, out, deriv]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            const T* px = x.raw();
            const T* py = out.raw();
            T* dx = x.ensure_grad().data();
            for (std::size_t i = 0; i < x.numel(); ++i) dx[i] += g[i] * deriv(px[i], py[i]);
        });
    }
    return out;
}

}  // namespace

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    return binary(a, b, BinaryKind::Add, "add");
}
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    return binary(a, b, BinaryKind::Sub, "sub");
}
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    return binary(a, b, BinaryKind::Mul, "mul");
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
    return unary(x, "scale", [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T value) {
    return unary(x, "add_scalar", [value](T v) { return v + value; }, [](T, T) { return T(1); });
}

template <typename T>
BasicTensor<T> abs(const BasicTensor<T>& x) {
    return unary(x, "abs", [](T v) { return std::abs(v); },
                 [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
BasicTensor<T> square(const BasicTensor<T>& x) {
    return unary(x, "square", [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
BasicTensor<T> exp(const BasicTensor<T>& x) {
    return unary(x, "exp", [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
BasicTensor<T> log1p(const BasicTensor<T>& x) {
    for (T v : x.data()) {
        if (!(v > T(-1))) throw DomainError("log1p requires x > -1");
    }
    return unary(x, "log1p", [](T v) { return std::log1p(v); }, [](T v, T) { return T(1) / (T(1) + v); });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
    return unary(
        x, "sigmoid",
        [](T v) {
            if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
            const T e = std::exp(v);
            return e / (T(1) + e);
        },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x) {
    using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
    using Map = Eigen::Map<Array>;
    using ConstMap = Eigen::Map<const Array>;
    const T inv_sqrt2 = T(0.70710678118654752440);
    const T inv_sqrt_2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
    const auto n = static_cast<Eigen::Index>(x.numel());
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(x.shape(), rec);
    const ConstMap xv(x.raw(), n);
    Map(out.raw(), n) = T(0.5) * xv * (T(1) + (xv * inv_sqrt2).erf());
    check_finite(out, "gelu");
    if (rec) {
        detail::record<T>("gelu", [x, out, n, inv_sqrt2, inv_sqrt_2pi]() mutable {
            if (!out.has_grad()) return;
            const ConstMap xv(x.raw(), n);
            const Array cdf = T(0.5) * (T(1) + (xv * inv_sqrt2).erf());
            const Array deriv = cdf + xv * inv_sqrt_2pi * (T(-0.5) * xv.square()).exp();
            Map(x.ensure_grad().data(), n) += ConstMap(out.grad().data(), n) * deriv;
        });
    }
    return out;
}

/// out[i] = f(omega0 * in[i]) through Eigen's packet math. Every element goes
/// through the same vector path (aligned, padded chunks), so results do not
/// depend on an element's position.
template <typename T, typename F>
void map_scaled(const T* in, T* out, std::size_t n, T omega0, F f) {
    using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
    constexpr std::size_t kChunk = 4096;
    Array buf(kChunk);
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t len = std::min(kChunk, n - start);
        buf.setZero();
        std::copy(in + start, in + start + len, buf.data());
        buf = f(buf * omega0);
        std::copy(buf.data(), buf.data() + len, out + start);
    }
}

template <typename T>
BasicTensor<T> sine(const BasicTensor<T>& x, T omega0) {
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(x.shape(), rec);
    map_scaled(x.raw(), out.raw(), x.numel(), omega0, [](const auto& a) { return a.sin(); });
    check_finite(out, "sine");
    if (rec) {
        detail::record<T>("sine", [x, out, omega0]() mutable {
            if (!out.has_grad()) return;
            std::vector<T> c(x.numel());
            map_scaled(x.raw(), c.data(), x.numel(), omega0, [](const auto& a) { return a.cos(); });
            const T* g = out.grad().data();
            T* dx = x.ensure_grad().data();
            for (std::size_t i = 0; i < c.size(); ++i) dx[i] += g[i] * omega0 * c[i];
        });
    }
    return out;
}

template <typename T>
BasicTensor<T> clamp(const BasicTensor<T>& x, T lo, T hi) {
    return unary(x, "clamp", [lo, hi](T v) { return std::clamp(v, lo, hi); },
                 [lo, hi](T v, T) { return (v >= lo && v <= hi) ? T(1) : T(0); });
}

// ---- reductions ------------------------------------------------------------

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(Shape{}, rec);
    double acc = 0;
    for (T v : x.data()) acc += v;
    out.data()[0] = static_cast<T>(acc);
    check_finite(out, "sum");
    if (rec) {
        detail::record<T>("sum", [x, out]() mutable {
            if (!out.has_grad()) return;
            const T g = out.grad()[0];
            for (T& d : x.ensure_grad()) d += g;
        });
    }
    return out;
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
    if (x.numel() == 0) throw DimensionError("mean of an empty tensor");
    return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

namespace {

enum class ReduceKind { Sum, Max };

template <typename T>
BasicTensor<T> reduce(const BasicTensor<T>& x, const std::vector<int>& axes, ReduceKind kind, const char* name) {
    const int r = x.rank();
    Shape out_shape = x.shape();
    for (int a : axes) out_shape[detail::normalize_axis(a, r)] = 1;
    if (x.numel() == 0) throw DimensionError(std::string(name) + " of an empty tensor");
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(out_shape, rec);
    // Iterate over x; map each element to its output slot via stride-0 axes.
    const auto so = detail::broadcast_strides(out_shape, x.shape());
    const std::vector<std::size_t> sx = detail::broadcast_strides(x.shape(), x.shape());
    T* po = out.raw();
    const T* px = x.raw();
    std::vector<std::size_t> argmax;
    std::vector<double> sums;
    if (kind == ReduceKind::Sum) sums.assign(out.numel(), 0.0);
    if (kind == ReduceKind::Max) {
        std::fill(po, po + out.numel(), -std::numeric_limits<T>::infinity());
        argmax.assign(out.numel(), 0);
    }
    detail::for_each_broadcast(x.shape(), sx, so, [&](std::size_t, std::size_t ix, std::size_t io) {
        if (kind == ReduceKind::Sum) {
            sums[io] += px[ix];
        } else if (px[ix] > po[io]) {
            po[io] = px[ix];
            argmax[io] = ix;
        }
    });
    for (std::size_t o = 0; o < sums.size(); ++o) po[o] = static_cast<T>(sums[o]);
    check_finite(out, name);
    if (rec) {
        detail::record<T>(name, [x, out, kind, so, sx, argmax = std::move(argmax)]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            T* dx = x.ensure_grad().data();
            if (kind == ReduceKind::Max) {
                for (std::size_t o = 0; o < out.numel(); ++o) dx[argmax[o]] += g[o];
                return;
            }
            detail::for_each_broadcast(x.shape(), sx, so,
                                       [&](std::size_t, std::size_t ix, std::size_t io) { dx[ix] += g[io]; });
        });
    }
    return out;
}

}  // namespace

template <typename T>
BasicTensor<T> reduce_sum(const BasicTensor<T>& x, const std::vector<int>& axes) {
    return reduce(x, axes, ReduceKind::Sum, "reduce_sum");
}

template <typename T>
BasicTensor<T> reduce_mean(const BasicTensor<T>& x, const std::vector<int>& axes) {
    std::size_t count = 1;
    for (int a : axes) count *= static_cast<std::size_t>(x.dim(a));
    return scale(reduce_sum(x, axes), T(1) / static_cast<T>(count));
}

template <typename T>
BasicTensor<T> reduce_max(const BasicTensor<T>& x, const std::vector<int>& axes) {
    return reduce(x, axes, ReduceKind::Max, "reduce_max");
}

#define NEUBTF_INSTANTIATE(T)                                                              \
    template void check_finite(const BasicTensor<T>&, const char*);                        \
    template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);             \
    template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);             \
    template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);             \
    template BasicTensor<T> scale(const BasicTensor<T>&, T);                               \
    template BasicTensor<T> add_scalar(const BasicTensor<T>&, T);                          \
    template BasicTensor<T> abs(const BasicTensor<T>&);                                    \
    template BasicTensor<T> square(const BasicTensor<T>&);                                 \
    template BasicTensor<T> exp(const BasicTensor<T>&);                                    \
    template BasicTensor<T> log1p(const BasicTensor<T>&);                                  \
    template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                \
    template BasicTensor<T> gelu(const BasicTensor<T>&);                                   \
    template BasicTensor<T> sine(const BasicTensor<T>&, T);                                \
    template BasicTensor<T> clamp(const BasicTensor<T>&, T, T);                            \
    template BasicTensor<T> sum(const BasicTensor<T>&);                                    \
    template BasicTensor<T> mean(const BasicTensor<T>&);                                   \
    template BasicTensor<T> reduce_sum(const BasicTensor<T>&, const std::vector<int>&);    \
    template BasicTensor<T> reduce_mean(const BasicTensor<T>&, const std::vector<int>&);   \
    template BasicTensor<T> reduce_max(const BasicTensor<T>&, const std::vector<int>&);

NEUBTF_INSTANTIATE(float)
NEUBTF_INSTANTIATE(double)
#undef NEUBTF_INSTANTIATE

}  // namespace neubtf::tensor
