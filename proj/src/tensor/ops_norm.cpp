// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "op_util.hpp"

namespace neubtf::tensor {

using detail::make_output;
using detail::should_record;

template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta, T eps) {
    if (x.rank() < 2) throw DimensionError("layer_norm needs at least two axes, got " + to_string(x.shape()));
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t p = x.numel() / (static_cast<std::size_t>(n) * c);
    for (const auto* t : {&gamma, &beta}) {
        if (t->defined() && (t->rank() != 1 || t->dim(0) != c)) {
            throw DimensionError("layer_norm: affine shape " + to_string(t->shape()) + " does not match " +
                                 std::to_string(c) + " channels");
        }
    }
    const bool rec = should_record<T>({&x, &gamma, &beta});
    auto out = make_output<T>(x.shape(), rec);
    std::vector<T> xhat(x.numel());
    std::vector<T> rstd(static_cast<std::size_t>(n) * p);
    std::vector<double> mu(p), var(p);
    for (int b = 0; b < n; ++b) {
        const T* xb = x.raw() + static_cast<std::size_t>(b) * c * p;
        std::fill(mu.begin(), mu.end(), 0.0);
        std::fill(var.begin(), var.end(), 0.0);
        for (int ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < p; ++i) mu[i] += xb[ch * p + i];
        for (std::size_t i = 0; i < p; ++i) mu[i] /= c;
        for (int ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < p; ++i) {
                const double d = xb[ch * p + i] - mu[i];
                var[i] += d * d;
            }
        T* rs = rstd.data() + static_cast<std::size_t>(b) * p;
        for (std::size_t i = 0; i < p; ++i) rs[i] = static_cast<T>(1.0 / std::sqrt(var[i] / c + eps));
        T* xh = xhat.data() + static_cast<std::size_t>(b) * c * p;
        T* yb = out.raw() + static_cast<std::size_t>(b) * c * p;
        for (int ch = 0; ch < c; ++ch) {
            const T gv = gamma.defined() ? gamma.raw()[ch] : T(1);
            const T bv = beta.defined() ? beta.raw()[ch] : T(0);
            for (std::size_t i = 0; i < p; ++i) {
                const T h = static_cast<T>((xb[ch * p + i] - mu[i]) * rs[i]);
                xh[ch * p + i] = h;
                yb[ch * p + i] = h * gv + bv;
            }
        }
    }
    check_finite(out, "layer_norm");
    if (rec) {
        detail::record<T>("layer_norm", [x, gamma, beta, out, n, c, p, xhat = std::move(xhat),
                                         rstd = std::move(rstd)]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            T* dg = gamma.defined() && gamma.requires_grad() ? gamma.ensure_grad().data() : nullptr;
            T* dbeta = beta.defined() && beta.requires_grad() ? beta.ensure_grad().data() : nullptr;
            T* dx = x.requires_grad() ? x.ensure_grad().data() : nullptr;
            std::vector<T> m1(p), m2(p);
            for (int b = 0; b < n; ++b) {
                const std::size_t base = static_cast<std::size_t>(b) * c * p;
                const T* gb = g + base;
                const T* xh = xhat.data() + base;
                for (int ch = 0; ch < c; ++ch) {
                    if (dg) {
                        T acc = 0;
                        for (std::size_t i = 0; i < p; ++i) acc += gb[ch * p + i] * xh[ch * p + i];
                        dg[ch] += acc;
                    }
                    if (dbeta) {
                        T acc = 0;
                        for (std::size_t i = 0; i < p; ++i) acc += gb[ch * p + i];
                        dbeta[ch] += acc;
                    }
                }
                if (!dx) continue;
                std::fill(m1.begin(), m1.end(), T(0));
                std::fill(m2.begin(), m2.end(), T(0));
                for (int ch = 0; ch < c; ++ch) {
                    const T gv = gamma.defined() ? gamma.raw()[ch] : T(1);
                    for (std::size_t i = 0; i < p; ++i) {
                        const T d = gb[ch * p + i] * gv;
                        m1[i] += d;
                        m2[i] += d * xh[ch * p + i];
                    }
                }
                const T inv_c = T(1) / static_cast<T>(c);
                const T* rs = rstd.data() + static_cast<std::size_t>(b) * p;
                for (int ch = 0; ch < c; ++ch) {
                    const T gv = gamma.defined() ? gamma.raw()[ch] : T(1);
                    for (std::size_t i = 0; i < p; ++i) {
                        const T d = gb[ch * p + i] * gv;
                        dx[base + ch * p + i] += rs[i] * (d - m1[i] * inv_c - xh[ch * p + i] * m2[i] * inv_c);
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
BasicTensor<T> gram(const BasicTensor<T>& x) {
    detail::require_rank(x, 4, "gram");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t p = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    const T norm = T(1) / (static_cast<T>(c) * static_cast<T>(p));
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(Shape{n, c, c}, rec);
    for (int b = 0; b < n; ++b) {
        const T* f = x.raw() + static_cast<std::size_t>(b) * c * p;
        T* gm = out.raw() + static_cast<std::size_t>(b) * c * c;
        for (int i = 0; i < c; ++i) {
            for (int j = i; j < c; ++j) {
                T acc = 0;
                for (std::size_t k = 0; k < p; ++k) acc += f[i * p + k] * f[j * p + k];
                gm[i * c + j] = gm[j * c + i] = acc * norm;
            }
        }
    }
    check_finite(out, "gram");
    if (rec) {
        detail::record<T>("gram", [x, out, n, c, p, norm]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            T* dx = x.ensure_grad().data();
            for (int b = 0; b < n; ++b) {
                const T* f = x.raw() + static_cast<std::size_t>(b) * c * p;
                const T* gb = g + static_cast<std::size_t>(b) * c * c;
                T* df = dx + static_cast<std::size_t>(b) * c * p;
                for (int i = 0; i < c; ++i) {
                    for (int j = 0; j < c; ++j) {
                        const T s = (gb[i * c + j] + gb[j * c + i]) * norm;
                        const T* fj = f + j * p;
                        T* di = df + i * p;
                        for (std::size_t k = 0; k < p; ++k) di[k] += s * fj[k];
                    }
                }
            }
        });
    }
    return out;
}

namespace {

struct DftScratch {
    std::vector<std::complex<double>> line;
    std::vector<std::complex<double>> twiddle;
};

/// twiddle[k] = exp(sign * 2 pi i k / n).
void fill_twiddles(DftScratch& s, int n, double sign) {
    s.twiddle.resize(n);
    for (int k = 0; k < n; ++k) s.twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * k / n);
}

void dft_line(std::complex<double>* data, std::size_t stride, int n, DftScratch& s) {
    auto& line = s.line;
    line.resize(n);
    for (int i = 0; i < n; ++i) line[i] = data[i * stride];
    if (n > 1 && (n & (n - 1)) == 0) {
        for (int i = 1, j = 0; i < n; ++i) {
            int bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(line[i], line[j]);
        }
        for (int len = 2; len <= n; len <<= 1) {
            const int step = n / len;
            for (int i = 0; i < n; i += len) {
                for (int k = 0; k < len / 2; ++k) {
                    const auto u = line[i + k];
                    const auto v = line[i + k + len / 2] * s.twiddle[k * step];
                    line[i + k] = u + v;
                    line[i + k + len / 2] = u - v;
                }
            }
        }
        for (int i = 0; i < n; ++i) data[i * stride] = line[i];
        return;
    }
    for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0;
        int idx = 0;
        for (int m = 0; m < n; ++m) {
            acc += line[m] * s.twiddle[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        data[k * stride] = acc;
    }
}

}  // namespace

void dft2_inplace(std::vector<std::complex<double>>& grid, int height, int width, bool inverse) {
    if (grid.size() != static_cast<std::size_t>(height) * width) {
        throw DimensionError("dft2_inplace: grid size does not match " + std::to_string(height) + "x" +
                             std::to_string(width));
    }
    const double sign = inverse ? 1.0 : -1.0;
    DftScratch scratch;
    fill_twiddles(scratch, width, sign);
    for (int y = 0; y < height; ++y) dft_line(grid.data() + static_cast<std::size_t>(y) * width, 1, width, scratch);
    fill_twiddles(scratch, height, sign);
    for (int x = 0; x < width; ++x) dft_line(grid.data() + x, width, height, scratch);
}

template <typename T>
BasicTensor<T> fft2(const BasicTensor<T>& x) {
    if (x.rank() < 2) throw DimensionError("fft2 needs at least two axes");
    const int h = x.dim(-2), w = x.dim(-1);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t planes = x.numel() / plane;
    Shape out_shape = x.shape();
    out_shape.push_back(2);
    const bool rec = should_record<T>({&x});
    auto out = make_output<T>(out_shape, rec);
    std::vector<std::complex<double>> grid(plane);
    for (std::size_t p = 0; p < planes; ++p) {
        const T* src = x.raw() + p * plane;
        for (std::size_t i = 0; i < plane; ++i) grid[i] = static_cast<double>(src[i]);
        dft2_inplace(grid, h, w);
        T* dst = out.raw() + p * plane * 2;
        for (std::size_t i = 0; i < plane; ++i) {
            dst[2 * i] = static_cast<T>(grid[i].real());
            dst[2 * i + 1] = static_cast<T>(grid[i].imag());
        }
    }
    check_finite(out, "fft2");
    if (rec) {
        detail::record<T>("fft2", [x, out, h, w, plane, planes]() mutable {
            if (!out.has_grad()) return;
            const T* g = out.grad().data();
            T* dx = x.ensure_grad().data();
            std::vector<std::complex<double>> grid(plane);
            for (std::size_t p = 0; p < planes; ++p) {
                const T* gp = g + p * plane * 2;
                for (std::size_t i = 0; i < plane; ++i) grid[i] = {static_cast<double>(gp[2 * i]), -static_cast<double>(gp[2 * i + 1])};
                dft2_inplace(grid, h, w);
                T* d = dx + p * plane;
                for (std::size_t i = 0; i < plane; ++i) d[i] += static_cast<T>(grid[i].real());
            }
        });
    }
    return out;
}

#define NEUBTF_INSTANTIATE(T)                                                                                 \
    template BasicTensor<T> layer_norm(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, T); \
    template BasicTensor<T> gram(const BasicTensor<T>&);                                                      \
    template BasicTensor<T> fft2(const BasicTensor<T>&);

NEUBTF_INSTANTIATE(float)
NEUBTF_INSTANTIATE(double)
#undef NEUBTF_INSTANTIATE

}  // namespace neubtf::tensor
