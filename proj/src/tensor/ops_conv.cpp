// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <memory>

#include <Eigen/Core>

#include "op_util.hpp"

namespace neubtf::tensor {

using detail::make_output;
using detail::should_record;

namespace {

struct ConvGeometry {
    int n, c, h, w;
    int o, cg, og, kh, kw;
    int stride, groups;
    int oh, ow;
    int ph, pw;
    int hp, wp;  // padded extents actually touched by the kernel
    Padding padding;
};

inline int wrap(int i, int n) {
    const int m = i % n;
    return m < 0 ? m + n : m;
}

template <typename T>
ConvGeometry geometry(const BasicTensor<T>& input, const BasicTensor<T>& kernel, const BasicTensor<T>& bias,
                      const Conv2dOptions& opt) {
    detail::require_rank(input, 4, "conv2d input");
    detail::require_rank(kernel, 4, "conv2d kernel");
    ConvGeometry g{};
    g.n = input.dim(0);
    g.c = input.dim(1);
    g.h = input.dim(2);
    g.w = input.dim(3);
    g.o = kernel.dim(0);
    g.kh = kernel.dim(2);
    g.kw = kernel.dim(3);
    g.stride = opt.stride;
    g.groups = opt.groups;
    g.padding = opt.padding;
    if (g.stride < 1) throw DimensionError("conv2d: stride must be positive");
    if (g.groups < 1 || g.c % g.groups != 0 || g.o % g.groups != 0) {
        throw DimensionError("conv2d: groups " + std::to_string(g.groups) + " must divide input channels " +
                             std::to_string(g.c) + " and output channels " + std::to_string(g.o));
    }
    g.cg = g.c / g.groups;
    g.og = g.o / g.groups;
    if (kernel.dim(1) != g.cg) {
        throw DimensionError("conv2d: kernel " + to_string(kernel.shape()) + " expects " +
                             std::to_string(kernel.dim(1) * g.groups) + " input channels, input has " +
                             std::to_string(g.c));
    }
    if (g.kh % 2 == 0 || g.kw % 2 == 0) throw DimensionError("conv2d: kernel extents must be odd");
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.o)) {
        throw DimensionError("conv2d: bias shape " + to_string(bias.shape()) + " does not match " +
                             std::to_string(g.o) + " output channels");
    }
    g.oh = (g.h + g.stride - 1) / g.stride;
    g.ow = (g.w + g.stride - 1) / g.stride;
    g.ph = g.kh / 2;
    g.pw = g.kw / 2;
    g.hp = (g.oh - 1) * g.stride + g.kh;
    g.wp = (g.ow - 1) * g.stride + g.kw;
    return g;
}

template <typename T>
T total(const T* a, std::size_t n) {
    constexpr std::size_t kLanes = 16;
    T lanes[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) lanes[j] += a[i + j];
    T tail = 0;
    for (; i < n; ++i) tail += a[i];
    for (std::size_t j = 0; j < kLanes; ++j) tail += lanes[j];
    return tail;
}

/// Full channel mixing, where a matrix product beats direct loops.
inline bool dense(const ConvGeometry& g) { return g.groups == 1 && g.c > 1; }

/// Copies each input plane into a padded plane of hp x wp.
template <typename T>
std::vector<T> pad_input(const T* x, const ConvGeometry& g) {
    std::vector<T> out(static_cast<std::size_t>(g.n) * g.c * g.hp * g.wp, T(0));
    std::vector<int> sx(g.wp);
    for (int i = 0; i < g.wp; ++i) sx[i] = i - g.pw;
    for (std::size_t plane = 0; plane < static_cast<std::size_t>(g.n) * g.c; ++plane) {
        const T* src = x + plane * g.h * g.w;
        T* dst = out.data() + plane * g.hp * g.wp;
        for (int y = 0; y < g.hp; ++y) {
            int sy = y - g.ph;
            if (g.padding == Padding::Circular) {
                sy = wrap(sy, g.h);
            } else if (sy < 0 || sy >= g.h) {
                continue;
            }
            const T* srow = src + static_cast<std::size_t>(sy) * g.w;
            T* drow = dst + static_cast<std::size_t>(y) * g.wp;
            for (int x0 = 0; x0 < g.wp; ++x0) {
                int s = sx[x0];
                if (g.padding == Padding::Circular) {
                    s = wrap(s, g.w);
                } else if (s < 0 || s >= g.w) {
                    continue;
                }
                drow[x0] = srow[s];
            }
        }
    }
    return out;
}

/// Adds a padded-plane gradient back onto the unpadded input gradient.
template <typename T>
void fold_padded(const std::vector<T>& dpad, T* dx, const ConvGeometry& g) {
    for (std::size_t plane = 0; plane < static_cast<std::size_t>(g.n) * g.c; ++plane) {
        const T* src = dpad.data() + plane * g.hp * g.wp;
        T* dst = dx + plane * g.h * g.w;
        for (int y = 0; y < g.hp; ++y) {
            int sy = y - g.ph;
            if (g.padding == Padding::Circular) {
                sy = wrap(sy, g.h);
            } else if (sy < 0 || sy >= g.h) {
                continue;
            }
            for (int x0 = 0; x0 < g.wp; ++x0) {
                int s = x0 - g.pw;
                if (g.padding == Padding::Circular) {
                    s = wrap(s, g.w);
                } else if (s < 0 || s >= g.w) {
                    continue;
                }
                dst[static_cast<std::size_t>(sy) * g.w + s] += src[static_cast<std::size_t>(y) * g.wp + x0];
            }
        }
    }
}

template <typename T>
void pointwise_forward(const T* x, const T* w, const T* b, T* y, const ConvGeometry& g) {
    const std::size_t p = static_cast<std::size_t>(g.h) * g.w;
    for (int n = 0; n < g.n; ++n) {
        const T* xn = x + static_cast<std::size_t>(n) * g.c * p;
        T* yn = y + static_cast<std::size_t>(n) * g.o * p;
        for (int o = 0; o < g.o; ++o) {
            T* row = yn + o * p;
            const T b0 = b ? b[o] : T(0);
            std::fill(row, row + p, b0);
            const int grp = o / g.og;
            for (int ci = 0; ci < g.cg; ++ci) {
                const T wv = w[static_cast<std::size_t>(o) * g.cg + ci];
                const T* xr = xn + static_cast<std::size_t>(grp * g.cg + ci) * p;
                for (std::size_t i = 0; i < p; ++i) row[i] += wv * xr[i];
            }
        }
    }
}

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
void pointwise_backward(const T* x, const T* w, const T* gy, T* dx, T* dw, T* db, const ConvGeometry& g) {
    const Eigen::Index p = static_cast<Eigen::Index>(g.h) * g.w;
    for (int n = 0; n < g.n; ++n) {
        const T* xn = x + static_cast<std::size_t>(n) * g.c * p;
        const T* gn = gy + static_cast<std::size_t>(n) * g.o * p;
        if (db)
            for (int o = 0; o < g.o; ++o) db[o] += total(gn + o * p, p);
        for (int grp = 0; grp < g.groups; ++grp) {
            ConstMatMap<T> gm(gn + static_cast<std::size_t>(grp) * g.og * p, g.og, p);
            ConstMatMap<T> xm(xn + static_cast<std::size_t>(grp) * g.cg * p, g.cg, p);
            const std::size_t wofs = static_cast<std::size_t>(grp) * g.og * g.cg;
            if (dw) MatMap<T>(dw + wofs, g.og, g.cg).noalias() += gm * xm.transpose();
            if (dx) {
                MatMap<T>(dx + (static_cast<std::size_t>(n) * g.c + grp * g.cg) * p, g.cg, p).noalias() +=
                    ConstMatMap<T>(w + wofs, g.og, g.cg).transpose() * gm;
            }
        }
    }
}

template <typename T>
void general_forward(const std::vector<T>& pad, const T* w, const T* b, T* y, const ConvGeometry& g) {
    const std::size_t pplane = static_cast<std::size_t>(g.hp) * g.wp;
    const std::size_t oplane = static_cast<std::size_t>(g.oh) * g.ow;
    const int s = g.stride;
    for (int n = 0; n < g.n; ++n) {
        for (int o = 0; o < g.o; ++o) {
            T* out = y + (static_cast<std::size_t>(n) * g.o + o) * oplane;
            std::fill(out, out + oplane, b ? b[o] : T(0));
            const int grp = o / g.og;
            for (int ci = 0; ci < g.cg; ++ci) {
                const T* src = pad.data() + (static_cast<std::size_t>(n) * g.c + grp * g.cg + ci) * pplane;
                const T* wk = w + (static_cast<std::size_t>(o) * g.cg + ci) * g.kh * g.kw;
                for (int ky = 0; ky < g.kh; ++ky) {
                    for (int kx = 0; kx < g.kw; ++kx) {
                        const T wv = wk[ky * g.kw + kx];
                        for (int oy = 0; oy < g.oh; ++oy) {
                            const T* srow = src + static_cast<std::size_t>(oy * s + ky) * g.wp + kx;
                            T* orow = out + static_cast<std::size_t>(oy) * g.ow;
                            if (s == 1) {
                                for (int ox = 0; ox < g.ow; ++ox) orow[ox] += wv * srow[ox];
                            } else {
                                for (int ox = 0; ox < g.ow; ++ox) orow[ox] += wv * srow[ox * s];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Depthwise-style direct backward; accumulator lanes persist across rows.
template <typename T>
void direct_backward(const std::vector<T>& pad, const T* w, const T* gy, std::vector<T>* dpad, T* dw,
                     const ConvGeometry& g) {
    const std::size_t pplane = static_cast<std::size_t>(g.hp) * g.wp;
    const std::size_t oplane = static_cast<std::size_t>(g.oh) * g.ow;
    const int s = g.stride;
    constexpr int kLanes = 8;
    for (int n = 0; n < g.n; ++n) {
        for (int o = 0; o < g.o; ++o) {
            const T* go = gy + (static_cast<std::size_t>(n) * g.o + o) * oplane;
            const int grp = o / g.og;
            for (int ci = 0; ci < g.cg; ++ci) {
                const std::size_t plane = (static_cast<std::size_t>(n) * g.c + grp * g.cg + ci) * pplane;
                const T* src = pad.data() + plane;
                T* dsrc = dpad ? dpad->data() + plane : nullptr;
                const std::size_t wbase = (static_cast<std::size_t>(o) * g.cg + ci) * g.kh * g.kw;
                for (int ky = 0; ky < g.kh; ++ky) {
                    for (int kx = 0; kx < g.kw; ++kx) {
                        const T wv = w[wbase + ky * g.kw + kx];
                        T lanes[kLanes] = {};
                        T acc = 0;
                        for (int oy = 0; oy < g.oh; ++oy) {
                            const T* srow = src + static_cast<std::size_t>(oy * s + ky) * g.wp + kx;
                            const T* grow = go + static_cast<std::size_t>(oy) * g.ow;
                            if (dw) {
                                int ox = 0;
                                if (s == 1) {
                                    for (; ox + kLanes <= g.ow; ox += kLanes)
                                        for (int j = 0; j < kLanes; ++j) lanes[j] += grow[ox + j] * srow[ox + j];
                                }
                                for (; ox < g.ow; ++ox) acc += grow[ox] * srow[ox * s];
                            }
                            if (dsrc) {
                                T* drow = dsrc + (srow - src);
                                for (int ox = 0; ox < g.ow; ++ox) drow[ox * s] += wv * grow[ox];
                            }
                        }
                        if (dw) {
                            for (int j = 0; j < kLanes; ++j) acc += lanes[j];
                            dw[wbase + ky * g.kw + kx] += acc;
                        }
                    }
                }
            }
        }
    }
}

/// Column p of `col` holds the receptive field of output pixel p of item n.
template <typename T>
void im2col(const std::vector<T>& pad, int n, const ConvGeometry& g, RowMatrix<T>& col) {
    const std::size_t pplane = static_cast<std::size_t>(g.hp) * g.wp;
    const std::size_t oplane = static_cast<std::size_t>(g.oh) * g.ow;
    const T* padn = pad.data() + static_cast<std::size_t>(n) * g.c * pplane;
    for (int ci = 0; ci < g.c; ++ci)
        for (int ky = 0; ky < g.kh; ++ky)
            for (int kx = 0; kx < g.kw; ++kx) {
                T* dst = col.data() + ((static_cast<std::size_t>(ci) * g.kh + ky) * g.kw + kx) * oplane;
                for (int oy = 0; oy < g.oh; ++oy) {
                    const T* srow = padn + ci * pplane + static_cast<std::size_t>(oy * g.stride + ky) * g.wp + kx;
                    for (int ox = 0; ox < g.ow; ++ox) dst[oy * g.ow + ox] = srow[ox * g.stride];
                }
            }
}

template <typename T>
void gemm_forward(const std::vector<T>& pad, const T* w, const T* b, T* y, const ConvGeometry& g) {
    const Eigen::Index oplane = static_cast<Eigen::Index>(g.oh) * g.ow;
    const Eigen::Index rows = static_cast<Eigen::Index>(g.c) * g.kh * g.kw;
    RowMatrix<T> col(rows, oplane);
    for (int n = 0; n < g.n; ++n) {
        im2col(pad, n, g, col);
        MatMap<T> out(y + static_cast<std::size_t>(n) * g.o * oplane, g.o, oplane);
        out.noalias() = ConstMatMap<T>(w, g.o, rows) * col;
        if (b)
            for (int o = 0; o < g.o; ++o) out.row(o).array() += b[o];
    }
}

/// Dense-kernel backward through an im2col matrix and two matrix products.
template <typename T>
void gemm_backward(const std::vector<T>& pad, const T* w, const T* gy, std::vector<T>* dpad, T* dw,
                   const ConvGeometry& g) {
    const std::size_t pplane = static_cast<std::size_t>(g.hp) * g.wp;
    const Eigen::Index oplane = static_cast<Eigen::Index>(g.oh) * g.ow;
    const Eigen::Index rows = static_cast<Eigen::Index>(g.c) * g.kh * g.kw;
    const int s = g.stride;
    RowMatrix<T> col(rows, oplane), dcol;
    for (int n = 0; n < g.n; ++n) {
        im2col(pad, n, g, col);
        ConstMatMap<T> gm(gy + static_cast<std::size_t>(n) * g.o * oplane, g.o, oplane);
        if (dw) MatMap<T>(dw, g.o, rows).noalias() += gm * col.transpose();
        if (!dpad) continue;
        dcol.noalias() = ConstMatMap<T>(w, g.o, rows).transpose() * gm;
        T* dpadn = dpad->data() + static_cast<std::size_t>(n) * g.c * pplane;
        for (int ci = 0; ci < g.c; ++ci)
            for (int ky = 0; ky < g.kh; ++ky)
                for (int kx = 0; kx < g.kw; ++kx) {
                    const T* src = dcol.data() + ((static_cast<std::size_t>(ci) * g.kh + ky) * g.kw + kx) * oplane;
                    for (int oy = 0; oy < g.oh; ++oy) {
                        T* drow = dpadn + ci * pplane + static_cast<std::size_t>(oy * s + ky) * g.wp + kx;
                        for (int ox = 0; ox < g.ow; ++ox) drow[ox * s] += src[oy * g.ow + ox];
                    }
                }
    }
}

template <typename T>
void general_backward(const std::vector<T>& pad, const T* w, const T* gy, std::vector<T>* dpad, T* dw, T* db,
                      const ConvGeometry& g) {
    const std::size_t oplane = static_cast<std::size_t>(g.oh) * g.ow;
    if (db)
        for (int n = 0; n < g.n; ++n)
            for (int o = 0; o < g.o; ++o) db[o] += total(gy + (static_cast<std::size_t>(n) * g.o + o) * oplane, oplane);
    if (dense(g)) {
        gemm_backward(pad, w, gy, dpad, dw, g);
    } else {
        direct_backward(pad, w, gy, dpad, dw, g);
    }
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel, const BasicTensor<T>& bias,
                      const Conv2dOptions& options) {
    const ConvGeometry g = geometry(input, kernel, bias, options);
    const bool rec = should_record<T>({&input, &kernel, &bias});
    auto out = make_output<T>(Shape{g.n, g.o, g.oh, g.ow}, rec);
    const T* b = bias.defined() ? bias.raw() : nullptr;
    const bool pointwise = g.kh == 1 && g.kw == 1 && g.stride == 1;
    std::shared_ptr<std::vector<T>> pad;
    if (pointwise) {
        pointwise_forward(input.raw(), kernel.raw(), b, out.raw(), g);
    } else {
        pad = std::make_shared<std::vector<T>>(pad_input(input.raw(), g));
        // Stride-1 output must commute exactly with cyclic shifts; the matrix
        // product's summation order depends on the column position.
        if (dense(g) && g.stride > 1) {
            gemm_forward(*pad, kernel.raw(), b, out.raw(), g);
        } else {
            general_forward(*pad, kernel.raw(), b, out.raw(), g);
        }
    }
    check_finite(out, "conv2d");
    if (rec) {
        detail::record<T>("conv2d", [input, kernel, bias, out, g, pointwise, pad]() mutable {
            if (!out.has_grad()) return;
            T* dx = input.requires_grad() ? input.ensure_grad().data() : nullptr;
            T* dw = kernel.requires_grad() ? kernel.ensure_grad().data() : nullptr;
            T* db = bias.defined() && bias.requires_grad() ? bias.ensure_grad().data() : nullptr;
            const T* gy = out.grad().data();
            if (pointwise) {
                pointwise_backward(input.raw(), kernel.raw(), gy, dx, dw, db, g);
                return;
            }
            std::vector<T> dpad;
            if (dx) dpad.assign(pad->size(), T(0));
            general_backward(*pad, kernel.raw(), gy, dx ? &dpad : nullptr, dw, db, g);
            if (dx) fold_padded(dpad, dx, g);
        });
    }
    return out;
}

template BasicTensor<float> conv2d(const BasicTensor<float>&, const BasicTensor<float>&, const BasicTensor<float>&,
                                   const Conv2dOptions&);
template BasicTensor<double> conv2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                    const BasicTensor<double>&, const Conv2dOptions&);

}  // namespace neubtf::tensor
