// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "neubtf/tensor/tape.hpp"
#include "neubtf/tensor/tensor.hpp"

// Differentiable operators. Each is defined for float and double tensors.
// Spatial operators use NCHW layout. Every forward result is checked for
// non-finite values (NumericError).
namespace neubtf::tensor {

// ---- elementwise -----------------------------------------------------------

/// Binary ops broadcast inputs of equal rank along extent-1 axes.
template <typename T> BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T> BasicTensor<T> scale(const BasicTensor<T>& x, T factor);
template <typename T> BasicTensor<T> add_scalar(const BasicTensor<T>& x, T value);
template <typename T> BasicTensor<T> abs(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> square(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> exp(const BasicTensor<T>& x);
/// log(1 + x); DomainError when any x <= -1.
template <typename T> BasicTensor<T> log1p(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> sigmoid(const BasicTensor<T>& x);
/// x * Phi(x) with the exact Gaussian CDF.
template <typename T> BasicTensor<T> gelu(const BasicTensor<T>& x);
/// sin(omega0 * x).
template <typename T> BasicTensor<T> sine(const BasicTensor<T>& x, T omega0);
template <typename T> BasicTensor<T> clamp(const BasicTensor<T>& x, T lo, T hi);

// ---- reductions ------------------------------------------------------------

template <typename T> BasicTensor<T> sum(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> mean(const BasicTensor<T>& x);
/// Reduce over `axes`, keeping them as extent-1 axes.
template <typename T> BasicTensor<T> reduce_sum(const BasicTensor<T>& x, const std::vector<int>& axes);
template <typename T> BasicTensor<T> reduce_mean(const BasicTensor<T>& x, const std::vector<int>& axes);
/// Gradient flows to the first maximal element of each reduced group.
template <typename T> BasicTensor<T> reduce_max(const BasicTensor<T>& x, const std::vector<int>& axes);

// ---- shape -----------------------------------------------------------------

template <typename T> BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);
template <typename T> BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, int axis);
/// Wraps `amount` texels onto every border of the two trailing axes (the only axis of a
/// rank-1 tensor); amount must be below each padded extent.
template <typename T> BasicTensor<T> pad_circular(const BasicTensor<T>& x, int amount);
/// Cyclic shift of the two trailing axes: out[y, x] = in[y - dy, x - dx].
template <typename T> BasicTensor<T> roll(const BasicTensor<T>& x, int dy, int dx);
template <typename T> BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, int factor);

// ---- network layers ----------------------------------------------------------

enum class Padding { Circular, Zero };

struct Conv2dOptions {
    int stride = 1;
    Padding padding = Padding::Circular;
    int groups = 1;
};

/// "Same" convolution: padding floor(k/2) per side, output extent ceil(H / stride).
/// kernel is O x (C / groups) x kh x kw with odd kh, kw; bias (extent O) is optional.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel, const BasicTensor<T>& bias,
                      const Conv2dOptions& options = {});

/// Normalizes over axis 1 at every other position, then applies per-channel gamma and beta.
template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                          T eps = T(1e-5));

/// N x C x H x W -> N x C x C, G = F F^T / (C * H * W) with F the C x HW feature matrix.
template <typename T> BasicTensor<T> gram(const BasicTensor<T>& x);

/// Unnormalized forward DFT over the two trailing axes of a real tensor.
/// Output appends an axis of extent 2 holding (real, imaginary).
template <typename T> BasicTensor<T> fft2(const BasicTensor<T>& x);

// ---- non-differentiable helpers -----------------------------------------------

/// In-place 2D DFT of a row-major height x width complex grid. `inverse`
/// uses the conjugate kernel and does not divide by height * width.
void dft2_inplace(std::vector<std::complex<double>>& grid, int height, int width, bool inverse = false);

/// Throws NumericError naming `op` if any value is NaN or infinite.
template <typename T> void check_finite(const BasicTensor<T>& x, const char* op);

}  // namespace neubtf::tensor
