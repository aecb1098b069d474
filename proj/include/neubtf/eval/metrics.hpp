// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "neubtf/common/image.hpp"

namespace neubtf::eval {

/// PSNR of equally-sized images, 10 log10(peak^2 / MSE), capped at 99 dB.
double psnr(const Image& a, const Image& b, double peak = 1.0);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean local SSIM over every valid 11 x 11 Gaussian-window position and
/// channel. Throws DimensionError when an extent is below the window.
double ssim(const Image& a, const Image& b, double peak = 1.0);

}  // namespace neubtf::eval
