// SPDX-License-Identifier: Apache-2.0
#include "neubtf/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "neubtf/common/error.hpp"

namespace neubtf::eval {

namespace {

void require_same_extents(const Image& a, const Image& b, const char* metric) {
    if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
        throw DimensionError(std::string(metric) + ": images differ in extent");
    }
    if (a.empty()) throw DimensionError(std::string(metric) + ": empty images");
}

std::vector<double> gaussian_window() {
    std::vector<double> k(kSsimWindow);
    double total = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        total += k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    }
    for (double& v : k) v /= total;
    return k;
}

/// Valid-region separable filtering of one channel.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int oh = h - n + 1, ow = w - n + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
    require_same_extents(a, b, "psnr");
    if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = double(a.pixels()[i]) - b.pixels()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Image& a, const Image& b, double peak) {
    require_same_extents(a, b, "ssim");
    const int h = a.height(), w = a.width(), ch = a.channels();
    if (h < kSsimWindow || w < kSsimWindow) {
        throw DimensionError("ssim: images must be at least " + std::to_string(kSsimWindow) + " texels per side");
    }
    const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
    const auto k = gaussian_window();
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    double total = 0.0;
    std::size_t count = 0;
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (int c = 0; c < ch; ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
            x[i] = a.pixels()[i * ch + c];
            y[i] = b.pixels()[i * ch + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, h, w, k), my = filter_valid(y, h, w, k);
        const auto sxx = filter_valid(xx, h, w, k), syy = filter_valid(yy, h, w, k), sxy = filter_valid(xy, h, w, k);
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cov = sxy[i] - mx[i] * my[i];
            total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                     ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        count += mx.size();
    }
    return total / static_cast<double>(count);
}

}  // namespace neubtf::eval
