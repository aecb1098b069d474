// SPDX-License-Identifier: Apache-2.0
#include "neubtf/common/image.hpp"

#include <algorithm>
#include <cmath>

#include "neubtf/common/error.hpp"

namespace neubtf {

namespace {

int wrap_index(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

struct Tap {
    int index;
    double weight;
};

// Source taps for each output sample of a 1D box resample with period n_in.
// Output sample o covers the source interval [(origin + o) * ratio, (origin + o + 1) * ratio).
std::vector<std::vector<Tap>> area_taps(int n_in, int n_out, double ratio, int origin) {
    std::vector<std::vector<Tap>> taps(n_out);
    for (int o = 0; o < n_out; ++o) {
        const double lo = (origin + o) * ratio;
        const double hi = (origin + o + 1) * ratio;
        for (int s = static_cast<int>(std::floor(lo)); s < hi; ++s) {
            const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
            if (w > 0.0) taps[o].push_back({wrap_index(s, n_in), w / ratio});
        }
    }
    return taps;
}

}  // namespace

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels),
      pixels_(static_cast<std::size_t>(height) * width * channels, fill) {
    if (height < 0 || width < 0 || channels < 0) throw DimensionError("negative image extent");
}

Image::Image(int height, int width, int channels, std::vector<float> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw DimensionError("image buffer size does not match " + std::to_string(height) + "x" +
                             std::to_string(width) + "x" + std::to_string(channels));
    }
}

float Image::wrapped(int y, int x, int c) const {
    return at(wrap_index(y, height_), wrap_index(x, width_), c);
}

float tonemap(float x) { return x / (1.0f + x); }

Image tonemap(const Image& image) {
    Image out = image;
    for (float& v : out.pixels()) v = tonemap(v);
    return out;
}

Image roll(const Image& image, int dy, int dx) {
    Image out(image.height(), image.width(), image.channels());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < image.channels(); ++c) out.at(y, x, c) = image.wrapped(y - dy, x - dx, c);
    return out;
}

Image tile(const Image& image, int ty, int tx) {
    Image out(image.height() * ty, image.width() * tx, image.channels());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < image.channels(); ++c)
                out.at(y, x, c) = image.at(y % image.height(), x % image.width(), c);
    return out;
}

Image resample_area(const Image& image, int out_height, int out_width) {
    if (out_height <= 0 || out_width <= 0) throw DimensionError("resample target must be non-empty");
    if (out_height == image.height() && out_width == image.width()) return image;
    return scaled_crop(image, static_cast<double>(out_height) / image.height(),
                       static_cast<double>(out_width) / image.width(), 0, 0, out_height, out_width);
}

Image scaled_crop(const Image& image, double scale_y, double scale_x, int origin_y, int origin_x, int out_height,
                  int out_width) {
    if (out_height <= 0 || out_width <= 0) throw DimensionError("crop must be non-empty");
    if (!(scale_y > 0.0) || !(scale_x > 0.0)) throw DimensionError("scale must be positive");
    const auto ty = area_taps(image.height(), out_height, 1.0 / scale_y, origin_y);
    const auto tx = area_taps(image.width(), out_width, 1.0 / scale_x, origin_x);
    const int channels = image.channels();
    Image out(out_height, out_width, channels);
    std::vector<double> acc(channels);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (const Tap& a : ty[y])
                for (const Tap& b : tx[x])
                    for (int c = 0; c < channels; ++c) acc[c] += a.weight * b.weight * image.at(a.index, b.index, c);
            for (int c = 0; c < channels; ++c) out.at(y, x, c) = static_cast<float>(acc[c]);
        }
    }
    return out;
}

}  // namespace neubtf
