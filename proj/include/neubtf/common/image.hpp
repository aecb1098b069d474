// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace neubtf {

/// Interleaved row-major float image: pixel (y, x) channel c lives at
/// (y * width + x) * channels + c.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, float fill = 0.0f);
    Image(int height, int width, int channels, std::vector<float> pixels);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    float& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }
    float at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

    /// Wrap-addressed access; any integer coordinate is valid.
    float wrapped(int y, int x, int c) const;

    std::span<float> pixels() { return pixels_; }
    std::span<const float> pixels() const { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> pixels_;
};

/// x / (1 + x), the HDR -> [0, 1) mapping used for guidance inputs and metrics.
float tonemap(float x);
Image tonemap(const Image& image);

/// Cyclic shift: out(y, x) = in(y - dy, x - dx).
Image roll(const Image& image, int dy, int dx);

/// Repeats the image `ty` times vertically and `tx` times horizontally.
Image tile(const Image& image, int ty, int tx);

/// Box-filter resample of a wrap-addressed image to the given size. Each
/// output pixel averages the exact source area it covers.
Image resample_area(const Image& image, int out_height, int out_width);

/// Scales the wrap-addressed image by (scale_y, scale_x) with the same box
/// filter, then crops out_height x out_width starting at the integer origin
/// of the scaled grid. Scale 1 with any origin is an exact cyclic crop.
Image scaled_crop(const Image& image, double scale_y, double scale_x, int origin_y, int origin_x, int out_height,
                  int out_width);

}  // namespace neubtf
