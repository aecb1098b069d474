// SPDX-License-Identifier: Apache-2.0
#include "neubtf/btf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>

#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"

namespace neubtf::btf {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

Image load_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());
    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw FormatError(path.string() + ": not a PNG file", 0);
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng initialisation failed");
    }
    // Containers live outside the setjmp region so a longjmp never skips their lifetime.
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0;
    std::size_t row_bytes = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": corrupt PNG data");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    png_set_expand(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);
    row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image image(static_cast<int>(height), static_cast<int>(width), 3);
    const bool wide = bit_depth == 16;
    const float scale = wide ? 1.0f / 65535.0f : 1.0f / 255.0f;
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                float v;
                if (wide) {
                    std::uint16_t s;
                    std::memcpy(&s, raw.data() + y * row_bytes + (x * 3 + c) * 2, 2);
                    v = s * scale;
                } else {
                    v = raw[y * row_bytes + x * 3 + c] * scale;
                }
                image.at(static_cast<int>(y), static_cast<int>(x), c) = srgb_to_linear(v);
            }
        }
    }
    return image;
}

void save_png(const Image& image, const std::filesystem::path& path, bool encode_srgb) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(image.height()) * image.width() * 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                float v = image.at(y, x, image.channels() == 1 ? 0 : c);
                v = std::clamp(v, 0.0f, 1.0f);
                if (encode_srgb) v = linear_to_srgb(v);
                bytes[(static_cast<std::size_t>(y) * image.width() + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::lround(v * 255.0f));
            }
        }
    }
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(image.width());
    out.height = static_cast<png_uint_32>(image.height());
    out.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&out, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw IoError("cannot write " + path.string() + ": " + out.message);
    }
}

Image load_pfm(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    const std::string kind = token();
    if (kind != "PF" && kind != "Pf") throw FormatError(path.string() + ": bad PFM magic", 0);
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(token());
        height = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": malformed PFM header", pos);
    }
    ++pos;  // single whitespace byte before the raster
    const int channels = kind == "PF" ? 3 : 1;
    if (width <= 0 || height <= 0 || scale == 0.0) throw FormatError(path.string() + ": bad PFM header values", pos);
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < pos + count * 4) throw FormatError(path.string() + ": truncated PFM raster", bytes.size());
    const bool swap = scale > 0.0;  // positive scale means big-endian
    Image image(height, width, 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                std::uint32_t bits;
                std::memcpy(&bits, bytes.data() + pos + ((static_cast<std::size_t>(y) * width + x) * channels + c) * 4, 4);
                if (swap) bits = __builtin_bswap32(bits);
                float v;
                std::memcpy(&v, &bits, 4);
                // PFM rows run bottom to top.
                for (int k = (channels == 1 ? 0 : c); k < (channels == 1 ? 3 : c + 1); ++k)
                    image.at(height - 1 - y, x, k) = v;
            }
        }
    }
    return image;
}

void save_pfm(const Image& image, const std::filesystem::path& path) {
    const bool gray = image.channels() == 1;
    ByteWriter w;
    w.put_bytes(std::string(gray ? "Pf" : "PF") + "\n" + std::to_string(image.width()) + " " +
                std::to_string(image.height()) + "\n-1.0\n");
    for (int y = image.height() - 1; y >= 0; --y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < (gray ? 1 : 3); ++c) w.put<float>(image.at(y, x, c));
    write_file_bytes(path, w.bytes());
}

}  // namespace

float srgb_to_linear(float encoded) {
    const double v = encoded;
    return static_cast<float>(v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4));
}

float linear_to_srgb(float linear) {
    const double v = linear;
    return static_cast<float>(v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055);
}

Image load_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return load_png(path);
    if (ext == ".pfm") return load_pfm(path);
    throw FormatError("unsupported image extension `" + ext + "` (expected .png or .pfm)");
}

void save_image(const Image& image, const std::filesystem::path& path, bool encode_srgb) {
    if (image.channels() != 3 && image.channels() != 1) throw DimensionError("save_image expects 1 or 3 channels");
    const std::string ext = lower_extension(path);
    if (ext == ".png") return save_png(image, path, encode_srgb);
    if (ext == ".pfm") return save_pfm(image, path);
    throw FormatError("unsupported image extension `" + ext + "` (expected .png or .pfm)");
}

void validate_guidance(const Image& image, int stride) {
    if (image.channels() != 3) throw DimensionError("guidance must have 3 channels");
    if (image.height() % stride != 0 || image.width() % stride != 0 || image.height() == 0 || image.width() == 0) {
        std::ostringstream msg;
        msg << "guidance is " << image.height() << "x" << image.width() << "; both extents must be non-zero multiples of "
            << stride << " (crop or pad to " << (image.height() / stride) * stride << "x"
            << (image.width() / stride) * stride << ")";
        throw DimensionError(msg.str());
    }
    for (float v : image.pixels()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw ValidationError("guidance values must lie in [0, 1]; tone-map HDR input first");
        }
    }
}

GuidanceImage load_guidance(const std::filesystem::path& path, int stride) {
    Image image = load_image(path);
    validate_guidance(image, stride);
    return image;
}

}  // namespace neubtf::btf
