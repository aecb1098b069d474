// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "neubtf/common/error.hpp"

namespace neubtf {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

/// Append-only little-endian byte buffer.
class ByteWriter {
public:
    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }

    void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    void put_bytes(std::span<const std::uint8_t> s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::size_t size() const { return bytes_.size(); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader. Every failure is a FormatError that
/// carries the offending byte offset.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string context)
        : bytes_(bytes), context_(std::move(context)) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get(std::string_view field) {
        require(sizeof(T), field);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string(std::size_t length, std::string_view field) {
        require(length, field);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), length);
        pos_ += length;
        return s;
    }

    std::span<const std::uint8_t> get_span(std::size_t length, std::string_view field) {
        require(length, field);
        auto s = bytes_.subspan(pos_, length);
        pos_ += length;
        return s;
    }

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }
    [[noreturn]] void fail_at(const std::string& what, std::size_t offset) const {
        throw FormatError(context_ + ": " + what, offset);
    }

private:
    void require(std::size_t n, std::string_view field) const {
        if (bytes_.size() - pos_ < n) {
            fail("truncated while reading " + std::string(field) + " (need " + std::to_string(n) +
                 " bytes, " + std::to_string(bytes_.size() - pos_) + " left)");
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::string context_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// IEEE binary16 conversion with round-to-nearest-even.
std::uint16_t float_to_half(float value);
float half_to_float(std::uint16_t bits);

}  // namespace neubtf
