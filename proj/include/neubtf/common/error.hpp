// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neubtf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed container bytes. `offset` is the byte position where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    explicit FormatError(const std::string& what) : Error(what) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_ = 0;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// Tensor or image extents do not satisfy an operation's shape contract.
class DimensionError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace neubtf
