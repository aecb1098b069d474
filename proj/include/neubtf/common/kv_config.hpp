// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace neubtf {

/// Flat `key = value` text with `#` comments. Keys are kept sorted so the
/// serialized form is deterministic.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, std::string_view source = "config");

    bool contains(const std::string& key) const { return values_.contains(key); }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

std::string format_double(double value);
std::string format_int_list(const std::vector<int>& values);

}  // namespace neubtf
