// SPDX-License-Identifier: Apache-2.0
#include "neubtf/common/kv_config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "neubtf/common/error.hpp"

namespace neubtf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view source) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected `key = value`");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
        if (cfg.values_.contains(key)) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate key `" + key + "`");
        }
        cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
        if (end == text.size()) break;
    }
    return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key `" + key + "`");
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "`: `" + s + "` is not a number");
    }
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const std::string s = get_string(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("config key `" + key + "`: `" + s + "` is not an integer");
    }
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key) const {
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key `" + key + "`: `" + s + "` is not a boolean");
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
    const std::string s = get_string(key);
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
            throw ConfigError("config key `" + key + "`: `" + s + "` is not a comma-separated integer list");
        }
        out.push_back(v);
    }
    return out;
}

std::string KeyValueConfig::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string format_int_list(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

}  // namespace neubtf
