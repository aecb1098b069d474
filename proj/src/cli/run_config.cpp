// SPDX-License-Identifier: Apache-2.0
#include "neubtf/cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "neubtf/common/error.hpp"

namespace neubtf::cli {

namespace {

const std::vector<std::string> kRunKeys = {"run.dataset", "run.deterministic", "run.holdout", "run.output_dir",
                                           "run.seed"};

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config `" + path.string() + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = kRunKeys;
        const auto& m = model::model_config_keys();
        const auto& t = training::train_config_keys();
        k.insert(k.end(), m.begin(), m.end());
        k.insert(k.end(), t.begin(), t.end());
        std::sort(k.begin(), k.end());
        return k;
    }();
    return keys;
}

KeyValueConfig to_kv(const RunConfig& config) {
    KeyValueConfig kv;
    kv.set("run.dataset", config.dataset);
    kv.set("run.output_dir", config.output_dir);
    kv.set("run.seed", std::to_string(config.seed));
    kv.set("run.deterministic", config.deterministic ? "true" : "false");
    kv.set("run.holdout", std::to_string(config.holdout));
    model::write_config(config.model, kv);
    training::write_config(config.train, kv);
    return kv;
}

RunConfig run_config_from_kv(const KeyValueConfig& kv) {
    const auto& known = run_config_keys();
    for (const auto& [key, value] : kv.values()) {
        if (!std::binary_search(known.begin(), known.end(), key)) throw ConfigError("unknown config key `" + key + "`");
    }
    RunConfig c;
    if (kv.contains("run.dataset")) c.dataset = kv.get_string("run.dataset");
    if (kv.contains("run.output_dir")) c.output_dir = kv.get_string("run.output_dir");
    if (kv.contains("run.seed")) {
        const long long seed = kv.get_int("run.seed");
        if (seed < 0) throw ConfigError("config key `run.seed` must be non-negative");
        c.seed = static_cast<std::uint64_t>(seed);
    }
    if (kv.contains("run.deterministic")) c.deterministic = kv.get_bool("run.deterministic");
    if (kv.contains("run.holdout")) {
        c.holdout = static_cast<int>(kv.get_int("run.holdout"));
        if (c.holdout < 0) throw ConfigError("config key `run.holdout` must be non-negative");
    }
    c.model = model::read_model_config(kv);
    c.train = training::read_train_config(kv);
    c.train.validate(c.model.autoencoder.stride());
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    KeyValueConfig kv;
    if (!path.empty()) kv = KeyValueConfig::parse(read_text(path), path.string());
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override `" + o + "` is not key=value");
        const auto key = trim(o.substr(0, eq));
        if (key.empty()) throw ConfigError("override `" + o + "` has an empty key");
        kv.set(key, trim(o.substr(eq + 1)));
    }
    return run_config_from_kv(kv);
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const FormatError*>(&e)) return kExitFormat;
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const Error*>(&e)) return kExitUsage;
    return kExitInternal;
}

std::string error_line(const std::exception& e) {
    const char* kind = "internal";
    if (dynamic_cast<const FormatError*>(&e)) kind = "format";
    else if (dynamic_cast<const NumericError*>(&e)) kind = "numeric";
    else if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
    else if (dynamic_cast<const IoError*>(&e)) kind = "io";
    else if (dynamic_cast<const DimensionError*>(&e)) kind = "dimension";
    else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
    else if (dynamic_cast<const LookupError*>(&e)) kind = "lookup";
    else if (dynamic_cast<const ValidationError*>(&e)) kind = "validation";
    std::string msg;
    for (const char ch : std::string(e.what())) {
        if (ch == '"' || ch == '\\') msg += '\\';
        msg += ch == '\n' ? ' ' : ch;
    }
    return "error code=" + std::to_string(exit_code_for(e)) + " kind=" + kind + " message=\"" + msg + "\"";
}

}  // namespace neubtf::cli
