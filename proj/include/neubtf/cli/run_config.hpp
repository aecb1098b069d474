// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "neubtf/common/kv_config.hpp"
#include "neubtf/model/config.hpp"
#include "neubtf/training/train.hpp"

namespace neubtf::cli {

/// Everything a training run reads: `run.*` plumbing keys plus the model
/// and training keys.
struct RunConfig {
    std::string dataset;
    std::string output_dir = "run";
    std::uint64_t seed = 0;
    bool deterministic = false;
    /// Number of direction pairs withheld from training (see holdout_indices).
    int holdout = 0;
    model::ModelConfig model;
    training::TrainConfig train;
};

const std::vector<std::string>& run_config_keys();

/// Every key with its effective value.
KeyValueConfig to_kv(const RunConfig& config);

/// Throws ConfigError on a key outside run_config_keys().
RunConfig run_config_from_kv(const KeyValueConfig& kv);

/// Reads `path` (empty for defaults only), then applies `key=value`
/// overrides in order. Overrides win over the file.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitInternal = 1;

int exit_code_for(const std::exception& e);

/// `error code=<n> kind=<name> message="<text>"` with quotes and
/// backslashes in the text escaped.
std::string error_line(const std::exception& e);

}  // namespace neubtf::cli
