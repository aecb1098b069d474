// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "neubtf/btf/dataset.hpp"
#include "neubtf/common/kv_config.hpp"
#include "neubtf/model/model.hpp"
#include "neubtf/training/augment.hpp"
#include "neubtf/training/losses.hpp"

namespace neubtf::training {

struct TrainConfig {
    int steps = 20000;
    int batch_size = 4;
    /// Cosine decay from learning_rate at step 1 to learning_rate_final at the last step.
    double learning_rate = 1e-3;
    double learning_rate_final = 1e-4;
    int checkpoint_every = 1000;
    /// Bounded queue depth of pre-sampled batches.
    int prefetch = 4;
    LossWeights loss;
    AugmentationConfig augment;

    void validate(int stride) const;
};

void write_config(const TrainConfig& config, KeyValueConfig& kv);
TrainConfig read_train_config(const KeyValueConfig& kv);
const std::vector<std::string>& train_config_keys();

/// Learning rate used at 1-based `step`.
double learning_rate_at(const TrainConfig& config, std::uint64_t step);

struct StepRecord {
    std::uint64_t step = 0;
    LossReport loss;
    double wall_ms = 0.0;
};

struct TrainOptions {
    std::uint64_t seed = 0;
    /// Single-threaded sampling and numerics; wall_ms is recorded as 0 so
    /// the loss CSV is reproducible byte for byte.
    bool deterministic = false;
    /// When set, receives checkpoint.nbck (every checkpoint_every steps and
    /// at the end) and loss.csv.
    std::filesystem::path output_dir;
    /// Extra `key = value` text stored in checkpoints.
    std::string extra_config;
    std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
    std::unique_ptr<model::Model> model;
    std::vector<StepRecord> curve;
};

/// Joint optimization of autoencoder and renderer with Adam on batches of
/// sampled training pairs. Throws NumericError naming the step and loss
/// component when a non-finite value appears.
TrainResult train(const btf::BtfDataset& dataset, const model::ModelConfig& model_config, const TrainConfig& config,
                  const TrainOptions& options);

/// Training batch for 1-based `step`; a pure function of (dataset, config, seed, step).
std::vector<TrainingPair> sample_batch(const btf::BtfDataset& dataset, const TrainConfig& config, int stride,
                                       std::uint64_t seed, std::uint64_t step);

std::string loss_csv_header();
std::string loss_csv_row(const StepRecord& record);

}  // namespace neubtf::training
