// SPDX-License-Identifier: Apache-2.0
#include "neubtf/training/train.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/common/parallel.hpp"
#include "neubtf/model/checkpoint.hpp"
#include "neubtf/tensor/adam.hpp"

namespace neubtf::training {

namespace {

using Batch = std::vector<TrainingPair>;

/// Single-producer queue of batches in step order. The producer stops when
/// the consumer closes the queue.
class BatchQueue {
public:
    explicit BatchQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push(Batch batch) {
        std::unique_lock lock(mutex_);
        space_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
        if (closed_) return false;
        items_.push_back(std::move(batch));
        ready_.notify_one();
        return true;
    }

    void fail(std::exception_ptr error) {
        std::lock_guard lock(mutex_);
        error_ = error;
        ready_.notify_one();
    }

    Batch pop() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return !items_.empty() || error_; });
        if (items_.empty()) std::rethrow_exception(error_);
        Batch b = std::move(items_.front());
        items_.pop_front();
        space_.notify_one();
        return b;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        space_.notify_all();
    }

private:
    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable ready_, space_;
    std::deque<Batch> items_;
    std::exception_ptr error_;
    bool closed_ = false;
};

std::string checkpoint_extra(const TrainConfig& config, const TrainOptions& options) {
    KeyValueConfig kv;
    write_config(config, kv);
    return kv.to_string() + options.extra_config;
}

void save(const model::Model& m, const TrainConfig& config, const TrainOptions& options, std::uint64_t step) {
    model::save_checkpoint(options.output_dir / "checkpoint.nbck", m,
                           {.step = step, .seed = options.seed, .extra_config = checkpoint_extra(config, options)});
}

void require_finite(double value, const char* component, std::uint64_t step) {
    if (!std::isfinite(value)) {
        throw NumericError("step " + std::to_string(step) + ": " + component + " loss is not finite");
    }
}

}  // namespace

void TrainConfig::validate(int stride) const {
    if (steps < 1) throw ConfigError("train.steps must be at least 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !(learning_rate_final > 0.0)) throw ConfigError("learning rates must be positive");
    if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be at least 1");
    if (prefetch < 1) throw ConfigError("train.prefetch must be at least 1");
    loss.validate();
    augment.validate(stride);
}

void write_config(const TrainConfig& config, KeyValueConfig& kv) {
    kv.set("train.steps", std::to_string(config.steps));
    kv.set("train.batch_size", std::to_string(config.batch_size));
    kv.set("train.learning_rate", format_double(config.learning_rate));
    kv.set("train.learning_rate_final", format_double(config.learning_rate_final));
    kv.set("train.checkpoint_every", std::to_string(config.checkpoint_every));
    kv.set("train.prefetch", std::to_string(config.prefetch));
    kv.set("loss.l1", format_double(config.loss.l1));
    kv.set("loss.style", format_double(config.loss.style));
    kv.set("loss.freq", format_double(config.loss.freq));
    const auto& a = config.augment;
    kv.set("augment.crop_size", std::to_string(a.crop_size));
    kv.set("augment.fit_crop", a.fit_crop ? "true" : "false");
    kv.set("augment.scale_min", format_double(a.scale_min));
    kv.set("augment.scale_max", format_double(a.scale_max));
    kv.set("augment.hue_max_degrees", format_double(a.hue_max_degrees));
    kv.set("augment.blur_sigma_max", format_double(a.blur_sigma_max));
    kv.set("augment.noise_sigma_max", format_double(a.noise_sigma_max));
}

TrainConfig read_train_config(const KeyValueConfig& kv) {
    TrainConfig c;
    auto read_int = [&](const char* key, int& dst) {
        if (kv.contains(key)) dst = static_cast<int>(kv.get_int(key));
    };
    auto read_double = [&](const char* key, double& dst) {
        if (kv.contains(key)) dst = kv.get_double(key);
    };
    read_int("train.steps", c.steps);
    read_int("train.batch_size", c.batch_size);
    read_double("train.learning_rate", c.learning_rate);
    read_double("train.learning_rate_final", c.learning_rate_final);
    read_int("train.checkpoint_every", c.checkpoint_every);
    read_int("train.prefetch", c.prefetch);
    read_double("loss.l1", c.loss.l1);
    read_double("loss.style", c.loss.style);
    read_double("loss.freq", c.loss.freq);
    read_int("augment.crop_size", c.augment.crop_size);
    if (kv.contains("augment.fit_crop")) c.augment.fit_crop = kv.get_bool("augment.fit_crop");
    read_double("augment.scale_min", c.augment.scale_min);
    read_double("augment.scale_max", c.augment.scale_max);
    read_double("augment.hue_max_degrees", c.augment.hue_max_degrees);
    read_double("augment.blur_sigma_max", c.augment.blur_sigma_max);
    read_double("augment.noise_sigma_max", c.augment.noise_sigma_max);
    return c;
}

const std::vector<std::string>& train_config_keys() {
    static const std::vector<std::string> keys = [] {
        KeyValueConfig kv;
        write_config(TrainConfig{}, kv);
        std::vector<std::string> out;
        for (const auto& [key, value] : kv.values()) out.push_back(key);
        return out;
    }();
    return keys;
}

double learning_rate_at(const TrainConfig& config, std::uint64_t step) {
    const double progress = config.steps > 1 ? static_cast<double>(step - 1) / (config.steps - 1) : 0.0;
    return config.learning_rate_final + 0.5 * (config.learning_rate - config.learning_rate_final) *
                                            (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<TrainingPair> sample_batch(const btf::BtfDataset& dataset, const TrainConfig& config, int stride,
                                       std::uint64_t seed, std::uint64_t step) {
    std::vector<TrainingPair> batch;
    batch.reserve(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
        Rng rng(mix_seed(seed, step, static_cast<std::uint64_t>(b)));
        batch.push_back(sample_training_pair(dataset, config.augment, stride, rng));
    }
    return batch;
}

std::string loss_csv_header() { return "step,total,l1_log,style,freq,wall_ms\n"; }

std::string loss_csv_row(const StepRecord& r) {
    return std::to_string(r.step) + "," + format_double(r.loss.total) + "," + format_double(r.loss.l1_log) + "," +
           format_double(r.loss.style) + "," + format_double(r.loss.freq) + "," + format_double(r.wall_ms) + "\n";
}

TrainResult train(const btf::BtfDataset& dataset, const model::ModelConfig& model_config, const TrainConfig& config,
                  const TrainOptions& options) {
    model_config.autoencoder.validate();
    const int stride = model_config.autoencoder.stride();
    config.validate(stride);
    effective_crop_size(config.augment, dataset.height(), dataset.width(), stride);
    if (options.deterministic) set_worker_override(1);

    TrainResult result;
    result.model = std::make_unique<model::Model>(model_config, options.seed);
    auto& m = *result.model;
    auto params = m.parameters();
    tensor::AdamState<float> adam(params, {.learning_rate = config.learning_rate});

    std::ofstream csv;
    if (!options.output_dir.empty()) {
        std::filesystem::create_directories(options.output_dir);
        csv.open(options.output_dir / "loss.csv", std::ios::binary);
        if (!csv) throw IoError("cannot write " + (options.output_dir / "loss.csv").string());
        csv << loss_csv_header();
    }

    const std::uint64_t steps = static_cast<std::uint64_t>(config.steps);
    std::optional<BatchQueue> queue;
    std::jthread producer;
    if (!options.deterministic) {
        queue.emplace(static_cast<std::size_t>(config.prefetch));
        producer = std::jthread([&] {
            try {
                for (std::uint64_t s = 1; s <= steps; ++s)
                    if (!queue->push(sample_batch(dataset, config, stride, options.seed, s))) return;
            } catch (...) {
                queue->fail(std::current_exception());
            }
        });
    }
    struct CloseOnExit {
        std::optional<BatchQueue>& q;
        ~CloseOnExit() {
            if (q) q->close();
        }
    } close_on_exit{queue};

    tensor::Tape tape;
    for (std::uint64_t step = 1; step <= steps; ++step) {
        const auto start = std::chrono::steady_clock::now();
        const Batch batch =
            queue ? queue->pop() : sample_batch(dataset, config, stride, options.seed, step);
        std::vector<Image> inputs, targets;
        std::vector<btf::DirectionPair> pairs;
        for (const auto& p : batch) {
            inputs.push_back(p.input_view);
            targets.push_back(p.target_view);
            pairs.push_back(p.target_pair);
        }
        const auto input = model::images_to_batch(inputs);
        const auto target = model::images_to_batch(targets);

        StepRecord record;
        record.step = step;
        {
            auto scope = tape.activate();
            LossTerms terms;
            try {
                const auto latent = m.autoencoder().forward(input);
                const auto pred = m.renderer().forward(latent, pairs);
                terms = loss_terms(pred, target, config.loss);
            } catch (const NumericError& e) {
                tape.clear();
                throw NumericError("step " + std::to_string(step) + ": " + e.what());
            }
            record.loss = report(terms, config.loss);
            require_finite(record.loss.l1_log, "l1_log", step);
            require_finite(record.loss.style, "style", step);
            require_finite(record.loss.freq, "freq", step);
            for (auto& p : params) p.zero_grad();
            tape.backward(terms.total);
        }
        adam.options().learning_rate = learning_rate_at(config, step);
        adam.apply(params);

        if (!options.deterministic) {
            record.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        result.curve.push_back(record);
        if (csv.is_open()) csv << loss_csv_row(record) << std::flush;
        if (options.on_step) options.on_step(record);
        if (!options.output_dir.empty() && (step % config.checkpoint_every == 0 || step == steps)) {
            save(m, config, options, step);
        }
    }
    return result;
}

}  // namespace neubtf::training
