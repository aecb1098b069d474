// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "neubtf/btf/dataset.hpp"
#include "neubtf/model/model.hpp"

namespace neubtf::eval {

struct SliceMetric {
    btf::DirectionPair pair;
    double psnr = 0.0;
    double ssim = 0.0;
};

/// Population mean and standard deviation with the range of the values.
struct Summary {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Order-independent: values are summed in sorted order.
Summary summarize(std::vector<double> values);

/// Float32 storage of a dataset against its neural replacement.
struct StorageAccount {
    std::size_t raw_bytes = 0;
    std::size_t texture_bytes = 0;
    std::size_t renderer_bytes = 0;

    double ratio() const { return static_cast<double>(raw_bytes) / static_cast<double>(texture_bytes + renderer_bytes); }
};

StorageAccount storage_account(std::size_t n_slices, int height, int width, int latent_channels,
                               std::size_t renderer_parameters);

struct MetricReport {
    std::vector<SliceMetric> slices;
    Summary psnr;
    Summary ssim;
    std::size_t renderer_parameters = 0;
    int texture_channels = 0;
    StorageAccount storage;
};

using SliceRenderer = std::function<btf::BtfSlice(const btf::DirectionPair&)>;

/// Renders each selected slice (all when `indices` is empty) and compares
/// tone-mapped prediction and ground truth with peak 1. Storage and
/// parameter fields are left for the caller.
MetricReport evaluate_slices(const btf::BtfDataset& dataset, const SliceRenderer& render,
                             const std::vector<std::size_t>& indices = {});

struct EvalOptions {
    /// Slices to score; empty means every slice.
    std::vector<std::size_t> indices;
    /// Guidance slice (tone-mapped before encoding); defaults to the most frontal pair.
    std::optional<std::size_t> guidance_index;
};

/// Propagates the guidance slice, reconstructs the selected slices, and
/// fills the parameter and storage lines.
MetricReport evaluate_full(const model::Model& model, const btf::BtfDataset& dataset, const EvalOptions& options = {});

struct PcaResult {
    int rank = 0;
    double psnr = 0.0;
    std::size_t bytes = 0;
};

/// Centered truncated SVD of the n_slices x (H W 3) linear radiance matrix.
/// PSNR compares tone-mapped reconstruction (clamped at zero) and ground
/// truth over the whole dataset with peak 1. Bytes = rank (n + H W 3) 4.
PcaResult pca_baseline(const btf::BtfDataset& dataset, int rank);

/// All ranks in `ranks` from one decomposition.
std::vector<PcaResult> pca_baseline(const btf::BtfDataset& dataset, const std::vector<int>& ranks);

/// 1 / (exp(1 - c) + 1) applied to the standardized value c.
double latent_display(double standardized);

/// One H x W x 1 image per channel: standardized to zero mean and unit
/// variance, then mapped by latent_display. Constant channels map to
/// latent_display(0).
std::vector<Image> visualize_latents(const model::NeuralTexture& texture);

std::string format_report_csv(const MetricReport& report);

/// Aligned text table: PSNR, SSIM, the empty LPIPS and FLIP rows, decoder
/// parameters, texture channels, storage, and any PCA rows.
std::string format_report_table(const MetricReport& report, const std::vector<PcaResult>& pca = {});

struct Throughput {
    std::size_t samples = 0;
    double seconds = 0.0;
    double samples_per_second() const { return seconds > 0.0 ? samples / seconds : 0.0; }
};

/// Times render_points over `batch`-sized batches of random latents and
/// directions until at least `min_seconds` have elapsed.
Throughput measure_render_throughput(const model::RendererMlp& renderer, std::size_t batch = 65536,
                                     double min_seconds = 1.0, std::uint64_t seed = 0);

}  // namespace neubtf::eval
