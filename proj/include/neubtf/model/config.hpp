// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "neubtf/common/kv_config.hpp"

namespace neubtf::model {

struct AutoencoderConfig {
    int levels = 3;
    std::vector<int> widths{16, 32, 64};
    int latent_channels = 14;
    int kernel_size = 5;
    int expansion = 4;
    float residual_scale = 0.1f;
    int attention_reduction = 8;
    int spatial_kernel = 7;

    /// Total downsampling factor, 2^levels.
    int stride() const { return 1 << levels; }
    void validate() const;
};

struct RendererConfig {
    int latent_channels = 14;
    int hidden_layers = 3;
    int width = 32;
    float omega0 = 30.0f;

    /// Latent plus the projected camera and light directions.
    int input_channels() const { return latent_channels + 4; }
    void validate() const;
};

struct ModelConfig {
    AutoencoderConfig autoencoder;
    RendererConfig renderer;

    void validate() const;
};

/// Writes every model key (`model.*`, `renderer.*`) with its current value.
void write_config(const ModelConfig& config, KeyValueConfig& kv);
/// Reads model keys present in `kv`; absent keys keep their defaults. The
/// latent width is shared: `model.latent_channels` sets both networks.
ModelConfig read_model_config(const KeyValueConfig& kv);
/// Keys understood by read_model_config.
const std::vector<std::string>& model_config_keys();

}  // namespace neubtf::model
