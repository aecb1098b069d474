// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/config.hpp"

#include <cmath>

#include "neubtf/common/error.hpp"

namespace neubtf::model {

void AutoencoderConfig::validate() const {
    if (levels < 1 || levels > 6) throw ConfigError("model.levels must be in [1, 6]");
    if (static_cast<int>(widths.size()) != levels) {
        throw ConfigError("model.widths needs one width per level (" + std::to_string(levels) + "), got " +
                          std::to_string(widths.size()));
    }
    for (int w : widths)
        if (w < 1) throw ConfigError("model.widths must be positive");
    if (latent_channels < 1) throw ConfigError("model.latent_channels must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("model.kernel_size must be odd");
    if (spatial_kernel < 1 || spatial_kernel % 2 == 0) throw ConfigError("model.spatial_kernel must be odd");
    if (expansion < 1) throw ConfigError("model.expansion must be positive");
    if (attention_reduction < 1) throw ConfigError("model.attention_reduction must be positive");
    if (!std::isfinite(residual_scale)) throw ConfigError("model.residual_scale must be finite");
}

void RendererConfig::validate() const {
    if (latent_channels < 1) throw ConfigError("renderer latent width must be positive");
    if (hidden_layers < 0) throw ConfigError("renderer.hidden_layers must be non-negative");
    if (width < 1) throw ConfigError("renderer.width must be positive");
    if (!(omega0 > 0.0f) || !std::isfinite(omega0)) throw ConfigError("renderer.omega0 must be positive");
}

void ModelConfig::validate() const {
    autoencoder.validate();
    renderer.validate();
    if (autoencoder.latent_channels != renderer.latent_channels) {
        throw ConfigError("autoencoder and renderer disagree on the latent width");
    }
}

void write_config(const ModelConfig& c, KeyValueConfig& kv) {
    const auto& a = c.autoencoder;
    kv.set("model.levels", std::to_string(a.levels));
    kv.set("model.widths", format_int_list(a.widths));
    kv.set("model.latent_channels", std::to_string(a.latent_channels));
    kv.set("model.kernel_size", std::to_string(a.kernel_size));
    kv.set("model.expansion", std::to_string(a.expansion));
    kv.set("model.residual_scale", format_double(a.residual_scale));
    kv.set("model.attention_reduction", std::to_string(a.attention_reduction));
    kv.set("model.spatial_kernel", std::to_string(a.spatial_kernel));
    kv.set("renderer.hidden_layers", std::to_string(c.renderer.hidden_layers));
    kv.set("renderer.width", std::to_string(c.renderer.width));
    kv.set("renderer.omega0", format_double(c.renderer.omega0));
}

const std::vector<std::string>& model_config_keys() {
    static const std::vector<std::string> keys = {
        "model.levels",          "model.widths",         "model.latent_channels", "model.kernel_size",
        "model.expansion",       "model.residual_scale", "model.attention_reduction",
        "model.spatial_kernel",  "renderer.hidden_layers", "renderer.width",       "renderer.omega0",
    };
    return keys;
}

ModelConfig read_model_config(const KeyValueConfig& kv) {
    ModelConfig c;
    auto& a = c.autoencoder;
    auto get_int = [&](const char* key, int& out) {
        if (kv.contains(key)) out = static_cast<int>(kv.get_int(key));
    };
    get_int("model.levels", a.levels);
    if (kv.contains("model.widths")) a.widths = kv.get_int_list("model.widths");
    get_int("model.latent_channels", a.latent_channels);
    get_int("model.kernel_size", a.kernel_size);
    get_int("model.expansion", a.expansion);
    if (kv.contains("model.residual_scale")) a.residual_scale = static_cast<float>(kv.get_double("model.residual_scale"));
    get_int("model.attention_reduction", a.attention_reduction);
    get_int("model.spatial_kernel", a.spatial_kernel);
    get_int("renderer.hidden_layers", c.renderer.hidden_layers);
    get_int("renderer.width", c.renderer.width);
    if (kv.contains("renderer.omega0")) c.renderer.omega0 = static_cast<float>(kv.get_double("renderer.omega0"));
    c.renderer.latent_channels = a.latent_channels;
    c.validate();
    return c;
}

}  // namespace neubtf::model
