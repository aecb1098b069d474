// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/checkpoint.hpp"

#include <algorithm>
#include <cmath>

#include "neubtf/common/error.hpp"
#include "neubtf/common/kv_config.hpp"

namespace neubtf::model {

namespace {

constexpr const char* kStepKey = "checkpoint.step";
constexpr const char* kSeedKey = "checkpoint.seed";

bool is_model_key(const std::string& key) {
    const auto& keys = model_config_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

void write_tensors(ByteWriter& out, const std::vector<NamedTensor>& tensors) {
    out.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        if (t.name.size() > 0xFFFF) throw ValidationError("tensor name too long: " + t.name);
        out.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
        out.put_bytes(t.name);
        out.put<std::uint8_t>(static_cast<std::uint8_t>(t.value.rank()));
        for (int e : t.value.shape()) out.put<std::uint32_t>(static_cast<std::uint32_t>(e));
        for (float v : t.value.data()) out.put<float>(v);
    }
}

void read_tensors_into(ByteReader& in, const std::vector<NamedTensor>& expected) {
    const auto count_at = in.offset();
    const auto count = in.get<std::uint32_t>("tensor count");
    if (count != expected.size()) {
        in.fail_at("holds " + std::to_string(count) + " tensors, configuration expects " +
                       std::to_string(expected.size()),
                   count_at);
    }
    for (const auto& slot : expected) {
        const auto record_at = in.offset();
        const auto name_len = in.get<std::uint16_t>("tensor name length");
        const auto name = in.get_string(name_len, "tensor name");
        if (name != slot.name) in.fail_at("expected tensor `" + slot.name + "`, found `" + name + "`", record_at);
        const auto rank = in.get<std::uint8_t>("tensor rank");
        tensor::Shape shape(rank);
        for (int& e : shape) e = static_cast<int>(in.get<std::uint32_t>("tensor extent"));
        if (shape != slot.value.shape()) {
            in.fail_at("tensor `" + name + "` has shape " + tensor::to_string(shape) + ", configuration expects " +
                           tensor::to_string(slot.value.shape()),
                       record_at);
        }
        const auto data_at = in.offset();
        auto payload = in.get_span(slot.value.numel() * sizeof(float), "tensor payload");
        Tensor dst = slot.value;
        std::memcpy(dst.raw(), payload.data(), payload.size());
        for (float v : dst.data())
            if (!std::isfinite(v)) in.fail_at("tensor `" + name + "` holds non-finite values", data_at);
    }
}

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const CheckpointInfo& info) {
    auto kv = KeyValueConfig::parse(info.extra_config, "checkpoint extra config");
    write_config(model.config(), kv);
    kv.set(kStepKey, std::to_string(info.step));
    kv.set(kSeedKey, std::to_string(info.seed));
    const std::string text = kv.to_string();
    ByteWriter w;
    w.put_bytes("NBCK");
    w.put<std::uint16_t>(kNbckVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
    w.put_bytes(text);
    write_tensors(w, model.named_parameters());
    return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "NBCK");
    if (r.get_string(4, "magic") != "NBCK") r.fail_at("bad magic, expected \"NBCK\"", 0);
    const auto version_at = r.offset();
    if (const auto v = r.get<std::uint16_t>("version"); v != kNbckVersion) {
        r.fail_at("unsupported version " + std::to_string(v), version_at);
    }
    const auto text_len = r.get<std::uint32_t>("config length");
    const auto text_at = r.offset();
    const auto text = r.get_string(text_len, "config text");
    KeyValueConfig kv;
    ModelConfig config;
    Checkpoint out;
    try {
        kv = KeyValueConfig::parse(text, "checkpoint config");
        config = read_model_config(kv);
        out.info.step = static_cast<std::uint64_t>(kv.get_int(kStepKey));
        out.info.seed = static_cast<std::uint64_t>(kv.get_int(kSeedKey));
    } catch (const ConfigError& e) {
        r.fail_at(std::string("invalid embedded config: ") + e.what(), text_at);
    }
    KeyValueConfig extra;
    for (const auto& [k, v] : kv.values())
        if (!is_model_key(k) && k != kStepKey && k != kSeedKey) extra.set(k, v);
    out.info.extra_config = extra.to_string();
    out.model = std::make_unique<Model>(config, 0);
    read_tensors_into(r, out.model->named_parameters());
    if (r.remaining() != 0) r.fail("trailing bytes after last tensor");
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointInfo& info) {
    write_file_bytes(path, encode_checkpoint(model, info));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

}  // namespace neubtf::model
