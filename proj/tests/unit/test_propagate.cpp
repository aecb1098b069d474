// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/propagate/nbtx_io.hpp"
#include "temp_dir.hpp"

using namespace neubtf;
using namespace neubtf::propagate;
using btf::Direction;
using btf::DirectionPair;

namespace {

Image random_guidance(int h, int w, Rng& rng) {
    Image img(h, w, 3);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform());
    return img;
}

/// Small model with every weight perturbed away from its initialization.
model::Model perturbed_model(std::uint64_t seed) {
    model::ModelConfig cfg;
    cfg.autoencoder.widths = {4, 8, 8};
    model::Model m(cfg, seed);
    Rng rng(seed + 1000);
    for (const auto& e : m.named_parameters()) {
        tensor::Tensor t = e.value;
        for (float& v : t.data()) v += static_cast<float>(rng.uniform(-0.05, 0.05));
    }
    return m;
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, double(std::abs(a[i] - b[i])));
    return worst;
}

const DirectionPair kPair{{30, 45}, {50, 200}};

}  // namespace

TEST(Propagate, LargerGuidanceThanTrainingCrops) {
    model::Model m(model::ModelConfig{}, 0);
    Rng rng(1);
    auto nb = propagate::propagate(m, random_guidance(128, 128, rng));
    EXPECT_EQ(nb.height(), 128);
    EXPECT_EQ(nb.width(), 128);
    EXPECT_EQ(nb.texture().depth(), 14);
    EXPECT_THROW(propagate::propagate(m, random_guidance(70, 64, rng)), DimensionError);
}

TEST(PropagateProperty, ShiftEquivariantTexture) {
    Rng rng(2);
    for (int trial = 0; trial < 4; ++trial) {
        auto m = perturbed_model(trial);
        auto g = random_guidance(32, 24, rng);
        const int a = static_cast<int>(rng.index(4)), b = static_cast<int>(rng.index(3));
        auto lhs = propagate::propagate(m, roll(g, 8 * a, 8 * b)).texture();
        auto rhs = propagate::propagate(m, g).texture().rolled(8 * a, 8 * b);
        EXPECT_LT(max_abs_diff(lhs.tensor().data(), rhs.tensor().data()), 1e-4);
    }
}

TEST(NeuralBtfTest, RendererIsCopied) {
    auto m = perturbed_model(3);
    Rng rng(3);
    auto nb = propagate::propagate(m, random_guidance(16, 16, rng));
    const auto before = nb.query(0.3, 0.6, kPair.camera, kPair.light);
    for (const auto& e : m.named_parameters()) {
        tensor::Tensor t = e.value;
        for (float& v : t.data()) v = 0.0f;
    }
    EXPECT_EQ(nb.query(0.3, 0.6, kPair.camera, kPair.light), before);
}

TEST(NeuralBtfTest, DepthMismatchRejected) {
    auto m = perturbed_model(4);
    EXPECT_THROW(NeuralBtf(model::NeuralTexture(4, 4, 13), m.renderer()), DimensionError);
}

TEST(Query, TexelCentersMatchRenderPoint) {
    auto m = perturbed_model(5);
    Rng rng(5);
    for (int w : {8, 6}) {
        model::NeuralTexture tex(w, w, 14);
        for (float& v : tensor::Tensor(tex.tensor()).data()) v = static_cast<float>(rng.uniform(-1, 1));
        NeuralBtf nb(tex, m.renderer());
        for (int y = 0; y < w; ++y)
            for (int x = 0; x < w; ++x) {
                const auto rgb = nb.query((x + 0.5) / w, (y + 0.5) / w, kPair.camera, kPair.light);
                EXPECT_EQ(rgb, model::render_point(m.renderer(), tex.latent(y, x), kPair.camera, kPair.light));
            }
    }
}

TEST(QueryProperty, PeriodicInUAndV) {
    auto m = perturbed_model(6);
    Rng rng(6);
    auto nb = propagate::propagate(m, random_guidance(16, 16, rng));
    EXPECT_EQ(nb.query(0.0, 0.25, kPair.camera, kPair.light), nb.query(1.0, 0.25, kPair.camera, kPair.light));
    for (int trial = 0; trial < 50; ++trial) {
        const double u = static_cast<double>(rng.index(1024)) / 1024.0, v = static_cast<double>(rng.index(1024)) / 1024.0;
        const int ku = static_cast<int>(rng.index(7)) - 3, kv = static_cast<int>(rng.index(7)) - 3;
        EXPECT_EQ(nb.query(u, v, kPair.camera, kPair.light), nb.query(u + ku, v + kv, kPair.camera, kPair.light));
    }
}

TEST(QueryProperty, ContinuousAcrossTheSeam) {
    auto m = perturbed_model(7);
    Rng rng(7);
    auto nb = propagate::propagate(m, random_guidance(16, 16, rng));
    for (int i = 0; i <= 200; ++i) {
        const double u = 0.99 + i * 1e-4;
        const auto a = nb.query(u, 0.5, kPair.camera, kPair.light);
        const auto b = nb.query(u + 1e-4, 0.5, kPair.camera, kPair.light);
        for (int c = 0; c < 3; ++c) EXPECT_LT(std::abs(a[c] - b[c]), 1e-2);
    }
}

TEST(Query, ConcurrentCallersAgree) {
    auto m = perturbed_model(8);
    Rng rng(8);
    const auto nb = propagate::propagate(m, random_guidance(16, 16, rng));
    std::vector<model::Rgb> serial(400);
    for (int i = 0; i < 400; ++i) serial[i] = nb.query(i / 400.0, i / 170.0, kPair.camera, kPair.light);
    std::vector<model::Rgb> parallel(400);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (int i = t; i < 400; i += 4) parallel[i] = nb.query(i / 400.0, i / 170.0, kPair.camera, kPair.light);
        });
    for (auto& th : threads) th.join();
    EXPECT_EQ(serial, parallel);
}

TEST(SeamMetric, ZeroForPointwiseRenderer) {
    auto m = perturbed_model(9);
    Rng rng(9);
    auto nb = propagate::propagate(m, random_guidance(24, 16, rng));
    for (int i = 0; i < 5; ++i) {
        const DirectionPair pair{{float(rng.uniform(0, 80)), float(rng.uniform(0, 359))},
                                 {float(rng.uniform(0, 80)), float(rng.uniform(0, 359))}};
        const double s = seam_metric(nb, pair);
        EXPECT_GE(s, 0.0);
        EXPECT_LT(s, 1e-5);
        NeuralBtf shifted(nb.texture().rolled(5, 3), nb.renderer());
        EXPECT_NEAR(seam_metric(shifted, pair), s, 1e-6);
    }
}

TEST(Tileable, TiledRenderEqualsTiledImage) {
    auto m = perturbed_model(10);
    Rng rng(10);
    auto g = random_guidance(16, 24, rng);
    auto single = make_tileable(m, g);
    auto tiled = make_tileable(m, tile(g, 2, 2));
    for (int i = 0; i < 5; ++i) {
        const DirectionPair pair{{float(rng.uniform(0, 80)), float(rng.uniform(0, 359))},
                                 {float(rng.uniform(0, 80)), float(rng.uniform(0, 359))}};
        const auto big = tiled.render(pair);
        const auto ref = tile(single.render(pair), 2, 2);
        EXPECT_LT(max_abs_diff(big.pixels(), ref.pixels()), 1e-4);
        EXPECT_LT(seam_metric(tiled, pair), 1e-5);
    }
}

TEST(Tileable, NonCyclicGuidanceStillProducesBundle) {
    auto m = perturbed_model(11);
    Rng rng(11);
    Image ramp(16, 16, 3);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < 3; ++c) ramp.at(y, x, c) = x / 16.0f;
    auto nb = make_tileable(m, ramp);
    const double s = seam_metric(nb, kPair);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(s, 0.0);
}

TEST(Multires, ScaleOneIsPropagate) {
    auto m = perturbed_model(12);
    Rng rng(12);
    auto g = random_guidance(32, 32, rng);
    auto r = make_multires(m, g, 1.0);
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_EQ(r.btf.texture(), propagate::propagate(m, g).texture());
}

TEST(Multires, DownscaledExtentsAndWarnings) {
    auto m = perturbed_model(13);
    Rng rng(13);
    auto g = random_guidance(64, 64, rng);
    auto half = make_multires(m, g, 0.5, 0.5, 0.1f);
    EXPECT_EQ(half.btf.height(), 32);
    EXPECT_FLOAT_EQ(half.btf.texel_size_mm(), 0.2f);
    EXPECT_TRUE(half.warnings.empty());
    EXPECT_EQ(half.btf.texture(), propagate::propagate(m, resample_area(g, 32, 32)).texture());
    auto quarter = make_multires(m, g, 0.25);
    EXPECT_EQ(quarter.btf.width(), 16);
    ASSERT_EQ(quarter.warnings.size(), 1u);
    EXPECT_NE(quarter.warnings[0].find("0.25"), std::string::npos);
    EXPECT_THROW(make_multires(m, g, 0.3), DimensionError);
    EXPECT_THROW(make_multires(m, g, 0.1), DimensionError);
    EXPECT_THROW(make_multires(m, g, 1.5), DomainError);
    EXPECT_THROW(make_multires(m, g, 0.0), DomainError);
}

// ---- NBTX ---------------------------------------------------------------------------

namespace {

std::size_t renderer_payload_bytes(const model::RendererMlp& r) {
    std::size_t bytes = 4 + (2 + std::string("renderer.omega0").size() + 1 + 4);
    for (const auto& e : r.parameters().entries()) {
        bytes += 2 + std::string("renderer.").size() + e.name.size() + 1 + 4 * e.value.rank() + 4 * e.value.numel();
    }
    return bytes;
}

}  // namespace

TEST(Nbtx, Float32RoundTripIsBitExact) {
    neubtf::testing::TempDir dir;
    auto m = perturbed_model(14);
    Rng rng(14);
    auto nb = propagate::propagate(m, random_guidance(16, 24, rng), 0.35f);
    export_neural_btf(nb, dir / "a.nbtx", PayloadPrecision::Float32);
    auto back = import_neural_btf(dir / "a.nbtx");
    EXPECT_EQ(back.texture(), nb.texture());
    EXPECT_EQ(back.texel_size_mm(), 0.35f);
    EXPECT_EQ(back.renderer().config().omega0, nb.renderer().config().omega0);
    for (int i = 0; i < 20; ++i) {
        const double u = rng.uniform(), v = rng.uniform();
        EXPECT_EQ(back.query(u, v, kPair.camera, kPair.light), nb.query(u, v, kPair.camera, kPair.light));
    }
    EXPECT_EQ(back.render(kPair), nb.render(kPair));
    export_neural_btf(back, dir / "b.nbtx", PayloadPrecision::Float32);
    EXPECT_EQ(read_file_bytes(dir / "a.nbtx"), read_file_bytes(dir / "b.nbtx"));
}

TEST(Nbtx, Float16TextureRoundsThroughHalf) {
    auto m = perturbed_model(15);
    Rng rng(15);
    auto nb = propagate::propagate(m, random_guidance(8, 8, rng));
    auto back = decode_neural_btf(encode_neural_btf(nb));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 14; ++c)
                EXPECT_EQ(back.texture().at(y, x, c), half_to_float(float_to_half(nb.texture().at(y, x, c))));
}

TEST(Nbtx, FileSizeArithmetic) {
    model::Model m(model::ModelConfig{}, 0);
    Rng rng(16);
    auto nb = NeuralBtf(model::NeuralTexture(64, 64, 14), m.renderer());
    const std::size_t payload = renderer_payload_bytes(m.renderer());
    // 3011 parameters plus omega0, each with per-record framing.
    std::size_t params = 0;
    for (const auto& e : m.renderer().parameters().entries()) params += e.value.numel();
    EXPECT_EQ(params, 3011u);
    EXPECT_EQ(encode_neural_btf(nb).size(), 22u + 64u * 64 * 14 * 2 + payload);
    EXPECT_EQ(encode_neural_btf(nb, PayloadPrecision::Float32).size(), 22u + 64u * 64 * 14 * 4 + payload);
}

TEST(Nbtx, NonDefaultRendererShapesSurvive) {
    model::ModelConfig cfg;
    cfg.autoencoder.widths = {4, 4, 4};
    cfg.renderer.hidden_layers = 1;
    cfg.renderer.width = 12;
    cfg.renderer.omega0 = 10.0f;
    cfg.renderer.latent_channels = cfg.autoencoder.latent_channels = 6;
    model::Model m(cfg, 1);
    Rng rng(17);
    auto nb = propagate::propagate(m, random_guidance(8, 8, rng));
    auto back = decode_neural_btf(encode_neural_btf(nb, PayloadPrecision::Float32));
    EXPECT_EQ(back.renderer().config().hidden_layers, 1);
    EXPECT_EQ(back.renderer().config().width, 12);
    EXPECT_EQ(back.renderer().config().omega0, 10.0f);
    EXPECT_EQ(back.render(kPair), nb.render(kPair));
}

TEST(Nbtx, CorruptFilesRejected) {
    auto m = perturbed_model(18);
    Rng rng(18);
    const auto good = encode_neural_btf(propagate::propagate(m, random_guidance(8, 8, rng)));
    auto expect_offset = [](std::vector<std::uint8_t> bytes, std::size_t offset) {
        try {
            decode_neural_btf(bytes);
            ADD_FAILURE() << "accepted corrupt file";
        } catch (const FormatError& e) {
            EXPECT_EQ(e.offset(), offset) << e.what();
        }
    };
    auto magic = good;
    magic[0] = 'X';
    expect_offset(magic, 0);
    auto version = good;
    version[4] = 7;
    expect_offset(version, 4);
    auto flags = good;
    flags[20] = 6;
    expect_offset(flags, 20);
    auto zero = good;
    zero[6] = zero[7] = zero[8] = zero[9] = 0;
    expect_offset(zero, 6);
    for (std::size_t cut : {std::size_t(3), std::size_t(30), good.size() - 1}) {
        auto truncated = good;
        truncated.resize(cut);
        EXPECT_THROW(decode_neural_btf(truncated), FormatError);
    }
    auto trailing = good;
    trailing.push_back(1);
    EXPECT_THROW(decode_neural_btf(trailing), FormatError);
    auto nan_texel = good;
    nan_texel[22] = 0x00;
    nan_texel[23] = 0x7E;
    expect_offset(nan_texel, 22);
}
