// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "gradcheck.hpp"
#include "neubtf/btf/synthetic.hpp"
#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/model/checkpoint.hpp"
#include "neubtf/training/train.hpp"
#include "temp_dir.hpp"

using namespace neubtf;
using namespace neubtf::training;
using neubtf::testing::random_tensor;
using neubtf::testing::TempDir;

namespace {

AugmentationConfig identity_augmentation() {
    AugmentationConfig a;
    a.crop_size = 16;
    a.scale_min = a.scale_max = 1.0;
    a.hue_max_degrees = 0.0;
    a.blur_sigma_max = 0.0;
    a.noise_sigma_max = 0.0;
    return a;
}

btf::BtfDataset textured_dataset(int size, int pairs) {
    return btf::render_synthetic_btf(btf::ggx_textured_maps(size), btf::strided_hemisphere_pairs(pairs));
}

TrainOptions options(std::uint64_t seed, bool deterministic = true) {
    TrainOptions o;
    o.seed = seed;
    o.deterministic = deterministic;
    return o;
}

model::ModelConfig small_model() {
    model::ModelConfig m;
    m.autoencoder.widths = {4, 8, 8};
    return m;
}

double l1_log_oracle(const Tensor& pred, const Tensor& target) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double p = std::max(double(pred.data()[i]), -0.999);
        acc += std::abs(std::log1p(p) - std::log1p(double(target.data()[i])));
    }
    return acc / pred.numel();
}

/// Focal frequency loss recomputed with a naive double-precision DFT.
double focal_oracle(const Tensor& pred, const Tensor& target) {
    const int n = pred.dim(0), c = pred.dim(1), h = pred.dim(2), w = pred.dim(3);
    double acc = 0.0;
    for (int i = 0; i < n * c; ++i) {
        std::vector<double> d(h * w);
        for (int u = 0; u < h; ++u)
            for (int v = 0; v < w; ++v) {
                std::complex<double> f = 0;
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double diff = pred.data()[i * h * w + y * w + x] - target.data()[i * h * w + y * w + x];
                        f += diff * std::polar(1.0, -2.0 * std::numbers::pi * (double(u * y) / h + double(v * x) / w));
                    }
                d[u * w + v] = std::abs(f) / std::sqrt(double(h * w));
            }
        const double peak = *std::max_element(d.begin(), d.end());
        for (double di : d) acc += peak > 0 ? (di / peak) * di * di : 0.0;
    }
    return acc / (n * c * h * w);
}

}  // namespace

// ---- augmentation -------------------------------------------------------------

TEST(Augmentation, IdentityPipelineTonemapsTargetCrop) {
    auto ds = textured_dataset(32, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto pair = sample_training_pair(ds, identity_augmentation(), 8, rng);
        EXPECT_EQ(pair.input_pair, pair.target_pair);
        EXPECT_EQ(pair.input_view, tonemap(pair.target_view));
        EXPECT_EQ(pair.target_view.height(), 16);
    }
}

TEST(AugmentationProperty, GeometryAlignedUnderRandomRescale) {
    auto ds = textured_dataset(32, 1);
    auto a = identity_augmentation();
    a.scale_min = 0.7;
    a.scale_max = 1.4;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto pair = sample_training_pair(ds, a, 8, rng);
        EXPECT_EQ(pair.input_view, tonemap(pair.target_view));
    }
}

TEST(Augmentation, FixedSeedIsRepeatable) {
    auto ds = textured_dataset(32, 6);
    AugmentationConfig a;
    a.crop_size = 16;
    Rng r1(42), r2(42);
    auto p1 = sample_training_pair(ds, a, 8, r1);
    auto p2 = sample_training_pair(ds, a, 8, r2);
    EXPECT_EQ(p1.input_view, p2.input_view);
    EXPECT_EQ(p1.target_view, p2.target_view);
    EXPECT_EQ(p1.target_pair, p2.target_pair);
}

TEST(Augmentation, InputIsToneMappedIntoUnitInterval) {
    auto ds = textured_dataset(32, 6);
    AugmentationConfig a;
    a.crop_size = 16;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto pair = sample_training_pair(ds, a, 8, rng);
        for (float v : pair.input_view.pixels()) {
            EXPECT_GE(v, 0.0f);
            EXPECT_LT(v, 1.0f);
        }
    }
}

TEST(Augmentation, DirectionsDrawnIndependentlyAndUniformly) {
    auto ds = textured_dataset(8, 4);
    auto a = identity_augmentation();
    a.crop_size = 8;
    std::vector<int> counts(16, 0);
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        Rng rng(mix_seed(5, t));
        auto pair = sample_training_pair(ds, a, 8, rng);
        auto index = [&](const btf::DirectionPair& p) {
            return static_cast<int>(std::find(ds.pairs().begin(), ds.pairs().end(), p) - ds.pairs().begin());
        };
        ++counts[index(pair.input_pair) * 4 + index(pair.target_pair)];
    }
    // Every (input, target) combination appears near trials / 16 = 250 times.
    for (int c : counts) {
        EXPECT_GT(c, 180);
        EXPECT_LT(c, 320);
    }
}

TEST(Augmentation, HueRotationIsPeriodic) {
    Rng rng(3);
    Image img(5, 7, 3);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform(0, 2));
    EXPECT_EQ(rotate_hue(img, 0.0), img);
    auto full = rotate_hue(img, 360.0);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(full.pixels()[i], img.pixels()[i], 1e-5);
}

TEST(Augmentation, HueRotationCyclesPrimariesAndKeepsGray) {
    Image red(1, 1, 3), gray(1, 1, 3, 0.5f);
    red.at(0, 0, 0) = 1.0f;
    auto r120 = rotate_hue(red, 120.0);
    EXPECT_NEAR(r120.at(0, 0, 0), 0.0, 1e-6);
    EXPECT_NEAR(r120.at(0, 0, 1), 1.0, 1e-6);
    EXPECT_NEAR(r120.at(0, 0, 2), 0.0, 1e-6);
    auto g = rotate_hue(gray, 77.0);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(g.at(0, 0, c), 0.5, 1e-6);
}

TEST(Augmentation, BlurKeepsConstantsAndMean) {
    Image flat(6, 9, 3, 0.25f);
    auto b = gaussian_blur(flat, 1.2);
    for (float v : b.pixels()) EXPECT_NEAR(v, 0.25, 1e-6);
    Rng rng(4);
    Image img(8, 8, 3);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform());
    auto blurred = gaussian_blur(img, 1.5);
    double s0 = 0, s1 = 0;
    for (std::size_t i = 0; i < img.size(); ++i) s0 += img.pixels()[i], s1 += blurred.pixels()[i];
    EXPECT_NEAR(s0, s1, 1e-4);
    EXPECT_EQ(gaussian_blur(img, 0.0), img);
}

TEST(Augmentation, CropSizeRules) {
    AugmentationConfig a;
    EXPECT_EQ(effective_crop_size(a, 128, 128, 8), 64);
    EXPECT_EQ(effective_crop_size(a, 64, 64, 8), 40);
    EXPECT_EQ(effective_crop_size(a, 32, 32, 8), 16);
    EXPECT_THROW(effective_crop_size(a, 8, 8, 8), ConfigError);
    a.fit_crop = false;
    EXPECT_THROW(effective_crop_size(a, 64, 64, 8), ConfigError);
    auto ds = textured_dataset(32, 2);
    Rng rng(0);
    EXPECT_THROW(sample_training_pair(ds, a, 8, rng), ConfigError);
    a.crop_size = 12;
    EXPECT_THROW(effective_crop_size(a, 128, 128, 8), ConfigError);
    a.crop_size = 16;
    a.scale_min = 0.0;
    EXPECT_THROW(a.validate(8), ConfigError);
}

// ---- losses ----------------------------------------------------------------------

TEST(Losses, ZeroOnIdenticalInputs) {
    Rng rng(10);
    auto x = random_tensor<float>({2, 3, 8, 8}, rng, 0.0, 4.0);
    EXPECT_EQ(loss_l1_log(x, x).item(), 0.0f);
    EXPECT_EQ(loss_style(x, x).item(), 0.0f);
    EXPECT_EQ(loss_focal_freq(x, x).item(), 0.0f);
    auto r = total_loss(x, x, {});
    EXPECT_EQ(r.total, 0.0);
    EXPECT_EQ(r.l1_log, 0.0);
    EXPECT_EQ(r.style, 0.0);
    EXPECT_EQ(r.freq, 0.0);
}

TEST(Losses, L1LogClosedForm) {
    Tensor pred({1, 3, 1, 1}, float(std::numbers::e - 1.0)), target({1, 3, 1, 1}, 0.0f);
    EXPECT_NEAR(loss_l1_log(pred, target).item(), 1.0, 1e-6);
    Tensor below({1, 3, 1, 1}, -5.0f);
    EXPECT_NEAR(loss_l1_log(below, target).item(), -std::log1p(-0.999), 1e-4);
}

TEST(Losses, L1LogMatchesScalarLoop) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto pred = random_tensor<float>({2, 3, 6, 5}, rng, -1.5, 20.0);
        auto target = random_tensor<float>({2, 3, 6, 5}, rng, 0.0, 20.0);
        EXPECT_NEAR(loss_l1_log(pred, target).item(), l1_log_oracle(pred, target), 1e-6);
    }
}

TEST(Losses, GramDistanceOfConstantMaps) {
    const int pixels = 37;
    Tensor a({1, 1, 1, pixels}, 1.0f), b({1, 1, 1, pixels}, 2.0f);
    EXPECT_FLOAT_EQ(gram_distance(a, b).item(), 9.0f);
}

TEST(Losses, StyleGramMatchesDoubleLoop) {
    Rng rng(12);
    auto x = random_tensor<float>({2, 3, 12, 12}, rng, 0.0, 2.0);
    for (const auto& f : style_features(x)) {
        const auto g = tensor::gram(f);
        const int n = f.dim(0), c = f.dim(1), p = f.dim(2) * f.dim(3);
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < c; ++a)
                for (int b = 0; b < c; ++b) {
                    double acc = 0;
                    for (int k = 0; k < p; ++k)
                        acc += double(f.data()[(i * c + a) * p + k]) * f.data()[(i * c + b) * p + k];
                    EXPECT_NEAR(g.data()[(i * c + a) * c + b], acc / (c * p), 1e-5);
                }
    }
}

TEST(Losses, StyleIsFixedAcrossCalls) {
    Rng rng(13);
    auto a = random_tensor<float>({1, 3, 8, 8}, rng, 0.0, 1.0);
    auto b = random_tensor<float>({1, 3, 8, 8}, rng, 0.0, 1.0);
    EXPECT_EQ(loss_style(a, b).item(), loss_style(a, b).item());
    EXPECT_GT(loss_style(a, b).item(), 0.0f);
}

TEST(Losses, FocalFrequencyDcOnly) {
    Tensor pred({1, 1, 1, 1}, 1.0f), target({1, 1, 1, 1}, 0.0f);
    EXPECT_FLOAT_EQ(loss_focal_freq(pred, target).item(), 1.0f);
}

TEST(Losses, FocalFrequencyMatchesNaiveDft) {
    Rng rng(14);
    for (auto shape : {tensor::Shape{1, 3, 8, 8}, tensor::Shape{2, 3, 6, 10}}) {
        auto pred = random_tensor<float>(shape, rng, 0.0, 3.0);
        auto target = random_tensor<float>(shape, rng, 0.0, 3.0);
        EXPECT_NEAR(loss_focal_freq(pred, target).item(), focal_oracle(pred, target), 1e-4);
    }
}

TEST(Losses, DegenerateWeightsReduceToPixelTerm) {
    Rng rng(15);
    auto pred = random_tensor<float>({2, 3, 8, 8}, rng, 0.0, 3.0);
    auto target = random_tensor<float>({2, 3, 8, 8}, rng, 0.0, 3.0);
    auto r = total_loss(pred, target, {.l1 = 2.0, .style = 0.0, .freq = 0.0});
    EXPECT_DOUBLE_EQ(r.total, 2.0 * loss_l1_log(pred, target).item());
}

TEST(LossProperty, TotalIsWeightedSumAndNonNegative) {
    Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        auto pred = random_tensor<float>({2, 3, 8, 8}, rng, -0.5, 5.0);
        auto target = random_tensor<float>({2, 3, 8, 8}, rng, 0.0, 5.0);
        const LossWeights w{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};
        const auto terms = loss_terms(pred, target, w);
        const auto r = report(terms, w);
        EXPECT_NEAR(r.total - (w.l1 * r.l1_log + w.style * r.style + w.freq * r.freq), 0.0, 1e-6);
        EXPECT_NEAR(terms.total.item(), r.total, 1e-5 * std::max(1.0, r.total));
        EXPECT_GT(r.l1_log, 0.0);
        EXPECT_GE(r.style, 0.0);
        EXPECT_GT(r.freq, 0.0);
    }
}

TEST(LossProperty, BatchOrderDoesNotMatter) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        auto pred = random_tensor<float>({3, 3, 8, 8}, rng, 0.0, 4.0);
        auto target = random_tensor<float>({3, 3, 8, 8}, rng, 0.0, 4.0);
        auto swap = [](const Tensor& t) {
            auto parts = std::vector<Tensor>{};
            const std::size_t item = t.numel() / 3;
            Tensor out(t.shape());
            const int order[] = {2, 0, 1};
            for (int i = 0; i < 3; ++i)
                std::copy_n(t.raw() + order[i] * item, item, out.raw() + i * item);
            return out;
        };
        const auto a = total_loss(pred, target, {}), b = total_loss(swap(pred), swap(target), {});
        EXPECT_NEAR(a.total, b.total, 1e-6 * std::max(1.0, a.total));
    }
}

TEST(Losses, ShapeMismatchIsDimensionError) {
    EXPECT_THROW(loss_l1_log(Tensor({1, 3, 4, 4}), Tensor({1, 3, 4, 5})), DimensionError);
    EXPECT_THROW(loss_focal_freq(Tensor({1, 3, 4, 4}), Tensor({1, 3, 5, 4})), DimensionError);
    EXPECT_THROW(LossWeights({0, 0, 0}).validate(), ConfigError);
    EXPECT_THROW(LossWeights({-1, 0, 1}).validate(), ConfigError);
}

TEST(Losses, GradientsReachPrediction) {
    Rng rng(18);
    auto pred = random_tensor<float>({1, 3, 8, 8}, rng, 0.0, 2.0);
    auto target = random_tensor<float>({1, 3, 8, 8}, rng, 0.0, 2.0);
    pred.set_requires_grad(true);
    tensor::Tape tape;
    {
        auto scope = tape.activate();
        auto terms = loss_terms(pred, target, {});
        tape.backward(terms.total);
    }
    double norm = 0;
    for (float g : pred.grad()) {
        ASSERT_TRUE(std::isfinite(g));
        norm += g * g;
    }
    EXPECT_GT(norm, 0.0);
}

// ---- training loop -----------------------------------------------------------------

TEST(TrainConfigTest, LearningRateSchedule) {
    TrainConfig c;
    c.steps = 101;
    EXPECT_DOUBLE_EQ(learning_rate_at(c, 1), 1e-3);
    EXPECT_NEAR(learning_rate_at(c, 51), 5.5e-4, 1e-15);
    EXPECT_NEAR(learning_rate_at(c, 101), 1e-4, 1e-15);
    c.steps = 1;
    EXPECT_DOUBLE_EQ(learning_rate_at(c, 1), 1e-3);
}

TEST(TrainConfigTest, KeyValueRoundTrip) {
    TrainConfig c;
    c.steps = 77;
    c.batch_size = 2;
    c.loss.style = 0.25;
    c.augment.crop_size = 24;
    c.augment.fit_crop = false;
    KeyValueConfig kv;
    write_config(c, kv);
    const auto back = read_train_config(KeyValueConfig::parse(kv.to_string()));
    KeyValueConfig kv2;
    write_config(back, kv2);
    EXPECT_EQ(kv.to_string(), kv2.to_string());
    EXPECT_EQ(back.augment.crop_size, 24);
    EXPECT_FALSE(back.augment.fit_crop);
    EXPECT_EQ(train_config_keys().size(), kv.values().size());
}

TEST(TrainConfigTest, InvalidValuesRejected) {
    TrainConfig c;
    c.steps = 0;
    EXPECT_THROW(c.validate(8), ConfigError);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(8), ConfigError);
}

TEST(Train, SingleStepSmoke) {
    TempDir dir;
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    c.steps = 1;
    auto result = train(ds, small_model(), c, {.seed = 3, .deterministic = false, .output_dir = dir.path(), .extra_config = {}, .on_step = {}});
    ASSERT_EQ(result.curve.size(), 1u);
    EXPECT_TRUE(std::isfinite(result.curve[0].loss.total));
    EXPECT_GT(result.curve[0].loss.total, 0.0);
    const auto csv = read_file_bytes(dir / "loss.csv");
    const std::string text(csv.begin(), csv.end());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    EXPECT_EQ(text.rfind(loss_csv_header(), 0), 0u);
    auto ck = model::load_checkpoint(dir / "checkpoint.nbck");
    EXPECT_EQ(ck.info.step, 1u);
    EXPECT_EQ(ck.info.seed, 3u);
    EXPECT_NE(ck.info.extra_config.find("train.steps = 1"), std::string::npos);
}

TEST(Train, DeterministicRunsAreByteIdentical) {
    TempDir a, b;
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    c.steps = 3;
    c.checkpoint_every = 2;
    train(ds, small_model(), c, {.seed = 9, .deterministic = true, .output_dir = a.path(), .extra_config = {}, .on_step = {}});
    train(ds, small_model(), c, {.seed = 9, .deterministic = true, .output_dir = b.path(), .extra_config = {}, .on_step = {}});
    EXPECT_EQ(read_file_bytes(a / "checkpoint.nbck"), read_file_bytes(b / "checkpoint.nbck"));
    EXPECT_EQ(read_file_bytes(a / "loss.csv"), read_file_bytes(b / "loss.csv"));
}

TEST(Train, PrefetchingMatchesInlineSampling) {
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    c.steps = 4;
    c.prefetch = 2;
    auto inline_run = train(ds, small_model(), c, options(5));
    auto queued_run = train(ds, small_model(), c, options(5, false));
    ASSERT_EQ(inline_run.curve.size(), queued_run.curve.size());
    for (std::size_t i = 0; i < inline_run.curve.size(); ++i) {
        EXPECT_EQ(inline_run.curve[i].loss.total, queued_run.curve[i].loss.total);
    }
    EXPECT_EQ(model::encode_checkpoint(*inline_run.model, {}), model::encode_checkpoint(*queued_run.model, {}));
}

TEST(Train, DifferentSeedsDiffer) {
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    c.steps = 2;
    auto r1 = train(ds, small_model(), c, options(1));
    auto r2 = train(ds, small_model(), c, options(2));
    EXPECT_NE(r1.curve[0].loss.total, r2.curve[0].loss.total);
}

TEST(Train, SampleBatchIsPure) {
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    const auto a = sample_batch(ds, c, 8, 7, 12), b = sample_batch(ds, c, 8, 7, 12);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].input_view, b[i].input_view);
    EXPECT_NE(sample_batch(ds, c, 8, 7, 13)[0].input_view, a[0].input_view);
}

TEST(Train, DivergenceReportsStep) {
    auto ds = textured_dataset(16, 4);
    TrainConfig c;
    c.steps = 50;
    c.learning_rate = c.learning_rate_final = 1e30;
    try {
        train(ds, small_model(), c, options(0));
        FAIL() << "expected divergence";
    } catch (const NumericError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("step ", 0), 0u) << e.what();
    }
}

TEST(Train, LossDecreasesOnTinyProblem) {
    auto ds = btf::render_synthetic_btf(btf::lambertian_maps(16), btf::strided_hemisphere_pairs(6));
    TrainConfig c;
    c.steps = 60;
    auto r = train(ds, small_model(), c, options(0));
    auto avg = [&](std::size_t from, std::size_t to) {
        double s = 0;
        for (std::size_t i = from; i < to; ++i) s += r.curve[i].loss.total;
        return s / (to - from);
    };
    EXPECT_LT(avg(50, 60), avg(0, 10));
}
