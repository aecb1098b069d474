// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "neubtf/btf/synthetic.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/common/rng.hpp"
#include "neubtf/eval/metrics.hpp"
#include "neubtf/eval/report.hpp"

using namespace neubtf;
using namespace neubtf::eval;

namespace {

Image random_image(int h, int w, int c, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Image img(h, w, c);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform(lo, hi));
    return img;
}

double psnr_oracle(const Image& a, const Image& b) {
    long double se = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a.pixels()[i]) - b.pixels()[i];
        se += d * d;
    }
    return static_cast<double>(10.0L * std::log10(1.0L / (se / a.size())));
}

/// Direct 2-D windowed SSIM with an explicitly normalized 11 x 11 kernel.
double ssim_oracle(const Image& a, const Image& b) {
    const int r = 5;
    double k[11][11];
    double ksum = 0;
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j) ksum += k[i + r][j + r] = std::exp(-(i * i + j * j) / (2 * 1.5 * 1.5));
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0;
    int count = 0;
    for (int c = 0; c < a.channels(); ++c)
        for (int y = r; y < a.height() - r; ++y)
            for (int x = r; x < a.width() - r; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = -r; i <= r; ++i)
                    for (int j = -r; j <= r; ++j) {
                        const double w = k[i + r][j + r] / ksum;
                        const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return total / count;
}

btf::BtfDataset small_ggx(int size = 16, int pairs = 12) {
    return btf::render_synthetic_btf(btf::ggx_textured_maps(size, 3), btf::strided_hemisphere_pairs(pairs));
}

}  // namespace

TEST(Psnr, ClosedForm) {
    Image a(8, 8, 3, 0.0f), b(8, 8, 3, 0.1f);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-5);
    EXPECT_NEAR(psnr(a, b, 2.0), 20.0 + 20.0 * std::log10(2.0), 1e-5);
    EXPECT_EQ(psnr(a, a), 99.0);
    EXPECT_THROW(psnr(a, b, 0.0), DomainError);
    EXPECT_THROW(psnr(a, Image(8, 4, 3)), DimensionError);
}

TEST(Psnr, MatchesScalarOracleAndIsSymmetric) {
    Rng rng(1);
    for (int t = 0; t < 5; ++t) {
        auto a = random_image(13, 17, 3, rng), b = random_image(13, 17, 3, rng);
        EXPECT_NEAR(psnr(a, b), psnr_oracle(a, b), 1e-9);
        EXPECT_EQ(psnr(a, b), psnr(b, a));
    }
}

TEST(Ssim, IdentityIsOne) {
    Rng rng(2);
    auto a = random_image(20, 24, 3, rng);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, ConstantImagesClosedForm) {
    const double c1 = 1e-4;
    EXPECT_NEAR(ssim(Image(12, 12, 3, 0.0f), Image(12, 12, 3, 1.0f)), c1 / (1 + c1), 1e-12);
}

TEST(Ssim, MatchesWindowedLoopOracle) {
    Rng rng(3);
    for (int t = 0; t < 3; ++t) {
        auto a = random_image(19, 23, 3, rng);
        auto b = a;
        for (float& v : b.pixels()) v = std::clamp(v + static_cast<float>(rng.normal() * 0.1), 0.0f, 1.0f);
        const double s = ssim(a, b);
        EXPECT_NEAR(s, ssim_oracle(a, b), 1e-5);
        EXPECT_NEAR(s, ssim(b, a), 1e-12);
        EXPECT_LT(s, 1.0);
    }
}

TEST(Ssim, RejectsTooSmall) { EXPECT_THROW(ssim(Image(10, 40, 3), Image(10, 40, 3)), DimensionError); }

TEST(Summary, PopulationStatisticsAndOrderIndependence) {
    auto s = summarize({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
    EXPECT_EQ(s.min, 1);
    EXPECT_EQ(s.max, 4);
    Rng rng(4);
    std::vector<double> v;
    for (int i = 0; i < 101; ++i) v.push_back(rng.uniform(10, 40));
    const auto ref = summarize(v);
    std::mt19937 g(5);
    for (int t = 0; t < 5; ++t) {
        std::shuffle(v.begin(), v.end(), g);
        const auto s2 = summarize(v);
        EXPECT_EQ(s2.mean, ref.mean);
        EXPECT_EQ(s2.std, ref.std);
    }
}

TEST(EvaluateSlices, OracleRendererScoresPerfect) {
    const auto ds = small_ggx();
    auto report = evaluate_slices(ds, [&](const btf::DirectionPair& p) { return ds.get_slice(p); });
    ASSERT_EQ(report.slices.size(), ds.size());
    EXPECT_EQ(report.psnr.mean, 99.0);
    EXPECT_NEAR(report.ssim.mean, 1.0, 1e-12);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(report.slices[i].pair, ds.pairs()[i]);
}

TEST(EvaluateSlices, SubsetAndPermutationInvariance) {
    const auto ds = small_ggx();
    auto blur = [&](const btf::DirectionPair& p) {
        auto img = ds.get_slice(p);
        for (float& v : img.pixels()) v *= 0.9f;
        return img;
    };
    const auto a = evaluate_slices(ds, blur, {1, 4, 7, 9});
    const auto b = evaluate_slices(ds, blur, {9, 7, 1, 4});
    ASSERT_EQ(a.slices.size(), 4u);
    EXPECT_EQ(a.psnr.mean, b.psnr.mean);
    EXPECT_EQ(a.ssim.std, b.ssim.std);
    EXPECT_EQ(a.slices[0].pair, ds.pairs()[1]);
    EXPECT_LT(a.psnr.mean, 99.0);
}

TEST(EvaluateFull, DefaultModelCountsAndStorage) {
    const auto ds = small_ggx(16, 6);
    model::Model m(model::ModelConfig{}, 0);
    const auto report = evaluate_full(m, ds);
    EXPECT_EQ(report.renderer_parameters, 3011u);
    EXPECT_EQ(report.texture_channels, 14);
    EXPECT_EQ(report.storage.raw_bytes, 6u * 16 * 16 * 3 * 4);
    EXPECT_EQ(report.storage.texture_bytes, 16u * 16 * 14 * 4);
    EXPECT_EQ(report.storage.renderer_bytes, 3011u * 4);
    EXPECT_EQ(report.slices.size(), 6u);
    const auto table = format_report_table(report);
    EXPECT_NE(table.find("LPIPS"), std::string::npos);
    EXPECT_NE(table.find("3011"), std::string::npos);
}

TEST(Storage, RatioArithmetic) {
    const auto s = storage_account(100, 64, 64, 14, 3011);
    EXPECT_EQ(s.raw_bytes, 100u * 64 * 64 * 12);
    EXPECT_NEAR(s.ratio(), (100.0 * 64 * 64 * 12) / (64.0 * 64 * 14 * 4 + 3011 * 4), 1e-12);
}

TEST(Csv, RowsAndColumns) {
    const auto ds = small_ggx(16, 5);
    const auto report = evaluate_slices(ds, [&](const btf::DirectionPair& p) { return ds.get_slice(p); });
    const auto csv = format_report_csv(report);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 2);
    EXPECT_EQ(csv.find("row,theta_cam,phi_cam,theta_light,phi_light,psnr,ssim,lpips,flip\n"), 0u);
    EXPECT_NE(csv.find("\nmean,"), std::string::npos);
    EXPECT_NE(csv.find("\nstd,"), std::string::npos);
}

TEST(Pca, FullRankIsNearExact) {
    const auto ds = small_ggx(16, 10);
    EXPECT_GE(pca_baseline(ds, 10).psnr, 60.0);
}

TEST(Pca, LambertianIsRankOne) {
    const auto ds = btf::render_synthetic_btf(btf::lambertian_maps(16), btf::strided_hemisphere_pairs(12));
    EXPECT_GE(pca_baseline(ds, 1).psnr, 60.0);
}

TEST(Pca, MonotoneInRankAndBytes) {
    const auto ds = small_ggx(16, 12);
    const auto r = pca_baseline(ds, std::vector<int>{1, 2, 4, 8});
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GE(r[i].psnr, r[i - 1].psnr - 1e-9);
    EXPECT_EQ(r[2].bytes, 4u * (12 + 16 * 16 * 3) * 4);
    EXPECT_EQ(pca_baseline(ds, 4).psnr, r[2].psnr);
    EXPECT_THROW(pca_baseline(ds, 0), DomainError);
    EXPECT_THROW(pca_baseline(ds, 13), DomainError);
}

TEST(Latents, StandardizedLogistic) {
    EXPECT_NEAR(latent_display(0.0), 1.0 / (std::exp(1.0) + 1.0), 1e-15);
    EXPECT_NEAR(latent_display(1.0), 0.5, 1e-15);
    EXPECT_NEAR(latent_display(0.0), 0.26894, 1e-5);
    EXPECT_NEAR(latent_display(60.0), 1.0, 1e-15);
    EXPECT_NEAR(latent_display(-60.0), 0.0, 1e-15);
    model::NeuralTexture tex(2, 2, 2);
    const float vals[4] = {1, 3, 1, 3};
    for (int i = 0; i < 4; ++i) {
        tex.at(i / 2, i % 2, 0) = vals[i];
        tex.at(i / 2, i % 2, 1) = 5.0f;
    }
    const auto imgs = visualize_latents(tex);
    ASSERT_EQ(imgs.size(), 2u);
    EXPECT_EQ(imgs[0].channels(), 1);
    // mean 2, population std 1: standardized values are -1 and +1.
    EXPECT_NEAR(imgs[0].at(0, 0, 0), latent_display(-1.0), 1e-6);
    EXPECT_NEAR(imgs[0].at(0, 1, 0), latent_display(1.0), 1e-6);
    EXPECT_NEAR(imgs[1].at(1, 1, 0), latent_display(0.0), 1e-6);
}

TEST(Throughput, CountsSamples) {
    model::Model m(model::ModelConfig{}, 0);
    const auto t = measure_render_throughput(m.renderer(), 1024, 0.05);
    EXPECT_GT(t.samples, 0u);
    EXPECT_EQ(t.samples % 1024, 0u);
    EXPECT_GT(t.samples_per_second(), 0.0);
}
