// SPDX-License-Identifier: Apache-2.0
#include "neubtf/eval/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SVD>

#include "neubtf/common/error.hpp"
#include "neubtf/common/kv_config.hpp"
#include "neubtf/common/parallel.hpp"
#include "neubtf/common/rng.hpp"
#include "neubtf/eval/metrics.hpp"
#include "neubtf/propagate/neural_btf.hpp"

namespace neubtf::eval {

Summary summarize(std::vector<double> values) {
    Summary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / values.size();
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / values.size());
    s.min = values.front();
    s.max = values.back();
    return s;
}

StorageAccount storage_account(std::size_t n_slices, int height, int width, int latent_channels,
                               std::size_t renderer_parameters) {
    const std::size_t texels = static_cast<std::size_t>(height) * width;
    return {.raw_bytes = n_slices * texels * 3 * 4,
            .texture_bytes = texels * latent_channels * 4,
            .renderer_bytes = renderer_parameters * 4};
}

MetricReport evaluate_slices(const btf::BtfDataset& dataset, const SliceRenderer& render,
                             const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> selected = indices;
    if (selected.empty())
        for (std::size_t i = 0; i < dataset.size(); ++i) selected.push_back(i);
    MetricReport report;
    report.slices.resize(selected.size());
    parallel_for(selected.size(), [&](std::size_t k) {
        const std::size_t i = selected.at(k);
        const auto& pair = dataset.pairs().at(i);
        const auto truth = tonemap(dataset.slice(i));
        const auto pred = tonemap(render(pair));
        report.slices[k] = {pair, psnr(pred, truth), ssim(pred, truth)};
    });
    std::vector<double> p, s;
    for (const auto& m : report.slices) {
        p.push_back(m.psnr);
        s.push_back(m.ssim);
    }
    report.psnr = summarize(p);
    report.ssim = summarize(s);
    return report;
}

MetricReport evaluate_full(const model::Model& model, const btf::BtfDataset& dataset, const EvalOptions& options) {
    const std::size_t guide = options.guidance_index.value_or(btf::most_frontal_pair(dataset));
    const auto nb = propagate::propagate(model, tonemap(dataset.slice(guide)), dataset.texel_size_mm());
    auto report = evaluate_slices(dataset, [&](const btf::DirectionPair& pair) { return nb.render(pair); },
                                  options.indices);
    report.renderer_parameters = model::count_parameters(model.renderer());
    report.texture_channels = nb.texture().depth();
    report.storage = storage_account(dataset.size(), dataset.height(), dataset.width(), report.texture_channels,
                                     report.renderer_parameters);
    return report;
}

std::vector<PcaResult> pca_baseline(const btf::BtfDataset& dataset, const std::vector<int>& ranks) {
    const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
    const Eigen::Index m = static_cast<Eigen::Index>(dataset.slice(0).size());
    for (int r : ranks) {
        if (r < 1 || r > n) {
            throw DomainError("pca rank " + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
        }
    }
    Eigen::MatrixXd x(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto px = dataset.slice(i).pixels();
        for (Eigen::Index j = 0; j < m; ++j) x(i, j) = px[j];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);

    std::vector<PcaResult> results;
    for (int r : ranks) {
        const Eigen::MatrixXd recon = (svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
                                       svd.matrixV().leftCols(r).transpose())
                                          .rowwise() +
                                      mean;
        double mse = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j) {
                const double a = tonemap(static_cast<float>(std::max(0.0, recon(i, j))));
                const double b = tonemap(static_cast<float>(x(i, j)));
                mse += (a - b) * (a - b);
            }
        mse /= static_cast<double>(n * m);
        const double db = mse == 0.0 ? 99.0 : std::min(99.0, -10.0 * std::log10(mse));
        results.push_back({r, db, static_cast<std::size_t>(r) * static_cast<std::size_t>(n + m) * 4});
    }
    return results;
}

PcaResult pca_baseline(const btf::BtfDataset& dataset, int rank) { return pca_baseline(dataset, std::vector{rank})[0]; }

double latent_display(double c) { return 1.0 / (std::exp(1.0 - c) + 1.0); }

std::vector<Image> visualize_latents(const model::NeuralTexture& texture) {
    const int h = texture.height(), w = texture.width();
    std::vector<Image> out;
    for (int c = 0; c < texture.depth(); ++c) {
        double sum = 0.0, sq = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) sum += texture.at(y, x, c);
        const double mean = sum / (h * w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) sq += (texture.at(y, x, c) - mean) * (texture.at(y, x, c) - mean);
        const double sd = std::sqrt(sq / (h * w));
        Image img(h, w, 1);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double z = sd > 0.0 ? (texture.at(y, x, c) - mean) / sd : 0.0;
                img.at(y, x, 0) = static_cast<float>(latent_display(z));
            }
        out.push_back(std::move(img));
    }
    return out;
}

std::string format_report_csv(const MetricReport& report) {
    std::ostringstream out;
    out << "row,theta_cam,phi_cam,theta_light,phi_light,psnr,ssim,lpips,flip\n";
    for (std::size_t i = 0; i < report.slices.size(); ++i) {
        const auto& s = report.slices[i];
        out << i << ',' << format_double(s.pair.camera.theta) << ',' << format_double(s.pair.camera.phi) << ','
            << format_double(s.pair.light.theta) << ',' << format_double(s.pair.light.phi) << ','
            << format_double(s.psnr) << ',' << format_double(s.ssim) << ",,\n";
    }
    out << "mean,,,,," << format_double(report.psnr.mean) << ',' << format_double(report.ssim.mean) << ",,\n";
    out << "std,,,,," << format_double(report.psnr.std) << ',' << format_double(report.ssim.std) << ",,\n";
    return out.str();
}

std::string format_report_table(const MetricReport& report, const std::vector<PcaResult>& pca) {
    std::ostringstream out;
    char line[160];
    auto row = [&](const char* label, const std::string& value) {
        std::snprintf(line, sizeof line, "%-26s %s\n", label, value.c_str());
        out << line;
    };
    auto pm = [](const Summary& s, int digits) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f +- %.*f", digits, s.mean, digits, s.std);
        return std::string(buf);
    };
    row("Metric", "Value");
    row("PSNR (dB)", pm(report.psnr, 2));
    row("SSIM", pm(report.ssim, 3));
    row("LPIPS", "n/a");
    row("FLIP", "n/a");
    row("Slices", std::to_string(report.slices.size()));
    row("Decoder parameters", std::to_string(report.renderer_parameters));
    row("Texture channels", std::to_string(report.texture_channels));
    row("Raw bytes (float32)", std::to_string(report.storage.raw_bytes));
    row("Neural bytes (float32)", std::to_string(report.storage.texture_bytes + report.storage.renderer_bytes));
    if (report.storage.raw_bytes > 0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2fx", report.storage.ratio());
        row("Compression ratio", buf);
    }
    for (const auto& p : pca) {
        char label[48], value[64];
        std::snprintf(label, sizeof label, "PCA rank %d", p.rank);
        std::snprintf(value, sizeof value, "%.2f dB, %zu bytes", p.psnr, p.bytes);
        row(label, value);
    }
    return out.str();
}

Throughput measure_render_throughput(const model::RendererMlp& renderer, std::size_t batch, double min_seconds,
                                     std::uint64_t seed) {
    Rng rng(seed);
    const int d = renderer.config().latent_channels;
    std::vector<float> latents(batch * d);
    for (float& v : latents) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<btf::DirectionPair> pairs(batch);
    for (auto& p : pairs) {
        p.camera = {static_cast<float>(rng.uniform(0, 80)), static_cast<float>(rng.uniform(0, 360))};
        p.light = {static_cast<float>(rng.uniform(0, 80)), static_cast<float>(rng.uniform(0, 360))};
    }
    Throughput t;
    const auto start = std::chrono::steady_clock::now();
    do {
        const auto rgb = model::render_points(renderer, latents, pairs);
        t.samples += rgb.size();
        t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } while (t.seconds < min_seconds);
    return t;
}

}  // namespace neubtf::eval
