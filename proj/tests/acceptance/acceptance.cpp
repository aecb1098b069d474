// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck_cases.hpp"
#include "neubtf/btf/nbtf_io.hpp"
#include "neubtf/btf/synthetic.hpp"
#include "neubtf/cli/run_config.hpp"
#include "neubtf/common/binary_io.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/eval/metrics.hpp"
#include "neubtf/eval/report.hpp"
#include "neubtf/model/checkpoint.hpp"
#include "neubtf/propagate/nbtx_io.hpp"
#include "neubtf/training/losses.hpp"
#include "neubtf/training/train.hpp"

namespace fs = std::filesystem;
using namespace neubtf;
using btf::DirectionPair;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

DirectionPair random_pair(Rng& rng) {
    auto dir = [&] {
        return btf::Direction{static_cast<float>(rng.uniform(0, 80)), static_cast<float>(rng.uniform(0, 360))};
    };
    return {dir(), dir()};
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) return INFINITY;
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, double(std::abs(a[i] - b[i])));
    return worst;
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Shared state: later criteria reuse the runs of criteria 3 and 4.
struct Context {
    fs::path work;
    std::optional<btf::BtfDataset> lambertian;
    std::optional<training::TrainResult> lambertian_run;
    std::optional<btf::BtfDataset> ggx;
    std::unique_ptr<model::Model> ggx_model;
    Image ggx_guidance;
    int ggx_steps = 20000;
};

training::TrainOptions run_options(const fs::path& dir, bool deterministic) {
    fs::create_directories(dir);
    training::TrainOptions o{.seed = 0, .deterministic = deterministic, .output_dir = dir, .extra_config = "", .on_step = {}};
    o.on_step = [](const training::StepRecord& r) {
        if (r.step % 1000 == 0) std::cerr << "  step " << r.step << " loss " << format_double(r.loss.total) << "\n";
    };
    return o;
}

// 1 ------------------------------------------------------------------------
Outcome parameter_anchor(Context&) {
    model::Model m(model::ModelConfig{}, 0);
    const auto params = model::count_parameters(m.renderer());
    Rng rng(1);
    Image g(64, 64, 3);
    for (float& v : g.pixels()) v = static_cast<float>(rng.uniform());
    const auto report_channels = model::encode(m.autoencoder(), g).depth();
    return {params == 3011 && report_channels == 14,
            "renderer parameters " + std::to_string(params) + ", texture channels " + std::to_string(report_channels)};
}

// 2 ------------------------------------------------------------------------
Outcome gradient_check(Context&) {
    const auto t0 = Clock::now();
    const auto f32 = testing::gradcheck_all_ops<float>(1e-3, 11);
    const auto f64 = testing::gradcheck_all_ops<double>(1e-6, 12);
    double w32 = 0, w64 = 0;
    std::string worst32, worst64;
    for (const auto& [name, w] : f32)
        if (w >= w32) w32 = w, worst32 = name;
    for (const auto& [name, w] : f64)
        if (w >= w64) w64 = w, worst64 = name;
    const double secs = seconds_since(t0);
    return {w32 < 1e-3 && w64 < 1e-6 && secs < 120,
            std::to_string(f32.size()) + " ops x 100 configs; float32 max rel err " + fmt("%.3g", w32) + " (" + worst32 +
                "), float64 " + fmt("%.3g", w64) + " (" + worst64 + "), " + fmt("%.1f s", secs)};
}

// 3 ------------------------------------------------------------------------
const btf::BtfDataset& lambertian(Context& ctx) {
    if (!ctx.lambertian)
        ctx.lambertian = btf::render_synthetic_btf(btf::lambertian_maps(32), btf::strided_hemisphere_pairs(24));
    return *ctx.lambertian;
}

training::TrainConfig lambertian_config() {
    training::TrainConfig c;
    c.steps = 5000;
    return c;
}

Outcome lambertian_fit(Context& ctx) {
    const auto t0 = Clock::now();
    const auto& ds = lambertian(ctx);
    ctx.lambertian_run =
        training::train(ds, model::ModelConfig{}, lambertian_config(), run_options(ctx.work / "lambertian_a", true));
    const double train_secs = seconds_since(t0);
    const auto report = eval::evaluate_full(*ctx.lambertian_run->model, ds);
    return {report.psnr.mean >= 35.0, "mean training-slice PSNR " + fmt("%.2f dB", report.psnr.mean) + " (min " +
                                          fmt("%.2f", report.psnr.min) + "), 5000 steps in " +
                                          fmt("%.0f s", train_secs)};
}

// 8 ------------------------------------------------------------------------
Outcome loss_identities(Context& ctx) {
    Rng rng(8);
    Image a(32, 32, 3), b(32, 32, 3);
    for (float& v : a.pixels()) v = static_cast<float>(rng.uniform(0, 2));
    for (float& v : b.pixels()) v = static_cast<float>(rng.uniform(0, 2));
    const auto ta = model::image_to_tensor(a), tb = model::image_to_tensor(b);
    training::LossWeights w{.l1 = 0.7, .style = 0.3, .freq = 0.2};
    const auto same = training::report(training::loss_terms(ta, ta, w), w);
    const double zero = std::max({std::abs(same.l1_log), std::abs(same.style), std::abs(same.freq)});
    const auto diff = training::report(training::loss_terms(ta, tb, w), w);
    const double weighted = w.l1 * diff.l1_log + w.style * diff.style + w.freq * diff.freq;
    const double sum_err = std::abs(diff.total - weighted);

    if (!ctx.lambertian_run) return {false, "criterion 3 run unavailable"};
    const auto& curve = ctx.lambertian_run->curve;
    // Exponential moving average with a 100-step time constant.
    double ema = curve.front().loss.total, at100 = 0, at5000 = 0;
    for (const auto& r : curve) {
        ema += (r.loss.total - ema) / 100.0;
        if (r.step == 100) at100 = ema;
        if (r.step == 5000) at5000 = ema;
    }
    return {zero == 0.0 && sum_err < 1e-6 && at5000 < at100,
            "identical-input components max " + fmt("%.3g", zero) + ", |total - weighted sum| " + fmt("%.3g", sum_err) +
                ", smoothed loss step 100 " + fmt("%.5f", at100) + " -> step 5000 " + fmt("%.5f", at5000)};
}

// 9 ------------------------------------------------------------------------
Outcome determinism(Context& ctx) {
    training::train(lambertian(ctx), model::ModelConfig{}, lambertian_config(),
                    run_options(ctx.work / "lambertian_b", true));
    bool same = true;
    std::string detail;
    for (const char* f : {"checkpoint.nbck", "loss.csv"}) {
        const auto x = file_bytes(ctx.work / "lambertian_a" / f), y = file_bytes(ctx.work / "lambertian_b" / f);
        const bool eq = !x.empty() && x == y;
        same = same && eq;
        detail += std::string(detail.empty() ? "" : ", ") + f + (eq ? " identical (" : " DIFFERS (") +
                  std::to_string(x.size()) + " bytes)";
    }
    return {same, detail};
}

// 4 ------------------------------------------------------------------------
Outcome generalization(Context& ctx) {
    const auto t0 = Clock::now();
    ctx.ggx = btf::render_synthetic_btf(btf::ggx_textured_maps(64), btf::grid7_pairs());
    const auto& ds = *ctx.ggx;
    const auto held = btf::holdout_indices(ds.size(), 9);
    const auto train_set = ds.select(btf::complement(ds.size(), held));
    training::TrainConfig cfg;
    cfg.steps = ctx.ggx_steps;
    auto run = training::train(train_set, model::ModelConfig{}, cfg, run_options(ctx.work / "ggx", false));
    ctx.ggx_model = std::move(run.model);
    const double train_secs = seconds_since(t0);

    const std::size_t guide = btf::most_frontal_pair(ds);
    ctx.ggx_guidance = tonemap(ds.slice(guide));
    const auto report = eval::evaluate_full(*ctx.ggx_model, ds, {.indices = held, .guidance_index = guide});
    const auto train_report =
        eval::evaluate_full(*ctx.ggx_model, ds, {.indices = btf::complement(ds.size(), held), .guidance_index = guide});
    {
        std::ofstream(ctx.work / "ggx" / "holdout_report.csv") << eval::format_report_csv(report);
        std::ofstream(ctx.work / "ggx" / "holdout_report.txt") << eval::format_report_table(report);
    }
    return {report.psnr.mean >= 24.0 && report.ssim.mean >= 0.6,
            "held-out (9 of " + std::to_string(ds.size()) + ") PSNR " + fmt("%.2f", report.psnr.mean) + " +- " +
                fmt("%.2f dB", report.psnr.std) + ", SSIM " + fmt("%.3f", report.ssim.mean) + "; training pairs " +
                fmt("%.2f dB", train_report.psnr.mean) + "; " + std::to_string(cfg.steps) + " steps in " +
                fmt("%.0f s", train_secs)};
}

// 5 ------------------------------------------------------------------------
Outcome shift_equivariance(Context& ctx) {
    if (!ctx.ggx_model) return {false, "criterion 4 checkpoint unavailable"};
    const auto& net = ctx.ggx_model->autoencoder();
    const auto base = model::encode(net, ctx.ggx_guidance);
    const auto shifted = model::encode(net, roll(ctx.ggx_guidance, 8, 8));
    const double tex = max_abs_diff(shifted.tensor().data(), base.rolled(8, 8).tensor().data());
    Rng rng(5);
    double slice = 0;
    for (int i = 0; i < 3; ++i) {
        const auto pair = random_pair(rng);
        const auto a = model::render_slice(ctx.ggx_model->renderer(), shifted, pair);
        const auto b = roll(model::render_slice(ctx.ggx_model->renderer(), base, pair), 8, 8);
        slice = std::max(slice, max_abs_diff(a.pixels(), b.pixels()));
    }
    return {tex < 1e-4 && slice < 1e-4,
            "texture max abs diff " + fmt("%.3g", tex) + ", rendered slice " + fmt("%.3g", slice)};
}

// 6 ------------------------------------------------------------------------
Outcome tileability(Context& ctx) {
    if (!ctx.ggx_model) return {false, "criterion 4 checkpoint unavailable"};
    const auto single = propagate::make_tileable(*ctx.ggx_model, ctx.ggx_guidance);
    const auto tiled = propagate::make_tileable(*ctx.ggx_model, tile(ctx.ggx_guidance, 2, 2));
    Rng rng(6);
    double tile_err = 0, seam = 0;
    for (int i = 0; i < 5; ++i) {
        const auto pair = random_pair(rng);
        tile_err = std::max(tile_err, max_abs_diff(tiled.render(pair).pixels(), tile(single.render(pair), 2, 2).pixels()));
        seam = std::max(seam, propagate::seam_metric(single, pair));
    }
    return {tile_err < 1e-4 && seam < 1e-5,
            "2x2 tiled render vs tiled image max abs diff " + fmt("%.3g", tile_err) + ", seam metric " + fmt("%.3g", seam)};
}

// 7 ------------------------------------------------------------------------
Outcome multires(Context& ctx) {
    if (!ctx.ggx_model) return {false, "criterion 4 checkpoint unavailable"};
    const auto full = propagate::propagate(*ctx.ggx_model, ctx.ggx_guidance);
    const auto half = propagate::make_multires(*ctx.ggx_model, ctx.ggx_guidance, 0.5);
    std::vector<double> scores;
    for (const auto& pair : ctx.ggx->pairs()) {
        const auto reference = resample_area(full.render(pair), half.btf.height(), half.btf.width());
        scores.push_back(eval::psnr(tonemap(half.btf.render(pair)), tonemap(reference)));
    }
    const auto s = eval::summarize(scores);
    bool quarter_ok = false;
    std::size_t warnings = 0;
    try {
        const auto quarter = propagate::make_multires(*ctx.ggx_model, ctx.ggx_guidance, 0.25);
        quarter.btf.render(ctx.ggx->pairs().front());
        warnings = quarter.warnings.size();
        quarter_ok = warnings > 0;
    } catch (const Error&) {
    }
    return {s.mean >= 20.0 && quarter_ok,
            "scale 0.5 vs area-downsampled full render PSNR " + fmt("%.2f dB", s.mean) + " (min " + fmt("%.2f", s.min) +
                ", " + std::to_string(scores.size()) + " pairs); scale 0.25 " +
                (quarter_ok ? "completed with " + std::to_string(warnings) + " warning(s)" : "did not warn")};
}

// 10 -----------------------------------------------------------------------
Outcome baseline_sanity(Context& ctx) {
    if (!ctx.ggx) ctx.ggx = btf::render_synthetic_btf(btf::ggx_textured_maps(64), btf::grid7_pairs());
    const auto& ds = *ctx.ggx;
    std::vector<int> ranks = {1, 2, 4, 8, 16, 32, static_cast<int>(ds.size())};
    const auto pca = eval::pca_baseline(ds, ranks);
    bool monotone = true;
    for (std::size_t i = 1; i < pca.size(); ++i) monotone = monotone && pca[i].psnr >= pca[i - 1].psnr;
    const double lamb = eval::pca_baseline(lambertian(ctx), 1).psnr;
    const auto storage = eval::storage_account(ds.size(), ds.height(), ds.width(), 14, 3011);
    const double ratio = storage.ratio();
    const double ratio100 = eval::storage_account(100, 64, 64, 14, 3011).ratio();
    std::string curve;
    for (const auto& p : pca) curve += (curve.empty() ? "" : " ") + fmt("%.1f", p.psnr);
    return {monotone && lamb >= 60.0 && ratio > 15.0,
            "PCA PSNR by rank {1..49}: " + curve + (monotone ? " (non-decreasing)" : " (NOT monotone)") +
                "; Lambertian rank-1 " + fmt("%.1f dB", lamb) + "; compression ratio " + fmt("%.2fx", ratio) + " for " +
                std::to_string(ds.size()) + " slices of 64x64 (" + fmt("%.1fx", ratio100) + " at 100 slices)"};
}

// 11 -----------------------------------------------------------------------
template <typename Decode>
int corrupt_rejections(const std::vector<std::uint8_t>& good, const Decode& decode,
                       const std::vector<std::pair<std::size_t, std::uint8_t>>& patches, std::string& failures,
                       const char* name) {
    std::vector<std::vector<std::uint8_t>> corpus;
    corpus.emplace_back(good.begin(), good.begin() + good.size() / 2);
    corpus.emplace_back(good.begin(), good.begin() + 3);
    corpus.push_back(good);
    corpus.back().push_back(0);
    for (const auto& [offset, value] : patches) {
        corpus.push_back(good);
        corpus.back().at(offset) = value;
    }
    int rejected = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        try {
            decode(corpus[i]);
            failures += std::string(" ") + name + "#" + std::to_string(i) + " accepted;";
        } catch (const std::exception& e) {
            if (cli::exit_code_for(e) == cli::kExitFormat) ++rejected;
            else failures += std::string(" ") + name + "#" + std::to_string(i) + " wrong error;";
        }
    }
    return rejected;
}

Outcome format_round_trips(Context& ctx) {
    std::string failures;
    Rng rng(11);
    // NBTF
    const auto ds = btf::render_synthetic_btf(btf::ggx_textured_maps(16, 2), btf::strided_hemisphere_pairs(5));
    btf::save_btf(ds, ctx.work / "rt.nbtf", btf::PayloadPrecision::Float32);
    const bool nbtf_ok = btf::load_btf(ctx.work / "rt.nbtf") == ds;
    // NBCK
    model::ModelConfig small;
    small.autoencoder.widths = {4, 8, 8};
    model::Model m(small, 3);
    for (const auto& e : m.named_parameters()) {
        tensor::Tensor t = e.value;
        for (float& v : t.data()) v += static_cast<float>(rng.uniform(-0.01, 0.01));
    }
    model::save_checkpoint(ctx.work / "rt.nbck", m, {.step = 7, .seed = 9, .extra_config = ""});
    const auto back = model::load_checkpoint(ctx.work / "rt.nbck");
    bool nbck_ok = back.info.step == 7 && back.info.seed == 9;
    const auto pa = m.named_parameters(), pb = back.model->named_parameters();
    nbck_ok = nbck_ok && pa.size() == pb.size();
    for (std::size_t i = 0; nbck_ok && i < pa.size(); ++i)
        nbck_ok = pa[i].name == pb[i].name && pa[i].value.shape() == pb[i].value.shape() &&
                  std::equal(pa[i].value.data().begin(), pa[i].value.data().end(), pb[i].value.data().begin());
    nbck_ok = nbck_ok && model::encode_checkpoint(*back.model, back.info) == model::encode_checkpoint(m, back.info);
    // NBTX
    Image g(16, 16, 3);
    for (float& v : g.pixels()) v = static_cast<float>(rng.uniform());
    const auto nb = propagate::propagate(m, g);
    propagate::export_neural_btf(nb, ctx.work / "rt.nbtx", btf::PayloadPrecision::Float32);
    const auto nb2 = propagate::import_neural_btf(ctx.work / "rt.nbtx");
    const DirectionPair pair{{30, 40}, {50, 60}};
    const bool nbtx_ok = nb2.texture() == nb.texture() && nb2.texel_size_mm() == nb.texel_size_mm() &&
                         nb2.render(pair) == nb.render(pair) &&
                         propagate::encode_neural_btf(nb2, btf::PayloadPrecision::Float32) ==
                             propagate::encode_neural_btf(nb, btf::PayloadPrecision::Float32);

    int rejected = 0, total = 0;
    const auto nbtf_bytes = btf::encode_btf(ds, btf::PayloadPrecision::Float32);
    rejected += corrupt_rejections(nbtf_bytes, [](const auto& b) { return btf::decode_btf(b); },
                                   {{0, 'X'}, {4, 9}, {6, 0x80}, {8, 0}, {16, 0}}, failures, "nbtf");
    const auto nbck_bytes = file_bytes(ctx.work / "rt.nbck");
    rejected += corrupt_rejections(nbck_bytes, [](const auto& b) { return model::decode_checkpoint(b); },
                                   {{0, 'X'}, {4, 2}, {6, 0xff}, {9, 0xff}}, failures, "nbck");
    const auto nbtx_bytes = file_bytes(ctx.work / "rt.nbtx");
    rejected += corrupt_rejections(nbtx_bytes, [](const auto& b) { return propagate::decode_neural_btf(b); },
                                   {{0, 'X'}, {4, 3}, {6, 0}, {14, 0}, {20, 0x7c}}, failures, "nbtx");
    total = 3 * 3 + 5 + 4 + 5;
    const bool ok = nbtf_ok && nbck_ok && nbtx_ok && rejected == total;
    return {ok, std::string("NBTF ") + (nbtf_ok ? "bit-exact" : "MISMATCH") + ", NBCK " +
                    (nbck_ok ? "bit-exact" : "MISMATCH") + ", NBTX " + (nbtx_ok ? "bit-exact" : "MISMATCH") + "; " +
                    std::to_string(rejected) + "/" + std::to_string(total) +
                    " corrupted files rejected with format errors (exit code 3)" + failures};
}

// 12 -----------------------------------------------------------------------
Outcome throughput(Context&) {
    model::Model m(model::ModelConfig{}, 0);
    const auto t = eval::measure_render_throughput(m.renderer(), 65536, 2.0);
    const double rate = t.samples_per_second();
    return {rate >= 1e5, fmt("%.4g samples/s", rate) + " (" + fmt("%.4g ms per sample", 1e3 / rate) + ", " +
                             std::to_string(t.samples) + " samples, " + std::to_string(model::count_parameters(m.renderer())) +
                             "-parameter renderer)"};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)(Context&);
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neubtf acceptance suite"};
    std::string work = "acceptance_work";
    std::vector<int> only, expect_fail;
    int ggx_steps = 20000;
    app.add_option("--work", work, "Directory for runs and artifacts")->capture_default_str();
    app.add_option("--only", only, "Run only these criteria (diagnostics)")->delimiter(',');
    app.add_option("--expect-fail", expect_fail, "Criteria known to be unattainable; their FAIL does not fail the run")
        ->delimiter(',');
    app.add_option("--ggx-steps", ggx_steps, "Training steps for criterion 4 (diagnostics)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    Context ctx;
    ctx.work = work;
    ctx.ggx_steps = ggx_steps;
    fs::create_directories(ctx.work);

    // Execution order follows data dependencies; output is sorted by id.
    const std::vector<Criterion> criteria = {
        {1, "parameter anchor", parameter_anchor},
        {2, "gradient correctness", gradient_check},
        {11, "format round trips", format_round_trips},
        {12, "throughput", throughput},
        {3, "Lambertian fit", lambertian_fit},
        {8, "loss identities", loss_identities},
        {9, "determinism", determinism},
        {4, "generalization across directions", generalization},
        {5, "shift equivariance", shift_equivariance},
        {6, "tileability", tileability},
        {7, "multi-resolution", multires},
        {10, "baseline sanity", baseline_sanity},
    };
    const std::set<int> selected(only.begin(), only.end());
    const std::set<int> expected(expect_fail.begin(), expect_fail.end());
    std::map<int, std::string> lines;
    int unexpected = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::string line = std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + " (" + c.name +
                           "): " + o.detail + " [" + fmt("%.1f s", seconds_since(t0)) + "]";
        if (!o.pass && expected.contains(c.id)) line += " [expected failure]";
        if (!o.pass && !expected.contains(c.id)) ++unexpected;
        std::cout << line << std::endl;
        lines[c.id] = line;
    }
    std::ostringstream summary;
    summary << "---- acceptance summary ----\n";
    for (const auto& [id, line] : lines) summary << line << "\n";
    std::cout << summary.str();
    std::ofstream(ctx.work / "acceptance_report.txt") << summary.str();
    return unexpected == 0 ? 0 : 1;
}
