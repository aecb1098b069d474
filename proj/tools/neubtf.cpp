// SPDX-License-Identifier: Apache-2.0
// neubtf: synthesize BTFs, train, propagate, render, evaluate, and inspect latents.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "neubtf/btf/image_io.hpp"
#include "neubtf/btf/nbtf_io.hpp"
#include "neubtf/btf/synthetic.hpp"
#include "neubtf/cli/run_config.hpp"
#include "neubtf/common/error.hpp"
#include "neubtf/common/parallel.hpp"
#include "neubtf/eval/report.hpp"
#include "neubtf/model/checkpoint.hpp"
#include "neubtf/propagate/nbtx_io.hpp"
#include "neubtf/training/train.hpp"

namespace fs = std::filesystem;
using namespace neubtf;

namespace {

btf::PayloadPrecision parse_precision(const std::string& s) {
    if (s == "f16") return btf::PayloadPrecision::Float16;
    if (s == "f32") return btf::PayloadPrecision::Float32;
    throw ConfigError("precision must be f16 or f32, got `" + s + "`");
}

btf::Direction parse_direction(const std::string& s, const char* what) {
    float theta = 0, phi = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%f,%f%c", &theta, &phi, &tail) != 2)
        throw ConfigError(std::string(what) + " must be `theta,phi` in degrees, got `" + s + "`");
    btf::Direction d{theta, phi};
    if (!btf::is_valid(d)) throw DomainError(std::string(what) + " " + btf::to_string(d) + " is outside the hemisphere");
    return d;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write `" + path.string() + "`");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory `" + dir.string() + "`: " + ec.message());
}

/// PNG output is tone-mapped and sRGB-encoded; PFM keeps linear radiance.
void save_render(const Image& linear, const fs::path& path) {
    if (path.extension() == ".pfm") btf::save_image(linear, path, false);
    else btf::save_image(tonemap(linear), path, true);
}

KeyValueConfig checkpoint_kv(const model::Checkpoint& ckpt) {
    return KeyValueConfig::parse(ckpt.info.extra_config, "checkpoint config");
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string preset = "lambertian";
    int size = 32;
    std::string angles = "24";
    std::uint64_t seed = 7;
    float texel_size = 0.1f;
    std::string precision = "f16";
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    if (a.size < 1) throw ConfigError("--size must be positive");
    btf::SvbrdfMaps maps;
    if (a.preset == "lambertian") maps = btf::lambertian_maps(a.size);
    else if (a.preset == "ggx-textured") maps = btf::ggx_textured_maps(a.size, a.seed);
    else throw ConfigError("unknown preset `" + a.preset + "` (lambertian, ggx-textured)");

    std::vector<btf::DirectionPair> pairs;
    if (a.angles == "grid7") {
        pairs = btf::grid7_pairs();
    } else {
        std::size_t used = 0;
        int count = 0;
        try {
            count = std::stoi(a.angles, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != a.angles.size() || count < 1) throw ConfigError("--angles must be a positive count or `grid7`");
        pairs = btf::strided_hemisphere_pairs(count);
    }
    const auto ds = btf::render_synthetic_btf(maps, pairs, a.texel_size);
    btf::save_btf(ds, a.out, parse_precision(a.precision));
    std::cout << "wrote " << a.out << ": " << ds.height() << "x" << ds.width() << " texels, " << ds.size()
              << " direction pairs\n";
    return cli::kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> btf;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> holdout;
    bool deterministic = false;
};

int cmd_train(const TrainArgs& a) {
    auto overrides = a.sets;
    if (a.btf) overrides.push_back("run.dataset=" + *a.btf);
    if (a.out) overrides.push_back("run.output_dir=" + *a.out);
    if (a.seed) overrides.push_back("run.seed=" + std::to_string(*a.seed));
    if (a.steps) overrides.push_back("train.steps=" + std::to_string(*a.steps));
    if (a.holdout) overrides.push_back("run.holdout=" + std::to_string(*a.holdout));
    if (a.deterministic) overrides.push_back("run.deterministic=true");
    const auto cfg = cli::load_run_config(a.config, overrides);
    if (cfg.dataset.empty()) throw ConfigError("no dataset: set run.dataset or pass --btf");

    const auto effective_kv = cli::to_kv(cfg);
    const std::string effective = effective_kv.to_string();
    std::cout << "# effective config\n" << effective << std::flush;
    ensure_dir(cfg.output_dir);
    write_text(fs::path(cfg.output_dir) / "config.txt", effective);

    if (cfg.deterministic) set_worker_override(1);
    auto dataset = btf::load_btf(cfg.dataset);
    if (cfg.holdout > 0) {
        if (static_cast<std::size_t>(cfg.holdout) >= dataset.size())
            throw ConfigError("run.holdout must leave at least one training pair");
        dataset = dataset.select(btf::complement(dataset.size(), btf::holdout_indices(dataset.size(), cfg.holdout)));
    }

    KeyValueConfig run_keys;
    for (const auto& [k, v] : effective_kv.values())
        if (k.rfind("run.", 0) == 0) run_keys.set(k, v);

    const std::uint64_t every = std::max(1, cfg.train.steps / 20);
    training::TrainOptions options{.seed = cfg.seed,
                                   .deterministic = cfg.deterministic,
                                   .output_dir = cfg.output_dir,
                                   .extra_config = run_keys.to_string(),
                                   .on_step = [&](const training::StepRecord& r) {
                                       if (r.step % every == 0 || r.step == 1 ||
                                           r.step == static_cast<std::uint64_t>(cfg.train.steps))
                                           std::cerr << "step " << r.step << "/" << cfg.train.steps
                                                     << " loss " << format_double(r.loss.total) << "\n";
                                   }};
    training::train(dataset, cfg.model, cfg.train, options);
    std::cout << "wrote " << (fs::path(cfg.output_dir) / "checkpoint.nbck").string() << " and "
              << (fs::path(cfg.output_dir) / "loss.csv").string() << "\n";
    return cli::kExitOk;
}

// ---------------------------------------------------------------- propagate

struct PropagateArgs {
    std::string ckpt;
    std::string guidance;
    std::string btf;
    double scale = 1.0;
    float texel_size = 0.0f;
    std::string precision = "f16";
    std::string out;
};

int cmd_propagate(const PropagateArgs& a) {
    if (a.guidance.empty() == a.btf.empty()) throw ConfigError("pass exactly one of --guidance or --btf");
    const auto ckpt = model::load_checkpoint(a.ckpt);
    const int stride = ckpt.model->config().autoencoder.stride();
    Image guidance;
    float texel = 0.1f;
    if (!a.guidance.empty()) {
        guidance = btf::load_guidance(a.guidance, stride);
    } else {
        const auto ds = btf::load_btf(a.btf);
        guidance = tonemap(ds.slice(btf::most_frontal_pair(ds)));
        texel = ds.texel_size_mm();
    }
    if (a.texel_size > 0.0f) texel = a.texel_size;

    const auto result = propagate::make_multires(*ckpt.model, guidance, a.scale, 0.5, texel);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    propagate::export_neural_btf(result.btf, a.out, parse_precision(a.precision));
    std::cout << "wrote " << a.out << ": " << result.btf.height() << "x" << result.btf.width() << "x"
              << result.btf.texture().depth() << " texture\n";
    return cli::kExitOk;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
    std::string nbtx;
    std::string cam = "0,0";
    std::string light = "0,0";
    int sweep = 0;
    int tile = 1;
    std::string out;
};

int cmd_render(const RenderArgs& a) {
    if (a.tile < 1) throw ConfigError("--tile must be positive");
    const auto nb = propagate::import_neural_btf(a.nbtx);
    const auto cam = parse_direction(a.cam, "--cam");
    const auto light = parse_direction(a.light, "--light");
    auto render = [&](const btf::DirectionPair& p) {
        const auto img = nb.render(p);
        return a.tile > 1 ? tile(img, a.tile, a.tile) : img;
    };
    if (a.sweep <= 0) {
        save_render(render({cam, light}), a.out);
        std::cout << "wrote " << a.out << "\n";
        return cli::kExitOk;
    }
    // Turntable: the light circles at fixed elevation.
    ensure_dir(a.out);
    for (int k = 0; k < a.sweep; ++k) {
        const btf::Direction l{light.theta, static_cast<float>(360.0 * k / a.sweep)};
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03d.png", k);
        save_render(render({cam, l}), fs::path(a.out) / name);
    }
    std::cout << "wrote " << a.sweep << " frames to " << a.out << "\n";
    return cli::kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string ckpt;
    std::string btf;
    std::string slices = "auto";
    std::vector<int> pca_ranks;
    std::optional<std::size_t> guidance_index;
    bool throughput = false;
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    const auto ckpt = model::load_checkpoint(a.ckpt);
    const auto kv = checkpoint_kv(ckpt);
    const std::string btf_path = !a.btf.empty() ? a.btf : (kv.contains("run.dataset") ? kv.get_string("run.dataset") : "");
    if (btf_path.empty()) throw ConfigError("no dataset: pass --btf");
    const auto dataset = btf::load_btf(btf_path);
    const int holdout = kv.contains("run.holdout") ? static_cast<int>(kv.get_int("run.holdout")) : 0;

    eval::EvalOptions options;
    options.guidance_index = a.guidance_index;
    std::string selection = a.slices;
    if (selection == "auto") selection = holdout > 0 ? "holdout" : "all";
    if (selection == "holdout" || selection == "train") {
        if (holdout <= 0 || static_cast<std::size_t>(holdout) >= dataset.size())
            throw ConfigError("--slices " + selection + " needs a checkpoint trained with run.holdout on this dataset");
        const auto held = btf::holdout_indices(dataset.size(), holdout);
        options.indices = selection == "holdout" ? held : btf::complement(dataset.size(), held);
    } else if (selection != "all") {
        throw ConfigError("--slices must be auto, all, holdout, or train");
    }
    if (options.guidance_index && *options.guidance_index >= dataset.size())
        throw ConfigError("--guidance-index out of range");

    const auto report = eval::evaluate_full(*ckpt.model, dataset, options);
    const auto pca = a.pca_ranks.empty() ? std::vector<eval::PcaResult>{} : eval::pca_baseline(dataset, a.pca_ranks);
    std::string table = format_report_table(report, pca);
    if (a.throughput) {
        const auto t = eval::measure_render_throughput(ckpt.model->renderer());
        char line[96];
        std::snprintf(line, sizeof line, "%-26s %.4g samples/s\n", "Render throughput", t.samples_per_second());
        table += line;
    }
    std::cout << table;
    if (!a.out.empty()) {
        ensure_dir(a.out);
        KeyValueConfig echo = kv;
        echo.set("eval.checkpoint", a.ckpt);
        echo.set("eval.dataset", btf_path);
        echo.set("eval.slices", selection);
        echo.set("eval.pca_ranks", format_int_list(a.pca_ranks));
        echo.set("eval.guidance_index",
                 std::to_string(a.guidance_index.value_or(btf::most_frontal_pair(dataset))));
        write_text(fs::path(a.out) / "config.txt", echo.to_string());
        write_text(fs::path(a.out) / "report.csv", format_report_csv(report));
        write_text(fs::path(a.out) / "report.txt", table);
    }
    return cli::kExitOk;
}

// ---------------------------------------------------------------- latents

int cmd_latents(const std::string& nbtx, const std::string& out) {
    const auto nb = propagate::import_neural_btf(nbtx);
    ensure_dir(out);
    const auto images = eval::visualize_latents(nb.texture());
    for (std::size_t c = 0; c < images.size(); ++c) {
        char name[32];
        std::snprintf(name, sizeof name, "latent_%02zu.png", c);
        btf::save_image(images[c], fs::path(out) / name, false);
    }
    std::cout << "wrote " << images.size() << " channel images to " << out << "\n";
    return cli::kExitOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Neural BTF toolkit"};
    app.require_subcommand(1);
    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "Single-threaded numerics and byte-identical outputs");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Render a synthetic BTF to an NBTF file");
    s->add_option("--preset", synth.preset, "lambertian or ggx-textured")->capture_default_str();
    s->add_option("--size", synth.size, "Texels per side")->capture_default_str();
    s->add_option("--angles", synth.angles, "Direction pair count, or grid7")->capture_default_str();
    s->add_option("--seed", synth.seed, "Seed of the ggx-textured maps")->capture_default_str();
    s->add_option("--texel-size", synth.texel_size, "Texel size in mm")->capture_default_str();
    s->add_option("--precision", synth.precision, "Payload precision, f16 or f32")->capture_default_str();
    s->add_option("--out", synth.out, "Output .nbtf")->required();

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train autoencoder and renderer");
    t->add_option("--config", train.config, "key = value config file");
    t->add_option("--set", train.sets, "key=value override (repeatable)");
    t->add_option("--btf", train.btf, "Training dataset (run.dataset)");
    t->add_option("--out", train.out, "Output directory (run.output_dir)");
    t->add_option("--seed", train.seed, "Seed (run.seed)");
    t->add_option("--steps", train.steps, "Optimizer steps (train.steps)");
    t->add_option("--holdout", train.holdout, "Direction pairs withheld from training (run.holdout)");
    t->add_flag("--deterministic", train.deterministic, "Same as the global flag");

    PropagateArgs prop;
    auto* p = app.add_subcommand("propagate", "Encode a guidance image into a neural BTF (.nbtx)");
    p->add_option("--ckpt", prop.ckpt, "Checkpoint")->required();
    p->add_option("--guidance", prop.guidance, "Guidance PNG or PFM, values in [0, 1]");
    p->add_option("--btf", prop.btf, "Use the tone-mapped most frontal slice of this dataset as guidance");
    p->add_option("--scale", prop.scale, "Relative resolution in (0, 1]")->capture_default_str();
    p->add_option("--texel-size", prop.texel_size, "Texel size in mm at scale 1");
    p->add_option("--precision", prop.precision, "Texture precision, f16 or f32")->capture_default_str();
    p->add_option("--out", prop.out, "Output .nbtx")->required();

    RenderArgs render;
    auto* r = app.add_subcommand("render", "Render slices of a neural BTF");
    r->add_option("--nbtx", render.nbtx, "Neural BTF")->required();
    r->add_option("--cam", render.cam, "Camera theta,phi in degrees")->capture_default_str();
    r->add_option("--light", render.light, "Light theta,phi in degrees")->capture_default_str();
    r->add_option("--sweep", render.sweep, "Turntable frame count; --out is then a directory");
    r->add_option("--tile", render.tile, "Repeat the render N x N times")->capture_default_str();
    r->add_option("--out", render.out, "Output .png (tone-mapped) or .pfm (linear)")->required();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score a checkpoint against a BTF");
    e->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
    e->add_option("--btf", ev.btf, "Dataset; defaults to the checkpoint's run.dataset");
    e->add_option("--slices", ev.slices, "auto, all, holdout, or train")->capture_default_str();
    e->add_option("--pca-ranks", ev.pca_ranks, "PCA baseline ranks")->delimiter(',');
    e->add_option("--guidance-index", ev.guidance_index, "Guidance slice index");
    e->add_flag("--throughput", ev.throughput, "Also time batched renderer queries");
    e->add_option("--out", ev.out, "Directory for report.csv, report.txt, config.txt");

    std::string lat_nbtx, lat_out;
    auto* l = app.add_subcommand("latents", "Write one PNG per latent channel");
    l->add_option("--nbtx", lat_nbtx, "Neural BTF")->required();
    l->add_option("--out", lat_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        std::string msg;
        for (const char ch : std::string(ex.what())) {
            if (ch == '"' || ch == '\\') msg += '\\';
            msg += ch;
        }
        std::cerr << "error code=" << cli::kExitUsage << " kind=usage message=\"" << msg << "\"\n";
        return cli::kExitUsage;
    }

    if (deterministic || train.deterministic) {
        train.deterministic = true;
        set_worker_override(1);
    }
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*p) return cmd_propagate(prop);
    if (*r) return cmd_render(render);
    if (*e) return cmd_eval(ev);
    return cmd_latents(lat_nbtx, lat_out);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << cli::error_line(e) << "\n";
        return cli::exit_code_for(e);
    }
}
