// SPDX-License-Identifier: Apache-2.0
#include "neubtf/training/losses.hpp"

#include <cmath>
#include <limits>

#include "neubtf/common/error.hpp"
#include "neubtf/common/rng.hpp"

namespace neubtf::training {

namespace t = tensor;

namespace {

constexpr std::uint64_t kStyleSeed = 0x57F1E;

void require_same_shape(const Tensor& pred, const Tensor& target, const char* loss) {
    if (pred.shape() != target.shape()) {
        throw DimensionError(std::string(loss) + ": prediction " + t::to_string(pred.shape()) +
                             " and target " + t::to_string(target.shape()) + " differ");
    }
    if (pred.rank() != 4) throw DimensionError(std::string(loss) + ": expected an N x C x H x W batch");
}

struct StylePyramid {
    struct Level {
        Tensor kernel;
        int stride;
    };
    std::vector<Level> levels;

    StylePyramid() {
        Rng rng(kStyleSeed);
        const int channels[] = {3, 16, 32, 64};
        for (int l = 0; l < 3; ++l) {
            const int in = channels[l], out = channels[l + 1];
            Tensor k({out, in, 3, 3});
            const double std_dev = std::sqrt(2.0 / (in * 9));
            for (float& v : k.data()) v = static_cast<float>(std_dev * rng.normal());
            levels.push_back({k, l == 0 ? 1 : 2});
        }
    }
};

const StylePyramid& style_pyramid() {
    static const StylePyramid pyramid;
    return pyramid;
}

}  // namespace

void LossWeights::validate() const {
    if (!(l1 >= 0.0) || !(style >= 0.0) || !(freq >= 0.0)) throw ConfigError("loss weights must be non-negative");
    if (l1 == 0.0 && style == 0.0 && freq == 0.0) throw ConfigError("loss weights must not all be zero");
}

Tensor loss_l1_log(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "loss_l1_log");
    const auto p = t::log1p(t::clamp(pred, -0.999f, std::numeric_limits<float>::max()));
    return t::mean(t::abs(t::sub(p, t::log1p(target))));
}

std::vector<Tensor> style_features(const Tensor& x) {
    std::vector<Tensor> features;
    Tensor h = x;
    for (const auto& level : style_pyramid().levels) {
        h = t::gelu(t::conv2d(h, level.kernel, Tensor(), {.stride = level.stride}));
        features.push_back(h);
    }
    return features;
}

Tensor gram_distance(const Tensor& a, const Tensor& b) {
    const auto diff = t::sub(t::gram(a), t::gram(b));
    return t::scale(t::sum(t::square(diff)), 1.0f / static_cast<float>(a.dim(0)));
}

Tensor loss_style(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "loss_style");
    const auto fp = style_features(pred), ft = style_features(target);
    Tensor total = gram_distance(fp[0], ft[0]);
    for (std::size_t l = 1; l < fp.size(); ++l) total = t::add(total, gram_distance(fp[l], ft[l]));
    return t::scale(total, 1.0f / static_cast<float>(fp.size()));
}

Tensor loss_focal_freq(const Tensor& pred, const Tensor& target, double alpha) {
    require_same_shape(pred, target, "loss_focal_freq");
    const int n = pred.dim(0), c = pred.dim(1), h = pred.dim(2), w = pred.dim(3);
    const float unitary = static_cast<float>(1.0 / std::sqrt(static_cast<double>(h) * w));
    const auto diff = t::scale(t::sub(t::fft2(pred), t::fft2(target)), unitary);
    const auto dist2 = t::reduce_sum(t::square(diff), {4});

    Tensor weights({n, c, h, w, 1});
    const std::size_t bins = static_cast<std::size_t>(h) * w;
    for (std::size_t g = 0; g < static_cast<std::size_t>(n) * c; ++g) {
        const float* d2 = dist2.raw() + g * bins;
        float* wt = weights.raw() + g * bins;
        double peak = 0.0;
        for (std::size_t i = 0; i < bins; ++i) peak = std::max(peak, std::pow(std::sqrt(double(d2[i])), alpha));
        if (peak == 0.0) continue;
        for (std::size_t i = 0; i < bins; ++i) wt[i] = static_cast<float>(std::pow(std::sqrt(double(d2[i])), alpha) / peak);
    }
    return t::mean(t::mul(weights, dist2));
}

LossTerms loss_terms(const Tensor& pred, const Tensor& target, const LossWeights& weights) {
    LossTerms terms;
    terms.l1_log = loss_l1_log(pred, target);
    terms.style = loss_style(pred, target);
    terms.freq = loss_focal_freq(pred, target);
    terms.total = t::add(t::add(t::scale(terms.l1_log, static_cast<float>(weights.l1)),
                                t::scale(terms.style, static_cast<float>(weights.style))),
                         t::scale(terms.freq, static_cast<float>(weights.freq)));
    return terms;
}

LossReport report(const LossTerms& terms, const LossWeights& weights) {
    LossReport r;
    r.l1_log = terms.l1_log.item();
    r.style = terms.style.item();
    r.freq = terms.freq.item();
    r.total = weights.l1 * r.l1_log + weights.style * r.style + weights.freq * r.freq;
    return r;
}

LossReport total_loss(const Tensor& pred, const Tensor& target, const LossWeights& weights) {
    return report(loss_terms(pred, target, weights), weights);
}

}  // namespace neubtf::training
