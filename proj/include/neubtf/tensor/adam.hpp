// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neubtf/tensor/tensor.hpp"

namespace neubtf::tensor {

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment buffers for a fixed parameter list.
template <typename T>
class AdamState {
public:
    AdamState(std::span<const BasicTensor<T>> params, AdamOptions options = {});

    AdamOptions& options() { return options_; }
    const AdamOptions& options() const { return options_; }
    std::uint64_t step() const { return step_; }

    /// Bias-corrected Adam update of every parameter in place from its
    /// current gradient (a missing gradient counts as zero).
    void apply(std::span<BasicTensor<T>> params);

private:
    AdamOptions options_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<T>> first_;
    std::vector<std::vector<T>> second_;
};

template <typename T>
void adam_step(std::span<BasicTensor<T>> params, AdamState<T>& state) {
    state.apply(params);
}

extern template class AdamState<float>;
extern template class AdamState<double>;

}  // namespace neubtf::tensor
