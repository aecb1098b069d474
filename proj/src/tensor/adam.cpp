// SPDX-License-Identifier: Apache-2.0
#include "neubtf/tensor/adam.hpp"

#include <cmath>

#include "neubtf/common/error.hpp"

namespace neubtf::tensor {

template <typename T>
AdamState<T>::AdamState(std::span<const BasicTensor<T>> params, AdamOptions options) : options_(options) {
    for (const auto& p : params) {
        first_.emplace_back(p.numel(), T(0));
        second_.emplace_back(p.numel(), T(0));
    }
}

template <typename T>
void AdamState<T>::apply(std::span<BasicTensor<T>> params) {
    if (params.size() != first_.size()) {
        throw DimensionError("adam: state tracks " + std::to_string(first_.size()) + " parameters, got " +
                             std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].numel() != first_[i].size()) {
            throw DimensionError("adam: parameter " + std::to_string(i) + " has shape " +
                                 to_string(params[i].shape()) + " but its moments hold " +
                                 std::to_string(first_[i].size()) + " values");
        }
    }
    ++step_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const T lr = static_cast<T>(options_.learning_rate / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(options_.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        if (!p.has_grad()) continue;
        const T* g = p.grad().data();
        T* x = p.raw();
        T* m = first_[i].data();
        T* v = second_[i].data();
        for (std::size_t k = 0; k < first_[i].size(); ++k) {
            m[k] = static_cast<T>(b1) * m[k] + static_cast<T>(1.0 - b1) * g[k];
            v[k] = static_cast<T>(b2) * v[k] + static_cast<T>(1.0 - b2) * g[k] * g[k];
            x[k] -= lr * m[k] / (std::sqrt(v[k] * inv_c2) + eps);
        }
    }
}

template class AdamState<float>;
template class AdamState<double>;

}  // namespace neubtf::tensor
