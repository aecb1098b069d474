// SPDX-License-Identifier: Apache-2.0
#include "neubtf/tensor/init.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "neubtf/common/error.hpp"

namespace neubtf::tensor {

Tensor init_orthogonal(const Shape& shape, Rng& rng, float gain) {
    if (shape.empty()) throw DimensionError("init_orthogonal needs at least one axis");
    const Eigen::Index rows = shape[0];
    const Eigen::Index cols = static_cast<Eigen::Index>(numel(shape) / static_cast<std::size_t>(rows));
    if (rows == 0 || cols == 0) throw DimensionError("init_orthogonal: empty shape " + to_string(shape));
    const bool wide = rows < cols;
    const Eigen::Index big = wide ? cols : rows;
    const Eigen::Index small = wide ? rows : cols;
    Eigen::MatrixXd a(big, small);
    for (Eigen::Index j = 0; j < small; ++j)
        for (Eigen::Index i = 0; i < big; ++i) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    // Sign fix makes the factorization unique, so Q is Haar-distributed.
    for (Eigen::Index j = 0; j < small; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    Tensor out(shape);
    auto data = out.data();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            data[static_cast<std::size_t>(i * cols + j)] = static_cast<float>(gain * (wide ? q(j, i) : q(i, j)));
    return out;
}

float siren_bound(int layer_index, int fan_in, float omega0) {
    if (fan_in <= 0) throw DimensionError("siren_bound: fan_in must be positive");
    if (layer_index == 0) return 1.0f / static_cast<float>(fan_in);
    return std::sqrt(6.0f / static_cast<float>(fan_in)) / omega0;
}

Tensor init_uniform(const Shape& shape, float bound, Rng& rng) {
    Tensor out(shape);
    for (float& v : out.data()) v = static_cast<float>(rng.uniform(-bound, bound));
    return out;
}

Tensor init_siren(const Shape& shape, int layer_index, int fan_in, float omega0, Rng& rng) {
    return init_uniform(shape, siren_bound(layer_index, fan_in, omega0), rng);
}

}  // namespace neubtf::tensor
