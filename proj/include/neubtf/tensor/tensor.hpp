// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace neubtf::tensor {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major tensor handle. Copies share storage (like a
/// reference-counted array); clone() makes an independent copy. `grad` is
/// allocated lazily and always has the tensor's shape.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, T fill = T(0));
    BasicTensor(Shape shape, std::vector<T> values);

    static BasicTensor scalar(T value) { return BasicTensor(Shape{}, std::vector<T>{value}); }

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int rank() const { return static_cast<int>(impl_->shape.size()); }
    int dim(int axis) const;
    std::size_t numel() const { return impl_->data.size(); }

    std::span<T> data() { return impl_->data; }
    std::span<const T> data() const { return impl_->data; }
    T* raw() { return impl_->data.data(); }
    const T* raw() const { return impl_->data.data(); }
    T item() const;

    bool requires_grad() const { return impl_ && impl_->requires_grad; }
    BasicTensor& set_requires_grad(bool value);

    bool has_grad() const { return impl_ && !impl_->grad.empty(); }
    std::span<T> grad() { return impl_->grad; }
    std::span<const T> grad() const { return impl_->grad; }
    /// Allocates a zero gradient buffer if none exists and returns it. Handles share
    /// storage, so this is available through const handles too.
    std::span<T> ensure_grad() const;
    void zero_grad();

    /// Independent copy of the values; no gradient, not requiring grad.
    BasicTensor clone() const;
    /// Same as clone(); named for the call sites that cut a graph edge.
    BasicTensor detach() const { return clone(); }

    bool same_storage(const BasicTensor& other) const { return impl_ == other.impl_; }

private:
    struct Impl {
        Shape shape;
        std::vector<T> data;
        std::vector<T> grad;
        bool requires_grad = false;
    };
    std::shared_ptr<Impl> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace neubtf::tensor
