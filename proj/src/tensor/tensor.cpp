// SPDX-License-Identifier: Apache-2.0
#include "neubtf/tensor/tensor.hpp"

#include <algorithm>

#include "neubtf/common/error.hpp"
#include "neubtf/tensor/tape.hpp"

namespace neubtf::tensor {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw DimensionError("negative extent in shape " + to_string(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? ", " : "") + std::to_string(shape[i]);
    return s + "]";
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : impl_(std::make_shared<Impl>()) {
    impl_->data.assign(tensor::numel(shape), fill);
    impl_->shape = std::move(shape);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values) : impl_(std::make_shared<Impl>()) {
    if (values.size() != tensor::numel(shape)) {
        throw DimensionError("tensor of shape " + to_string(shape) + " needs " +
                             std::to_string(tensor::numel(shape)) + " values, got " + std::to_string(values.size()));
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(values);
}

template <typename T>
int BasicTensor<T>::dim(int axis) const {
    const int r = rank();
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + to_string(shape()));
    }
    return impl_->shape[axis];
}

template <typename T>
T BasicTensor<T>::item() const {
    if (numel() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape()));
    return impl_->data[0];
}

template <typename T>
BasicTensor<T>& BasicTensor<T>::set_requires_grad(bool value) {
    impl_->requires_grad = value;
    return *this;
}

template <typename T>
std::span<T> BasicTensor<T>::ensure_grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), T(0));
    return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
    std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
    return BasicTensor(impl_->shape, impl_->data);
}

template class BasicTensor<float>;
template class BasicTensor<double>;

// ---- tape ----------------------------------------------------------------------

namespace {
template <typename T>
BasicTape<T>*& active_tape() {
    thread_local BasicTape<T>* tape = nullptr;
    return tape;
}
}  // namespace

template <typename T>
BasicTape<T>::Scope::Scope(BasicTape* tape) : previous_(active_tape<T>()) {
    active_tape<T>() = tape;
}

template <typename T>
BasicTape<T>::Scope::~Scope() {
    active_tape<T>() = previous_;
}

template <typename T>
BasicTape<T>* BasicTape<T>::active() {
    return active_tape<T>();
}

template <typename T>
void BasicTape<T>::backward(BasicTensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw DimensionError("backward() needs a scalar loss, got shape " +
                             (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
    }
    if (!loss.requires_grad()) throw Error("loss does not depend on any tensor that requires grad");
    loss.ensure_grad()[0] = T(1);
    // Closures may record nothing new, but take the list first so a throwing
    // closure still leaves the tape empty.
    auto nodes = std::move(nodes_);
    nodes_.clear();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) it->fn();
}

template class BasicTape<float>;
template class BasicTape<double>;

}  // namespace neubtf::tensor
