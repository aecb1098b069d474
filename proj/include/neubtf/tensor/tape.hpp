// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "neubtf/tensor/tensor.hpp"

namespace neubtf::tensor {

/// Define-by-run record of differentiable operations. Ops executed while a
/// tape is active (see activate()) and touching a tensor that requires grad
/// append a backward closure; backward() replays them once, in reverse, and
/// empties the tape.
///
/// A tape belongs to one thread at a time. Activation is thread-local.
template <typename T>
class BasicTape {
public:
    using Backward = std::function<void()>;

    class Scope {
    public:
        explicit Scope(BasicTape* tape);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        BasicTape* previous_;
    };

    BasicTape() = default;
    BasicTape(const BasicTape&) = delete;
    BasicTape& operator=(const BasicTape&) = delete;

    [[nodiscard]] Scope activate() { return Scope(this); }
    static BasicTape* active();

    void record(const char* op, Backward fn) { nodes_.push_back({op, std::move(fn)}); }
    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    /// Seeds d(loss)/d(loss) = 1 and propagates. Gradients accumulate into
    /// every requires-grad ancestor. Throws if loss is not a scalar.
    void backward(BasicTensor<T>& loss);

private:
    struct Node {
        const char* op;
        Backward fn;
    };
    std::vector<Node> nodes_;
};

using Tape = BasicTape<float>;
using Tape64 = BasicTape<double>;

template <typename T>
void backward(BasicTensor<T>& loss, BasicTape<T>& tape) {
    tape.backward(loss);
}

extern template class BasicTape<float>;
extern template class BasicTape<double>;

}  // namespace neubtf::tensor
