// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "neubtf/tensor/tensor.hpp"

namespace neubtf::model {

using tensor::Tensor;

struct NamedTensor {
    std::string name;
    Tensor value;
};

/// Ordered collection of trainable tensors. Handles returned by add() share
/// storage with the set, so loading values in place updates every layer.
class ParameterSet {
public:
    Tensor add(std::string name, Tensor value);

    const std::vector<NamedTensor>& entries() const { return entries_; }
    std::vector<Tensor> tensors() const;
    const Tensor* find(const std::string& name) const;
    /// Sum of element counts over all tensors.
    std::size_t count() const;
    void zero_grad();

private:
    std::vector<NamedTensor> entries_;
};

}  // namespace neubtf::model
