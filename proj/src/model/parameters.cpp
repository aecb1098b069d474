// SPDX-License-Identifier: Apache-2.0
#include "neubtf/model/parameters.hpp"

#include "neubtf/common/error.hpp"

namespace neubtf::model {

Tensor ParameterSet::add(std::string name, Tensor value) {
    if (find(name) != nullptr) throw Error("duplicate parameter name " + name);
    value.set_requires_grad(true);
    entries_.push_back({std::move(name), value});
    return value;
}

std::vector<Tensor> ParameterSet::tensors() const {
    std::vector<Tensor> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.value);
    return out;
}

const Tensor* ParameterSet::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e.value;
    return nullptr;
}

std::size_t ParameterSet::count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.numel();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& e : entries_) e.value.zero_grad();
}

}  // namespace neubtf::model
