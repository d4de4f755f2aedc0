#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mt3/autodiff/tensor.hpp"

namespace mt3::ad {

struct Parameter {
    std::string name;
    Shape shape;
    std::vector<double> value;
};

/// Named, ordered collection of learnable arrays. Indices are stable, so model
/// structs refer to parameters by index.
class ParameterStore {
public:
    std::size_t add(std::string name, Shape shape, std::vector<double> value);

    std::size_t size() const { return params_.size(); }
    std::size_t total_size() const;
    Parameter& operator[](std::size_t i) { return params_[i]; }
    const Parameter& operator[](std::size_t i) const { return params_[i]; }
    /// Index of a parameter by name; throws std::out_of_range if missing.
    std::size_t index(const std::string& name) const;
    bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    /// Records every parameter as a leaf on `tape`, in index order.
    std::vector<Tensor> bind(Tape& tape, bool requires_grad = true) const;

    bool operator==(const ParameterStore& o) const;

private:
    std::vector<Parameter> params_;
    std::map<std::string, std::size_t> by_name_;
};

/// One flat gradient array per parameter, aligned with a ParameterStore.
using Gradients = std::vector<std::vector<double>>;

Gradients zero_gradients(const ParameterStore& store);
/// Reads dLoss/dParam from bound leaves after Tape::backward.
Gradients collect_gradients(const std::vector<Tensor>& bound);
/// acc += g, element-wise.
void accumulate(Gradients& acc, const Gradients& g);
void scale_gradients(Gradients& g, double s);

}  // namespace mt3::ad
