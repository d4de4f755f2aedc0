#include "mt3/autodiff/parameters.hpp"

#include <stdexcept>

namespace mt3::ad {

std::size_t ParameterStore::add(std::string name, Shape shape, std::vector<double> value) {
    if (shape_size(shape) != value.size()) throw DimensionError("parameter " + name + ": shape/value mismatch");
    if (by_name_.count(name)) throw ContractError("duplicate parameter name " + name);
    by_name_[name] = params_.size();
    params_.push_back({std::move(name), std::move(shape), std::move(value)});
    return params_.size() - 1;
}

std::size_t ParameterStore::total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

std::size_t ParameterStore::index(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::out_of_range("no parameter named " + name);
    return it->second;
}

std::vector<Tensor> ParameterStore::bind(Tape& tape, bool requires_grad) const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(tape.leaf(p.shape, p.value, requires_grad));
    return out;
}

bool ParameterStore::operator==(const ParameterStore& o) const {
    if (params_.size() != o.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto &a = params_[i], &b = o.params_[i];
        if (a.name != b.name || a.shape != b.shape || a.value != b.value) return false;
    }
    return true;
}

Gradients zero_gradients(const ParameterStore& store) {
    Gradients g;
    for (const auto& p : store) g.emplace_back(p.value.size(), 0.0);
    return g;
}

Gradients collect_gradients(const std::vector<Tensor>& bound) {
    Gradients g;
    g.reserve(bound.size());
    for (const auto& t : bound) g.push_back(t.grad());
    return g;
}

void accumulate(Gradients& acc, const Gradients& g) {
    if (acc.size() != g.size()) throw DimensionError("accumulate: gradient count mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (acc[i].size() != g[i].size()) throw DimensionError("accumulate: gradient size mismatch");
        for (std::size_t j = 0; j < g[i].size(); ++j) acc[i][j] += g[i][j];
    }
}

void scale_gradients(Gradients& g, double s) {
    for (auto& v : g)
        for (auto& x : v) x *= s;
}

}  // namespace mt3::ad
