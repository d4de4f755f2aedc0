#include "mt3/autodiff/tensor.hpp"

#include <sstream>

namespace mt3::ad {

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "x" : "") << s[i];
    out << ')';
    return out.str();
}

const Shape& Tensor::shape() const { return tape_->shape(id_); }

std::size_t Tensor::rows() const {
    const auto& s = shape();
    return s.empty() ? 1 : s[0];
}

std::size_t Tensor::cols() const {
    const auto& s = shape();
    std::size_t c = 1;
    for (std::size_t i = 1; i < s.size(); ++i) c *= s[i];
    return c;
}

std::size_t Tensor::size() const { return shape_size(shape()); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }
std::span<const double> Tensor::value() const { return tape_->value(id_); }

std::vector<double> Tensor::grad() const {
    auto g = tape_->grad(id_);
    if (g.empty()) return std::vector<double>(size(), 0.0);
    return {g.begin(), g.end()};
}

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() on non-scalar tensor " + shape_str(shape()));
    return value()[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return value()[r * cols() + c]; }

Tensor Tape::leaf(Shape shape, std::vector<double> value, bool requires_grad) {
    if (shape_size(shape) != value.size())
        throw DimensionError("leaf: shape " + shape_str(shape) + " does not match " + std::to_string(value.size()) +
                             " values");
    Node n;
    n.shape = std::move(shape);
    n.value = std::move(value);
    n.requires_grad = grad_enabled_ && requires_grad;
    nodes_.push_back(std::move(n));
    return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(Shape shape, std::vector<double> value) { return leaf(std::move(shape), std::move(value), false); }

Tensor Tape::constant(Shape shape, double fill) {
    const auto n = shape_size(shape);
    return leaf(std::move(shape), std::vector<double>(n, fill), false);
}

Tensor Tape::record(Shape shape, std::vector<double> value, std::vector<std::size_t> parents, BackwardFn fn) {
    Node n;
    n.shape = std::move(shape);
    n.value = std::move(value);
    if (grad_enabled_) {
        for (auto p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
        if (n.requires_grad) {
            n.parents = std::move(parents);
            n.backward = std::move(fn);
        }
    }
    nodes_.push_back(std::move(n));
    return Tensor(this, nodes_.size() - 1);
}

std::span<double> Tape::grad_sink(std::size_t id) {
    auto& n = nodes_[id];
    if (!n.requires_grad) return {};
    if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
    return n.grad;
}

void Tape::backward(const Tensor& loss) {
    if (loss.tape_ != this) throw ContractError("backward: loss belongs to another tape");
    if (loss.size() != 1) throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    if (!grad_enabled_) throw ContractError("backward: tape was created without gradients");
    for (std::size_t i = 0; i <= loss.id_; ++i) nodes_[i].grad.clear();
    if (!nodes_[loss.id_].requires_grad) return;
    nodes_[loss.id_].grad.assign(1, 1.0);
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        auto& n = nodes_[i];
        if (n.backward && !n.grad.empty()) n.backward(*this, i);
    }
}

}  // namespace mt3::ad
