#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mt3::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
/// tape is alive. Rank-1 shapes behave as column vectors, rank-2 as matrices
/// (row-major).
class Tensor {
public:
    Tensor() = default;

    bool valid() const { return tape_ != nullptr; }
    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }

    const Shape& shape() const;
    std::size_t rows() const;
    std::size_t cols() const;
    std::size_t size() const;
    bool requires_grad() const;

    std::span<const double> value() const;
    /// dLoss/dThis after Tape::backward; all zeros if the node was not reached.
    std::vector<double> grad() const;
    double item() const;
    double at(std::size_t r, std::size_t c = 0) const;

private:
    friend class Tape;
    Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Ordered record of primitive applications. Nodes are appended in creation
/// order, so parents always precede children and a reverse sweep visits every
/// node once. A tape is single-threaded; use one tape per sample.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) { nodes_.reserve(1024); }
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool grad_enabled() const { return grad_enabled_; }
    std::size_t size() const { return nodes_.size(); }

    Tensor leaf(Shape shape, std::vector<double> value, bool requires_grad = true);
    Tensor constant(Shape shape, std::vector<double> value);
    Tensor constant(Shape shape, double fill);

    /// Reverse sweep from a scalar loss. Gradients of every earlier node are
    /// reset first, so calling backward twice gives the same result.
    void backward(const Tensor& loss);

    // Primitive authoring interface.
    Tensor record(Shape shape, std::vector<double> value, std::vector<std::size_t> parents, BackwardFn fn);
    const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
    std::span<const double> value(std::size_t id) const { return nodes_[id].value; }
    std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
    /// Gradient buffer of a parent, or an empty span if it needs no gradient.
    std::span<double> grad_sink(std::size_t id);
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

private:
    struct Node {
        Shape shape;
        std::vector<double> value;
        std::vector<double> grad;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool requires_grad = false;
    };

    bool grad_enabled_;
    std::vector<Node> nodes_;
};

}  // namespace mt3::ad
