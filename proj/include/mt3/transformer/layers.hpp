#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "mt3/autodiff/ops.hpp"
#include "mt3/autodiff/parameters.hpp"

namespace mt3::nn {

using ad::Tensor;
using Rng = std::mt19937_64;
/// Parameters of a ParameterStore recorded on one tape, indexed like the store.
using Bound = std::vector<Tensor>;

struct ForwardContext {
    bool train = false;
    double dropout = 0.0;
    Rng* rng = nullptr;

    Tensor drop(const Tensor& x) const { return ad::dropout(x, dropout, train, rng); }
};

/// Glorot-uniform d_out×d_in matrix.
std::vector<double> glorot(std::size_t rows, std::size_t cols, Rng& rng);

/// y = W x + b, W out×in, b out×1.
struct Linear {
    std::size_t w = 0, b = 0;
    std::size_t in = 0, out = 0;

    static Linear create(ad::ParameterStore& s, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                         bool zero = false);
    Tensor operator()(const Bound& p, const Tensor& x) const;
};

/// Two-layer ReLU network; dropout on the hidden activations.
struct FeedForward {
    Linear l1, l2;

    static FeedForward create(ad::ParameterStore& s, const std::string& name, std::size_t in, std::size_t hidden,
                              std::size_t out, Rng& rng, bool zero_output = false);
    Tensor operator()(const Bound& p, const Tensor& x, const ForwardContext& ctx = {}) const;
};

struct LayerNormParams {
    std::size_t gain = 0, bias = 0;

    static LayerNormParams create(ad::ParameterStore& s, const std::string& name, std::size_t d);
    Tensor operator()(const Bound& p, const Tensor& x) const;
};

/// Multi-head attention where every head owns full d×d query/key/value maps.
/// The per-head maps are stacked into (heads·d)×d matrices and the
/// concatenated head outputs are reduced by W0 (d × heads·d).
struct MultiHeadAttention {
    std::size_t wq = 0, wk = 0, wv = 0, w0 = 0;
    std::size_t d = 0, heads = 0;

    static MultiHeadAttention create(ad::ParameterStore& s, const std::string& name, std::size_t d,
                                     std::size_t heads, Rng& rng);
    /// Queries from `q_src` (d×n_q); keys and values from `kv_src` (d×n_kv).
    Tensor operator()(const Bound& p, const Tensor& q_src, const Tensor& kv_src) const;
    Tensor operator()(const Bound& p, const Tensor& a) const { return (*this)(p, a, a); }
};

}  // namespace mt3::nn
