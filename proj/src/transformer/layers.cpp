#include "mt3/transformer/layers.hpp"

#include <cmath>

namespace mt3::nn {

using namespace mt3::ad;

std::vector<double> glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    const double lim = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-lim, lim);
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = u(rng);
    return v;
}

Linear Linear::create(ParameterStore& s, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                      bool zero) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w = s.add(name + ".w", {out, in}, zero ? std::vector<double>(out * in, 0.0) : glorot(out, in, rng));
    l.b = s.add(name + ".b", {out, 1}, std::vector<double>(out, 0.0));
    return l;
}

Tensor Linear::operator()(const Bound& p, const Tensor& x) const {
    if (x.rows() != in)
        throw DimensionError("linear: expected " + std::to_string(in) + " input rows, got " + shape_str(x.shape()));
    return add(matmul(p[w], x), p[b]);
}

FeedForward FeedForward::create(ParameterStore& s, const std::string& name, std::size_t in, std::size_t hidden,
                                std::size_t out, Rng& rng, bool zero_output) {
    FeedForward f;
    f.l1 = Linear::create(s, name + ".l1", in, hidden, rng);
    f.l2 = Linear::create(s, name + ".l2", hidden, out, rng, zero_output);
    return f;
}

Tensor FeedForward::operator()(const Bound& p, const Tensor& x, const ForwardContext& ctx) const {
    return l2(p, ctx.drop(relu(l1(p, x))));
}

LayerNormParams LayerNormParams::create(ParameterStore& s, const std::string& name, std::size_t d) {
    LayerNormParams n;
    n.gain = s.add(name + ".gain", {d, 1}, std::vector<double>(d, 1.0));
    n.bias = s.add(name + ".bias", {d, 1}, std::vector<double>(d, 0.0));
    return n;
}

Tensor LayerNormParams::operator()(const Bound& p, const Tensor& x) const { return layer_norm(x, p[gain], p[bias]); }

MultiHeadAttention MultiHeadAttention::create(ParameterStore& s, const std::string& name, std::size_t d,
                                              std::size_t heads, Rng& rng) {
    MultiHeadAttention a;
    a.d = d;
    a.heads = heads;
    auto stacked = [&](const char* suffix) {
        std::vector<double> v;
        for (std::size_t h = 0; h < heads; ++h) {
            auto w = glorot(d, d, rng);
            v.insert(v.end(), w.begin(), w.end());
        }
        return s.add(name + suffix, {heads * d, d}, std::move(v));
    };
    a.wq = stacked(".wq");
    a.wk = stacked(".wk");
    a.wv = stacked(".wv");
    a.w0 = s.add(name + ".w0", {d, heads * d}, glorot(d, heads * d, rng));
    return a;
}

Tensor MultiHeadAttention::operator()(const Bound& p, const Tensor& q_src, const Tensor& kv_src) const {
    if (q_src.cols() == 0 || kv_src.cols() == 0) throw ContractError("attention over an empty sequence");
    if (q_src.rows() != d || kv_src.rows() != d)
        throw DimensionError("attention: width " + std::to_string(d) + " expected, got " + shape_str(q_src.shape()) +
                             " / " + shape_str(kv_src.shape()));
    const Tensor Q = matmul(p[wq], q_src);
    const Tensor K = matmul(p[wk], kv_src);
    const Tensor V = matmul(p[wv], kv_src);
    std::vector<Tensor> outs;
    outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const Tensor Qh = slice_rows(Q, h * d, (h + 1) * d);
        const Tensor Kh = slice_rows(K, h * d, (h + 1) * d);
        const Tensor Vh = slice_rows(V, h * d, (h + 1) * d);
        // weights is n_kv × n_q; each column is a distribution over keys.
        const Tensor weights = softmax_columns(sqrt_scale(matmul_tn(Kh, Qh), d));
        outs.push_back(matmul(Vh, weights));
    }
    return matmul(p[w0], heads == 1 ? outs[0] : concat_rows(outs));
}

}  // namespace mt3::nn
