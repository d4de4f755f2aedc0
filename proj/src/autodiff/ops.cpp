#include "mt3/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mt3/autodiff/kernels.hpp"

namespace mt3::ad {

namespace {

using kernels::Trans;

Shape mat(std::size_t r, std::size_t c) { return {r, c}; }

void require_same_tape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.valid() || !b.valid()) throw ContractError(std::string(op) + ": invalid tensor");
    if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": tensors on different tapes");
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& a, Fwd f, Deriv d) {
    auto x = a.value();
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    const auto ia = a.id();
    return a.tape().record(a.shape(), std::move(y), {ia}, [ia, d](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        auto x = t.value(ia);
        auto y = t.value(self);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * d(x[i], y[i]);
    });
}

enum class Bcast { Same, Col, Row, Scalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Bcast::Same;
    if (b.size() == 1) return Bcast::Scalar;
    if (b.rows() == a.rows() && b.cols() == 1) return Bcast::Col;
    if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::Row;
    mismatch(op, a, b);
}

inline std::size_t bindex(Bcast k, std::size_t i, std::size_t j, std::size_t cols) {
    switch (k) {
        case Bcast::Same: return i * cols + j;
        case Bcast::Col: return i;
        case Bcast::Row: return j;
        case Bcast::Scalar: return 0;
    }
    return 0;
}

// f(x, y) with partials dfx(x, y, out), dfy(x, y, out).
template <class Fwd, class Dx, class Dy>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Fwd f, Dx dx, Dy dy) {
    require_same_tape(a, b, op);
    const Bcast k = broadcast_kind(a, b, op);
    const std::size_t R = a.rows(), C = a.cols();
    auto x = a.value();
    auto y = b.value();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) out[i * C + j] = f(x[i * C + j], y[bindex(k, i, j, C)]);
    const auto ia = a.id(), ib = b.id();
    return a.tape().record(a.shape(), std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto x = t.value(ia);
        auto y = t.value(ib);
        auto o = t.value(self);
        auto ga = t.grad_sink(ia);
        auto gb = t.grad_sink(ib);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) {
                const std::size_t p = i * C + j, q = bindex(k, i, j, C);
                if (!ga.empty()) ga[p] += g[p] * dx(x[p], y[q], o[p]);
                if (!gb.empty()) gb[q] += g[p] * dy(x[p], y[q], o[p]);
            }
    });
}

Tensor gemm_op(const Tensor& a, const Tensor& b, Trans ta, Trans tb, const char* op) {
    require_same_tape(a, b, op);
    const std::size_t m = ta == Trans::No ? a.rows() : a.cols();
    const std::size_t ka = ta == Trans::No ? a.cols() : a.rows();
    const std::size_t kb = tb == Trans::No ? b.rows() : b.cols();
    const std::size_t n = tb == Trans::No ? b.cols() : b.rows();
    if (ka != kb) mismatch(op, a, b);
    std::vector<double> c(m * n, 0.0);
    kernels::gemm(ta, tb, m, n, ka, a.value().data(), b.value().data(), c.data());
    const auto ia = a.id(), ib = b.id();
    const std::size_t k = ka;
    return a.tape().record(mat(m, n), std::move(c), {ia, ib}, [=](Tape& t, std::size_t self) {
        const double* g = t.grad(self).data();
        auto ga = t.grad_sink(ia);
        auto gb = t.grad_sink(ib);
        const double* av = t.value(ia).data();
        const double* bv = t.value(ib).data();
        // C = op(A) op(B):  dop(A) = G op(B)ᵀ,  dop(B) = op(A)ᵀ G.
        if (!ga.empty()) {
            if (ta == Trans::No) {
                // dA (m×k) = G · op(B)ᵀ
                kernels::gemm(Trans::No, tb == Trans::No ? Trans::Yes : Trans::No, m, k, n, g, bv, ga.data());
            } else {
                // dA (k×m) = op(B) · Gᵀ
                kernels::gemm(tb, Trans::Yes, k, m, n, bv, g, ga.data());
            }
        }
        if (!gb.empty()) {
            if (tb == Trans::No) {
                // dB (k×n) = op(A)ᵀ · G
                kernels::gemm(ta == Trans::No ? Trans::Yes : Trans::No, Trans::No, k, n, m, av, g, gb.data());
            } else {
                // dB (n×k) = Gᵀ · op(A)
                kernels::gemm(Trans::Yes, ta, n, k, m, g, av, gb.data());
            }
        }
    });
}

}  // namespace

double softplus(double x) { return x > kSoftplusLinear ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor matmul(const Tensor& a, const Tensor& b) { return gemm_op(a, b, Trans::No, Trans::No, "matmul"); }
Tensor matmul_tn(const Tensor& a, const Tensor& b) { return gemm_op(a, b, Trans::Yes, Trans::No, "matmul_tn"); }
Tensor matmul_nt(const Tensor& a, const Tensor& b) { return gemm_op(a, b, Trans::No, Trans::Yes, "matmul_nt"); }

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
        [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
        [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
        [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "div", [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
        [](double, double y, double o) { return -o / y; });
}

Tensor scale(const Tensor& a, double s) {
    return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor sqrt_scale(const Tensor& a, std::size_t d) {
    if (d == 0) throw ContractError("sqrt_scale: d must be positive");
    return scale(a, 1.0 / std::sqrt(static_cast<double>(d)));
}

Tensor transpose(const Tensor& a) {
    const std::size_t R = a.rows(), C = a.cols();
    auto x = a.value();
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) y[j * R + i] = x[i * C + j];
    const auto ia = a.id();
    return a.tape().record(mat(C, R), std::move(y), {ia}, [=](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) ga[i * C + j] += g[j * R + i];
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    const std::size_t C = parts[0].cols();
    std::size_t R = 0;
    std::vector<std::size_t> ids;
    std::vector<double> y;
    for (const auto& p : parts) {
        require_same_tape(parts[0], p, "concat_rows");
        if (p.cols() != C) mismatch("concat_rows", parts[0], p);
        R += p.rows();
        ids.push_back(p.id());
        auto v = p.value();
        y.insert(y.end(), v.begin(), v.end());
    }
    return parts[0].tape().record(mat(R, C), std::move(y), ids, [ids](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        std::size_t off = 0;
        for (auto id : ids) {
            const std::size_t n = t.value(id).size();
            auto gp = t.grad_sink(id);
            if (!gp.empty())
                for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
            off += n;
        }
    });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.rows())
        throw DimensionError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                             ") outside " + shape_str(a.shape()));
    const std::size_t C = a.cols();
    auto x = a.value();
    std::vector<double> y(x.begin() + begin * C, x.begin() + end * C);
    const auto ia = a.id();
    return a.tape().record(mat(end - begin, C), std::move(y), {ia}, [=](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        for (std::size_t i = 0; i < g.size(); ++i) ga[begin * C + i] += g[i];
    });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols())
        throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                             ") outside " + shape_str(a.shape()));
    std::vector<std::size_t> idx(end - begin);
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = begin + j;
    return select_cols(a, idx);
}

Tensor select_cols(const Tensor& a, const std::vector<std::size_t>& idx) {
    const std::size_t R = a.rows(), C = a.cols(), n = idx.size();
    for (auto j : idx)
        if (j >= C) throw DimensionError("select_cols: column " + std::to_string(j) + " outside " + shape_str(a.shape()));
    auto x = a.value();
    std::vector<double> y(R * n);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * C + idx[j]];
    const auto ia = a.id();
    return a.tape().record(mat(R, n), std::move(y), {ia}, [=](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < n; ++j) ga[i * C + idx[j]] += g[i * n + j];
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.value()) s += v;
    const auto ia = a.id();
    return a.tape().record(mat(1, 1), {s}, {ia}, [ia](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        const double g = t.grad(self)[0];
        for (auto& v : ga) v += g;
    });
}

Tensor sum_rows(const Tensor& a) {
    const std::size_t R = a.rows(), C = a.cols();
    auto x = a.value();
    std::vector<double> y(C, 0.0);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) y[j] += x[i * C + j];
    const auto ia = a.id();
    return a.tape().record(mat(1, C), std::move(y), {ia}, [=](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) ga[i * C + j] += g[j];
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ContractError("mean of empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor relu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& a) {
    return unary(a, [](double x) { return softplus(x); }, [](double x, double) { return sigmoid(x); });
}

Tensor log(const Tensor& a) {
    return unary(
        a, [](double x) { return std::log(std::max(x, kLogClamp)); },
        [](double x, double) { return x > kLogClamp ? 1.0 / x : 0.0; });
}

Tensor exp(const Tensor& a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor sqrt(const Tensor& a) {
    return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor square(const Tensor& a) {
    return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor cos(const Tensor& a) {
    return unary(a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Tensor sin(const Tensor& a) {
    return unary(a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Tensor softmax_columns(const Tensor& a) {
    const std::size_t R = a.rows(), C = a.cols();
    std::vector<double> y(R * C);
    kernels::softmax_columns(R, C, a.value().data(), y.data());
    const auto ia = a.id();
    return a.tape().record(a.shape(), std::move(y), {ia}, [=](Tape& t, std::size_t self) {
        auto ga = t.grad_sink(ia);
        if (ga.empty()) return;
        auto g = t.grad(self);
        auto y = t.value(self);
        std::vector<double> dot(C, 0.0);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) dot[j] += g[i * C + j] * y[i * C + j];
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) ga[i * C + j] += y[i * C + j] * (g[i * C + j] - dot[j]);
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    require_same_tape(x, gain, "layer_norm");
    require_same_tape(x, bias, "layer_norm");
    const std::size_t R = x.rows(), C = x.cols();
    if (gain.size() != R) mismatch("layer_norm", x, gain);
    if (bias.size() != R) mismatch("layer_norm", x, bias);
    auto xhat = std::make_shared<std::vector<double>>(R * C);
    auto inv_std = std::make_shared<std::vector<double>>(C);
    kernels::layer_norm_columns(R, C, x.value().data(), eps, xhat->data(), inv_std->data());
    auto gv = gain.value();
    auto bv = bias.value();
    std::vector<double> y(R * C);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) y[i * C + j] = gv[i] * (*xhat)[i * C + j] + bv[i];
    const auto ix = x.id(), ig = gain.id(), ib = bias.id();
    return x.tape().record(x.shape(), std::move(y), {ix, ig, ib}, [=](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        auto gv = t.value(ig);
        const auto& xh = *xhat;
        if (auto gg = t.grad_sink(ig); !gg.empty())
            for (std::size_t i = 0; i < R; ++i)
                for (std::size_t j = 0; j < C; ++j) gg[i] += g[i * C + j] * xh[i * C + j];
        if (auto gb = t.grad_sink(ib); !gb.empty())
            for (std::size_t i = 0; i < R; ++i)
                for (std::size_t j = 0; j < C; ++j) gb[i] += g[i * C + j];
        auto gx = t.grad_sink(ix);
        if (gx.empty()) return;
        // dx = s (dxh - mean(dxh) - xh mean(dxh xh)), dxh = g ⊙ gain
        std::vector<double> m1(C, 0.0), m2(C, 0.0);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) {
                const double d = g[i * C + j] * gv[i];
                m1[j] += d;
                m2[j] += d * xh[i * C + j];
            }
        const double inv_r = 1.0 / static_cast<double>(R);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) {
                const double d = g[i * C + j] * gv[i];
                gx[i * C + j] += (*inv_std)[j] * (d - m1[j] * inv_r - xh[i * C + j] * m2[j] * inv_r);
            }
    });
}

Tensor dropout(const Tensor& a, double rate, bool train, std::mt19937_64* rng) {
    if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout: rate must lie in [0, 1)");
    if (!train || rate == 0.0) return a;
    if (rng == nullptr) throw ContractError("dropout: training mode needs a random source");
    std::bernoulli_distribution keep(1.0 - rate);
    const double s = 1.0 / (1.0 - rate);
    std::vector<double> m(a.size());
    for (auto& v : m) v = keep(*rng) ? s : 0.0;
    return mul(a, a.tape().constant(a.shape(), std::move(m)));
}

}  // namespace mt3::ad
