#pragma once
// Random instances of every autodiff primitive for finite-difference checks.

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gradcheck.hpp"
#include "mt3/autodiff/ops.hpp"

namespace mt3::test::primitives {

using namespace mt3::ad;

using Rng = std::mt19937_64;

inline std::vector<double> uniform(Rng& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Values bounded away from zero, either sign.
inline std::vector<double> away_from_zero(Rng& rng, std::size_t n, double lo, double hi) {
    auto v = uniform(rng, n, lo, hi);
    std::bernoulli_distribution flip(0.5);
    for (auto& x : v)
        if (flip(rng)) x = -x;
    return v;
}

inline std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 4) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline GradInput mat_input(Rng& rng, std::size_t r, std::size_t c, double lo = -2, double hi = 2) {
    return {{r, c}, uniform(rng, r * c, lo, hi)};
}

struct Case {
    std::vector<GradInput> inputs;
    mt3::test::LossFn op;
};

// Contract the op output against fixed random weights so upstream gradients
// are not all ones.
inline mt3::test::LossFn weighted(mt3::test::LossFn op, std::uint64_t seed) {
    return [op, seed](Tape& t, const std::vector<Tensor>& xs) {
        Tensor y = op(t, xs);
        Rng rng(seed);
        auto w = t.constant(y.shape(), uniform(rng, y.size(), -1.5, 1.5));
        return sum(mul(y, w));
    };
}

using CaseMaker = std::function<Case(Rng&)>;

inline Case elementwise(Rng& rng, Tensor (*f)(const Tensor&), double lo, double hi, bool both_signs = true) {
    const auto r = dim(rng), c = dim(rng);
    GradInput in{{r, c}, both_signs ? away_from_zero(rng, r * c, lo, hi) : uniform(rng, r * c, lo, hi)};
    return {{in}, [f](Tape&, const std::vector<Tensor>& x) { return f(x[0]); }};
}

inline Case broadcast_binary(Rng& rng, Tensor (*f)(const Tensor&, const Tensor&), bool positive_rhs) {
    const auto r = dim(rng), c = dim(rng);
    std::size_t br = r, bc = c;
    switch (dim(rng, 0, 3)) {
        case 1: bc = 1; break;
        case 2: br = 1; break;
        case 3: br = bc = 1; break;
        default: break;
    }
    GradInput b{{br, bc}, positive_rhs ? away_from_zero(rng, br * bc, 0.5, 2.0) : uniform(rng, br * bc, -2, 2)};
    return {{mat_input(rng, r, c), b}, [f](Tape&, const std::vector<Tensor>& x) { return f(x[0], x[1]); }};
}

inline std::vector<std::pair<std::string, CaseMaker>> primitive_cases() {
    std::vector<std::pair<std::string, CaseMaker>> v;
    v.emplace_back("matmul", [](Rng& g) {
        const auto m = dim(g), k = dim(g), n = dim(g);
        return Case{{mat_input(g, m, k), mat_input(g, k, n)},
                    [](Tape&, const std::vector<Tensor>& x) { return matmul(x[0], x[1]); }};
    });
    v.emplace_back("matmul_tn", [](Rng& g) {
        const auto m = dim(g), k = dim(g), n = dim(g);
        return Case{{mat_input(g, k, m), mat_input(g, k, n)},
                    [](Tape&, const std::vector<Tensor>& x) { return matmul_tn(x[0], x[1]); }};
    });
    v.emplace_back("matmul_nt", [](Rng& g) {
        const auto m = dim(g), k = dim(g), n = dim(g);
        return Case{{mat_input(g, m, k), mat_input(g, n, k)},
                    [](Tape&, const std::vector<Tensor>& x) { return matmul_nt(x[0], x[1]); }};
    });
    v.emplace_back("add", [](Rng& g) { return broadcast_binary(g, add, false); });
    v.emplace_back("sub", [](Rng& g) { return broadcast_binary(g, sub, false); });
    v.emplace_back("mul", [](Rng& g) { return broadcast_binary(g, mul, false); });
    v.emplace_back("div", [](Rng& g) { return broadcast_binary(g, div, true); });
    v.emplace_back("scale", [](Rng& g) {
        const double s = uniform(g, 1, -3, 3)[0];
        return Case{{mat_input(g, dim(g), dim(g))}, [s](Tape&, const std::vector<Tensor>& x) { return scale(x[0], s); }};
    });
    v.emplace_back("add_scalar", [](Rng& g) {
        const double s = uniform(g, 1, -3, 3)[0];
        return Case{{mat_input(g, dim(g), dim(g))},
                    [s](Tape&, const std::vector<Tensor>& x) { return add_scalar(x[0], s); }};
    });
    v.emplace_back("sqrt_scale", [](Rng& g) {
        const auto d = dim(g, 1, 64);
        return Case{{mat_input(g, dim(g), dim(g))},
                    [d](Tape&, const std::vector<Tensor>& x) { return sqrt_scale(x[0], d); }};
    });
    v.emplace_back("transpose", [](Rng& g) {
        return Case{{mat_input(g, dim(g), dim(g))}, [](Tape&, const std::vector<Tensor>& x) { return transpose(x[0]); }};
    });
    v.emplace_back("concat_rows", [](Rng& g) {
        const auto c = dim(g);
        const auto parts = dim(g, 1, 3);
        std::vector<GradInput> in;
        for (std::size_t i = 0; i < parts; ++i) in.push_back(mat_input(g, dim(g), c));
        return Case{in, [](Tape&, const std::vector<Tensor>& x) { return concat_rows(x); }};
    });
    v.emplace_back("slice_rows", [](Rng& g) {
        const auto r = dim(g, 1, 5);
        const auto b = dim(g, 0, r - 1);
        const auto e = dim(g, b + 1, r);
        return Case{{mat_input(g, r, dim(g))},
                    [b, e](Tape&, const std::vector<Tensor>& x) { return slice_rows(x[0], b, e); }};
    });
    v.emplace_back("slice_cols", [](Rng& g) {
        const auto c = dim(g, 1, 5);
        const auto b = dim(g, 0, c - 1);
        const auto e = dim(g, b + 1, c);
        return Case{{mat_input(g, dim(g), c)},
                    [b, e](Tape&, const std::vector<Tensor>& x) { return slice_cols(x[0], b, e); }};
    });
    v.emplace_back("select_cols", [](Rng& g) {
        const auto c = dim(g);
        std::vector<std::size_t> idx(dim(g, 1, 6));
        for (auto& i : idx) i = dim(g, 0, c - 1);
        return Case{{mat_input(g, dim(g), c)},
                    [idx](Tape&, const std::vector<Tensor>& x) { return select_cols(x[0], idx); }};
    });
    v.emplace_back("sum", [](Rng& g) {
        return Case{{mat_input(g, dim(g), dim(g))}, [](Tape&, const std::vector<Tensor>& x) { return sum(x[0]); }};
    });
    v.emplace_back("sum_rows", [](Rng& g) {
        return Case{{mat_input(g, dim(g), dim(g))}, [](Tape&, const std::vector<Tensor>& x) { return sum_rows(x[0]); }};
    });
    v.emplace_back("mean", [](Rng& g) {
        return Case{{mat_input(g, dim(g), dim(g))}, [](Tape&, const std::vector<Tensor>& x) { return mean(x[0]); }};
    });
    v.emplace_back("relu", [](Rng& g) { return elementwise(g, relu, 0.1, 2.0); });
    v.emplace_back("sigmoid", [](Rng& g) { return elementwise(g, sigmoid, 0.0, 6.0); });
    v.emplace_back("softplus", [](Rng& g) { return elementwise(g, softplus, 0.0, 40.0); });
    v.emplace_back("log", [](Rng& g) { return elementwise(g, log, 0.2, 3.0, false); });
    v.emplace_back("exp", [](Rng& g) { return elementwise(g, exp, 0.0, 2.0); });
    v.emplace_back("sqrt", [](Rng& g) { return elementwise(g, sqrt, 0.2, 3.0, false); });
    v.emplace_back("square", [](Rng& g) { return elementwise(g, square, 0.0, 2.0); });
    v.emplace_back("cos", [](Rng& g) { return elementwise(g, cos, 0.0, 3.0); });
    v.emplace_back("sin", [](Rng& g) { return elementwise(g, sin, 0.0, 3.0); });
    v.emplace_back("softmax_columns", [](Rng& g) {
        return Case{{mat_input(g, dim(g), dim(g), -3, 3)},
                    [](Tape&, const std::vector<Tensor>& x) { return softmax_columns(x[0]); }};
    });
    v.emplace_back("layer_norm", [](Rng& g) {
        const auto r = dim(g, 2, 5);
        return Case{{mat_input(g, r, dim(g)), mat_input(g, r, 1, 0.5, 1.5), mat_input(g, r, 1)},
                    [](Tape&, const std::vector<Tensor>& x) { return layer_norm(x[0], x[1], x[2]); }};
    });
    v.emplace_back("dropout", [](Rng& g) {
        const std::uint64_t seed = g();
        return Case{{mat_input(g, dim(g), dim(g))}, [seed](Tape&, const std::vector<Tensor>& x) {
                        Rng mask_rng(seed);
                        return dropout(x[0], 0.3, true, &mask_rng);
                    }};
    });
    return v;
}


}  // namespace mt3::test::primitives
