#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "mt3/autodiff/tensor.hpp"

// Differentiable primitives. Activations are laid out one column per token
// (features × tokens). Binary element-wise ops accept a right operand of the
// same shape, a column (r×1), a row (1×c) or a scalar (1×1), broadcast over
// the left operand.
namespace mt3::ad {

Tensor matmul(const Tensor& a, const Tensor& b);     // a·b
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // aᵀ·b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a·bᵀ

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);
/// Multiplies by 1/sqrt(d); the attention logit scaling.
Tensor sqrt_scale(const Tensor& a, std::size_t d);

Tensor transpose(const Tensor& a);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
/// Gathers columns; indices may repeat (gradients accumulate).
Tensor select_cols(const Tensor& a, const std::vector<std::size_t>& idx);

Tensor sum(const Tensor& a);       // 1×1
Tensor sum_rows(const Tensor& a);  // 1×c, sums down each column
Tensor mean(const Tensor& a);      // 1×1

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// log(1 + e^x); returns x directly for x > 30.
Tensor softplus(const Tensor& a);
/// Natural log with the argument clamped below at 1e-30.
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor sin(const Tensor& a);

Tensor softmax_columns(const Tensor& a);
/// Per-column normalisation followed by gain ⊙ x̂ + bias; gain/bias are r×1.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
/// Inverted dropout. Identity when !train or rate == 0.
Tensor dropout(const Tensor& a, double rate, bool train, std::mt19937_64* rng);

inline constexpr double kLogClamp = 1e-30;
inline constexpr double kSoftplusLinear = 30.0;

double softplus(double x);
double sigmoid(double x);

}  // namespace mt3::ad
