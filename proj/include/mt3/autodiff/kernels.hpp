#pragma once

#include <cstddef>

// Dense kernels behind the tensor primitives. Matrices are row-major and
// contiguous. The top-level versions are cache-friendly and OpenMP-parallel
// above a size threshold; the `serial` namespace holds straightforward
// reference loops used by the tests and the benchmark.
namespace mt3::ad::kernels {

enum class Trans { No, Yes };

/// C(m×n) += op(A) · op(B), with op(A) m×k and op(B) k×n.
/// A is stored m×k (No) or k×m (Yes); B is stored k×n (No) or n×k (Yes).
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c);

/// Column-wise softmax of a rows×cols matrix, max-subtracted.
void softmax_columns(std::size_t rows, std::size_t cols, const double* in, double* out);

/// Per-column normalisation to zero mean / unit variance. Writes the
/// normalised values and the per-column 1/sqrt(var + eps).
void layer_norm_columns(std::size_t rows, std::size_t cols, const double* in, double eps, double* out,
                        double* inv_std);

/// Number of threads the parallel kernels may use (1 without OpenMP).
int max_threads();
void set_num_threads(int n);

namespace serial {
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c);
void softmax_columns(std::size_t rows, std::size_t cols, const double* in, double* out);
void layer_norm_columns(std::size_t rows, std::size_t cols, const double* in, double eps, double* out,
                        double* inv_std);
}  // namespace serial

}  // namespace mt3::ad::kernels
