#include "mt3/autodiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mt3::ad::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1 << 16;

bool go_parallel(std::size_t work) {
#ifdef _OPENMP
    return work >= kParallelWork && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
    (void)work;
    return false;
#endif
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_num_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, n));
#else
    (void)n;
#endif
}

namespace {

constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 16;

// C += op(A)·B with B row-major k×n. op(A)(i, p) is a[i*k + p], or
// a[p*m + i] when A is stored transposed. The 4×16 tile of C stays in
// registers across the whole p loop.
template <bool TransA>
void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c, bool par) {
    auto at = [&](std::size_t i, std::size_t p) { return TransA ? a[p * m + i] : a[i * k + p]; };
    const auto blocks = static_cast<long>((m + kTileRows - 1) / kTileRows);
    const std::size_t n_full = n - n % kTileCols;

#pragma omp parallel for if (par) schedule(static)
    for (long blk = 0; blk < blocks; ++blk) {
        const std::size_t i0 = static_cast<std::size_t>(blk) * kTileRows;
        const std::size_t rows = std::min(kTileRows, m - i0);
        if (rows == kTileRows) {
            for (std::size_t j0 = 0; j0 < n_full; j0 += kTileCols) {
                double acc[kTileRows][kTileCols] = {};
                for (std::size_t p = 0; p < k; ++p) {
                    const double* bp = b + p * n + j0;
                    const double a0 = at(i0, p), a1 = at(i0 + 1, p), a2 = at(i0 + 2, p), a3 = at(i0 + 3, p);
#pragma omp simd
                    for (std::size_t j = 0; j < kTileCols; ++j) {
                        acc[0][j] += a0 * bp[j];
                        acc[1][j] += a1 * bp[j];
                        acc[2][j] += a2 * bp[j];
                        acc[3][j] += a3 * bp[j];
                    }
                }
                for (std::size_t r = 0; r < kTileRows; ++r) {
                    double* ci = c + (i0 + r) * n + j0;
#pragma omp simd
                    for (std::size_t j = 0; j < kTileCols; ++j) ci[j] += acc[r][j];
                }
            }
        }
        // Ragged edges: leftover columns, or a short final block of rows.
        const std::size_t j_start = rows == kTileRows ? n_full : 0;
        if (j_start == n) continue;
        for (std::size_t r = 0; r < rows; ++r) {
            double* ci = c + (i0 + r) * n;
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = at(i0 + r, p);
                const double* bp = b + p * n;
#pragma omp simd
                for (std::size_t j = j_start; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
    }
}

}  // namespace

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c) {
    if (m == 0 || n == 0 || k == 0) return;
    const bool par = go_parallel(m * n * k);
    if (tb == Trans::Yes) {
        // B is n×k; a transposed copy (k×n) is cheap next to the product.
        std::vector<double> bt(k * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
        gemm(ta, Trans::No, m, n, k, a, bt.data(), c);
        return;
    }
    if (ta == Trans::No)
        gemm_rows<false>(m, n, k, a, b, c, par);
    else
        gemm_rows<true>(m, n, k, a, b, c, par);
}

void softmax_columns(std::size_t rows, std::size_t cols, const double* in, double* out) {
    if (rows == 0 || cols == 0) return;
    const bool par = go_parallel(rows * cols * 8);
    // Row-oriented passes keep memory access contiguous.
    std::vector<double> mx(in, in + cols);
    for (std::size_t r = 1; r < rows; ++r) {
        const double* row = in + r * cols;
        for (std::size_t j = 0; j < cols; ++j) mx[j] = std::max(mx[j], row[j]);
    }
    std::vector<double> sum(cols, 0.0);
    const auto R = static_cast<long>(rows);
#pragma omp parallel for if (par) schedule(static)
    for (long r = 0; r < R; ++r) {
        const double* row = in + r * cols;
        double* o = out + r * cols;
        for (std::size_t j = 0; j < cols; ++j) o[j] = std::exp(row[j] - mx[j]);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double* o = out + r * cols;
        for (std::size_t j = 0; j < cols; ++j) sum[j] += o[j];
    }
    for (auto& s : sum) s = 1.0 / s;
#pragma omp parallel for if (par) schedule(static)
    for (long r = 0; r < R; ++r) {
        double* o = out + r * cols;
#pragma omp simd
        for (std::size_t j = 0; j < cols; ++j) o[j] *= sum[j];
    }
}

void layer_norm_columns(std::size_t rows, std::size_t cols, const double* in, double eps, double* out,
                        double* inv_std) {
    std::vector<double> mean(cols, 0.0), var(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = in + r * cols;
        for (std::size_t j = 0; j < cols; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = in + r * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            const double d = row[j] - mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < cols; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] / static_cast<double>(rows) + eps);
    const bool par = go_parallel(rows * cols * 4);
    const auto R = static_cast<long>(rows);
#pragma omp parallel for if (par) schedule(static)
    for (long r = 0; r < R; ++r) {
        const double* row = in + r * cols;
        double* o = out + r * cols;
#pragma omp simd
        for (std::size_t j = 0; j < cols; ++j) o[j] = (row[j] - mean[j]) * inv_std[j];
    }
}

namespace serial {

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double x = ta == Trans::No ? a[i * k + p] : a[p * m + i];
                const double y = tb == Trans::No ? b[p * n + j] : b[j * k + p];
                s += x * y;
            }
            c[i * n + j] += s;
        }
}

void softmax_columns(std::size_t rows, std::size_t cols, const double* in, double* out) {
    for (std::size_t j = 0; j < cols; ++j) {
        double mx = -INFINITY;
        for (std::size_t r = 0; r < rows; ++r) mx = std::max(mx, in[r * cols + j]);
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) s += std::exp(in[r * cols + j] - mx);
        for (std::size_t r = 0; r < rows; ++r) out[r * cols + j] = std::exp(in[r * cols + j] - mx) / s;
    }
}

void layer_norm_columns(std::size_t rows, std::size_t cols, const double* in, double eps, double* out,
                        double* inv_std) {
    const double n = static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < rows; ++r) mean += in[r * cols + j];
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < rows; ++r) var += (in[r * cols + j] - mean) * (in[r * cols + j] - mean);
        inv_std[j] = 1.0 / std::sqrt(var / n + eps);
        for (std::size_t r = 0; r < rows; ++r) out[r * cols + j] = (in[r * cols + j] - mean) * inv_std[j];
    }
}

}  // namespace serial

}  // namespace mt3::ad::kernels
