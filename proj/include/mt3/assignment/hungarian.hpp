#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace mt3::assignment {

/// Entries at or above this value mark a forbidden pairing.
inline constexpr double kForbidden = 1e18;

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major cost matrix. Entries >= kForbidden (including +inf) are
/// treated as pairings that may never be selected.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    bool forbidden(std::size_t r, std::size_t c) const { return (*this)(r, c) >= kForbidden; }
    void forbid(std::size_t r, std::size_t c) { (*this)(r, c) = kForbidden; }

    CostMatrix transposed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A matching of rows to columns. row_to_col[r] == -1 means row r is left
/// unassigned (only possible when rows > cols).
struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;

    bool operator==(const Assignment&) const = default;
};

/// Sum of the selected entries, accumulated in row order.
double assignment_cost(const CostMatrix& c, const std::vector<int>& row_to_col);

/// Minimum-cost maximal matching (shortest augmenting path Hungarian method,
/// O(n^2 m)). Every row is matched when rows <= cols, every column otherwise.
/// Throws InfeasibleError when forbidden entries leave no maximal matching.
Assignment hungarian(const CostMatrix& c);

}  // namespace mt3::assignment
