#include "mt3/assignment/hungarian.hpp"

#include <limits>

namespace mt3::assignment {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("CostMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

CostMatrix CostMatrix::transposed() const {
    CostMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

double assignment_cost(const CostMatrix& c, const std::vector<int>& row_to_col) {
    double total = 0.0;
    for (std::size_t r = 0; r < row_to_col.size(); ++r)
        if (row_to_col[r] >= 0) total += c(r, static_cast<std::size_t>(row_to_col[r]));
    return total;
}

namespace {

// rows <= cols. Potentials u (rows) and v (cols), 1-based with a virtual
// column 0 used as the root of each augmenting search.
std::vector<int> solve_wide(const CostMatrix& c) {
    const std::size_t n = c.rows();
    const std::size_t m = c.cols();
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<double> minv(m + 1);
    std::vector<char> used(m + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                if (!c.forbidden(i0 - 1, j - 1)) {
                    const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (delta == inf) throw InfeasibleError("hungarian: no feasible assignment");
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    return row_to_col;
}

}  // namespace

Assignment hungarian(const CostMatrix& c) {
    Assignment out;
    if (c.rows() == 0 || c.cols() == 0) {
        out.row_to_col.assign(c.rows(), -1);
        return out;
    }
    if (c.rows() <= c.cols()) {
        out.row_to_col = solve_wide(c);
    } else {
        const auto col_to_row = solve_wide(c.transposed());
        out.row_to_col.assign(c.rows(), -1);
        for (std::size_t j = 0; j < col_to_row.size(); ++j)
            out.row_to_col[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
    }
    out.cost = assignment_cost(c, out.row_to_col);
    return out;
}

}  // namespace mt3::assignment
