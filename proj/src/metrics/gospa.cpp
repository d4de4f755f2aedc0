#include "mt3/metrics/gospa.hpp"

#include <cmath>
#include <stdexcept>

#include "mt3/assignment/hungarian.hpp"

namespace mt3::metrics {

void GospaParams::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("gospa: cutoff c must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("gospa: order p must be >= 1");
}

double state_distance(const State& a, const State& b, bool use_velocity) {
    return use_velocity ? (a - b).norm() : (a - b).head<2>().norm();
}

GospaResult gospa(const std::vector<State>& estimates, const std::vector<State>& truth,
                  const GospaParams& params) {
    params.validate();
    const std::size_t ne = estimates.size(), nt = truth.size(), n = ne + nt;
    const double cp = std::pow(params.c, params.p), half = 0.5 * cp;

    GospaResult r;
    r.assignment.assign(ne, -1);
    if (n == 0) return r;

    // Rows: estimates then one dummy per truth. Columns: truths then one
    // dummy per estimate. Leaving an element unassigned costs c^p/2.
    assignment::CostMatrix cost(n, n, assignment::kForbidden);
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j < nt; ++j)
            cost(i, j) = std::min(std::pow(state_distance(estimates[i], truth[j], params.use_velocity), params.p), cp);
        cost(i, nt + i) = half;
    }
    for (std::size_t j = 0; j < nt; ++j) {
        cost(ne + j, j) = half;
        for (std::size_t i = 0; i < ne; ++i) cost(ne + j, nt + i) = 0.0;
    }
    const auto a = assignment::hungarian(cost);

    std::size_t matched = 0;
    for (std::size_t i = 0; i < ne; ++i) {
        const int j = a.row_to_col[i];
        if (j < 0 || j >= static_cast<int>(nt)) continue;
        const double d = std::pow(state_distance(estimates[i], truth[j], params.use_velocity), params.p);
        if (d >= cp) continue;
        r.assignment[i] = j;
        r.localization += d;
        ++matched;
    }
    r.false_cost = half * static_cast<double>(ne - matched);
    r.missed_cost = half * static_cast<double>(nt - matched);
    const double sum = r.localization + r.false_cost + r.missed_cost;
    r.total = params.p == 1.0 ? sum : std::pow(sum, 1.0 / params.p);
    return r;
}

std::vector<State> extract_estimates(const MultiBernoulli& mb, double p_cutoff) {
    std::vector<State> out;
    for (const auto& b : mb)
        if (b.existence > p_cutoff) out.push_back(b.mean);
    return out;
}

}  // namespace mt3::metrics
