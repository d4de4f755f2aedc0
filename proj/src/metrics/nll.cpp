#include "mt3/metrics/nll.hpp"

#include <cmath>
#include <limits>

#include "mt3/assignment/hungarian.hpp"

namespace mt3::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Finite costs pass through; anything else becomes a forbidden entry.
double admissible(double c) { return std::isfinite(c) ? c : assignment::kForbidden; }

}  // namespace

NllResult pmb_nll(const PmbDensity& d, const std::vector<State>& truth) {
    const auto& mb = d.bernoullis;
    const std::size_t k = mb.size(), m = truth.size(), n = k + m;

    std::vector<double> missed(m);
    for (std::size_t j = 0; j < m; ++j) missed[j] = -d.ppp.log_intensity(truth[j]);

    // Rows: Bernoullis then one dummy per truth. Columns: truths then one
    // dummy per Bernoulli.
    assignment::CostMatrix cost(n, n, assignment::kForbidden);
    std::vector<double> pair(k * m);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& b = mb[i];
        for (std::size_t j = 0; j < m; ++j) {
            pair[i * m + j] = -std::log(b.existence) - log_gaussian(truth[j], b.mean, b.cov);
            cost(i, j) = admissible(pair[i * m + j]);
        }
        cost(i, m + i) = admissible(-std::log1p(-b.existence));
    }
    for (std::size_t j = 0; j < m; ++j) {
        cost(k + j, j) = admissible(missed[j]);
        for (std::size_t i = 0; i < k; ++i) cost(k + j, m + i) = 0.0;
    }

    NllResult r;
    r.assignment.assign(k, -1);
    assignment::Assignment a;
    try {
        if (n > 0) a = assignment::hungarian(cost);
    } catch (const assignment::InfeasibleError&) {
        r.infinite = true;
        r.total = r.localization = r.false_cost = r.missed_cost = kInf;
        return r;
    }

    std::vector<char> truth_used(m, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const int j = a.row_to_col[i];
        if (j >= 0 && j < static_cast<int>(m)) {
            r.assignment[i] = j;
            truth_used[j] = 1;
            r.localization += pair[i * m + j];
        } else {
            r.false_cost += -std::log1p(-mb[i].existence);
        }
    }
    r.missed_cost = d.ppp.integral();
    for (std::size_t j = 0; j < m; ++j)
        if (!truth_used[j]) r.missed_cost += missed[j];
    r.total = r.localization + r.false_cost + r.missed_cost;
    return r;
}

}  // namespace mt3::metrics
