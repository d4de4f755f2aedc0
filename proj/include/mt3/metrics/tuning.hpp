#pragma once

#include <functional>
#include <vector>

#include "mt3/metrics/gospa.hpp"
#include "mt3/metrics/nll.hpp"

namespace mt3::metrics {

/// n points spaced evenly in log10 between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// 29 points over [1e-8, 1e-1].
std::vector<double> default_intensity_grid();
/// 0.1, 0.2, ..., 0.9.
std::vector<double> default_cutoff_grid();

struct GridSearch {
    std::vector<double> grid;
    std::vector<double> mean;   // objective averaged over samples, per grid point
    std::size_t best = 0;       // first index attaining the minimum

    double best_value() const { return grid.at(best); }
};

/// Evaluate objective(g, i) for every grid point g and sample i < n_samples.
GridSearch grid_search(const std::vector<double>& grid, std::size_t n_samples,
                       const std::function<double(double, std::size_t)>& objective);

/// p_cutoff minimizing mean GOSPA of extract_estimates(mb, p_cutoff).
GridSearch tune_p_cutoff(const std::vector<MultiBernoulli>& predictions,
                         const std::vector<std::vector<State>>& truths, const GospaParams& params = {},
                         std::vector<double> grid = default_cutoff_grid());

/// Background rate λ̄ minimizing mean NLL when a uniform PPP of that rate on
/// the FOV is attached to each (capped) multi-Bernoulli.
GridSearch tune_background_intensity(const std::vector<MultiBernoulli>& predictions,
                                     const std::vector<std::vector<State>>& truths,
                                     const sim::FovBounds& fov,
                                     std::vector<double> grid = default_intensity_grid());

}  // namespace mt3::metrics
