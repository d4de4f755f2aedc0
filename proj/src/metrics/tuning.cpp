#include "mt3/metrics/tuning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mt3::metrics {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (n == 0 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_grid: bad range");
    if (n == 1) return {lo};
    std::vector<double> g(n);
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> default_intensity_grid() { return log_grid(1e-8, 1e-1, 29); }

std::vector<double> default_cutoff_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
    return g;
}

GridSearch grid_search(const std::vector<double>& grid, std::size_t n_samples,
                       const std::function<double(double, std::size_t)>& objective) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    GridSearch s;
    s.grid = grid;
    s.mean.assign(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) sum += objective(grid[g], i);
        s.mean[g] = n_samples ? sum / static_cast<double>(n_samples) : 0.0;
        if (s.mean[g] < s.mean[s.best]) s.best = g;
    }
    return s;
}

GridSearch tune_p_cutoff(const std::vector<MultiBernoulli>& predictions,
                         const std::vector<std::vector<State>>& truths, const GospaParams& params,
                         std::vector<double> grid) {
    if (predictions.size() != truths.size()) throw std::invalid_argument("tune_p_cutoff: size mismatch");
    return grid_search(grid, predictions.size(), [&](double cutoff, std::size_t i) {
        return gospa(extract_estimates(predictions[i], cutoff), truths[i], params).total;
    });
}

GridSearch tune_background_intensity(const std::vector<MultiBernoulli>& predictions,
                                     const std::vector<std::vector<State>>& truths,
                                     const sim::FovBounds& fov, std::vector<double> grid) {
    if (predictions.size() != truths.size())
        throw std::invalid_argument("tune_background_intensity: size mismatch");
    std::vector<MultiBernoulli> capped;
    capped.reserve(predictions.size());
    for (const auto& mb : predictions) capped.push_back(cap_existence(mb));
    return grid_search(grid, predictions.size(), [&](double rate, std::size_t i) {
        return pmb_nll({capped[i], PoissonIntensity::uniform(rate, fov)}, truths[i]).total;
    });
}

}  // namespace mt3::metrics
