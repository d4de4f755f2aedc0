#include "mt3/metrics/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mt3/sim/scenario.hpp"

namespace mt3::metrics {

PoissonIntensity PoissonIntensity::uniform(double rate, const sim::FovBounds& fov) {
    PoissonIntensity p;
    p.kind = Kind::Uniform;
    p.rate = rate;
    p.fov = fov;
    return p;
}

PoissonIntensity PoissonIntensity::gaussian_mixture(std::vector<GaussianComponent> comps) {
    PoissonIntensity p;
    p.kind = Kind::Mixture;
    p.mixture = std::move(comps);
    return p;
}

double PoissonIntensity::integral() const {
    if (kind == Kind::Uniform) return rate * sim::fov_volume(fov);
    double s = 0.0;
    for (const auto& c : mixture) s += c.weight;
    return s;
}

double PoissonIntensity::log_intensity(const State& x) const {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (kind == Kind::Uniform) {
        if (rate <= 0.0 || !sim::state_in_fov(x, fov)) return ninf;
        return std::log(rate);
    }
    double best = ninf;
    std::vector<double> terms;
    for (const auto& c : mixture) {
        if (c.weight <= 0.0) continue;
        terms.push_back(std::log(c.weight) + log_gaussian(x, c.mean, c.cov));
        best = std::max(best, terms.back());
    }
    if (best == ninf) return ninf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return best + std::log(s);
}

double log_gaussian(const State& x, const State& mean, const Eigen::Matrix4d& cov) {
    Eigen::LLT<Eigen::Matrix4d> llt(cov);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const State w = llt.matrixL().solve(x - mean);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (4.0 * std::log(2.0 * std::numbers::pi) + logdet + w.squaredNorm());
}

MultiBernoulli cap_existence(MultiBernoulli mb, double cap) {
    for (auto& b : mb) b.existence = std::min(b.existence, cap);
    return mb;
}

}  // namespace mt3::metrics
