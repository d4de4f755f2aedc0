#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mt3/sim/config.hpp"

namespace mt3::metrics {

using State = sim::State;

struct Bernoulli {
    State mean = State::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
    double existence = 0.0;
};

using MultiBernoulli = std::vector<Bernoulli>;

struct GaussianComponent {
    double weight = 0.0;
    State mean = State::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
};

/// Poisson intensity for undetected objects: either λ̄ on states whose
/// noiseless measurement lies in the FOV (zero elsewhere, integral λ̄·V), or a
/// Gaussian mixture.
struct PoissonIntensity {
    enum class Kind { Uniform, Mixture };
    Kind kind = Kind::Uniform;
    double rate = 0.0;
    sim::FovBounds fov;
    std::vector<GaussianComponent> mixture;

    static PoissonIntensity uniform(double rate, const sim::FovBounds& fov);
    static PoissonIntensity gaussian_mixture(std::vector<GaussianComponent> comps);

    double integral() const;
    /// log λ(x); -inf where the intensity vanishes.
    double log_intensity(const State& x) const;
};

struct PmbDensity {
    MultiBernoulli bernoullis;
    PoissonIntensity ppp;
};

/// log N(x; mean, cov) for a 4-d Gaussian; -inf if cov is not SPD.
double log_gaussian(const State& x, const State& mean, const Eigen::Matrix4d& cov);

/// Copy with existence probabilities clipped to at most `cap`.
MultiBernoulli cap_existence(MultiBernoulli mb, double cap = 0.99);

}  // namespace mt3::metrics
