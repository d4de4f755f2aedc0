#pragma once

#include <vector>

#include "mt3/metrics/density.hpp"
#include "mt3/pmbm/measurement.hpp"
#include "mt3/sim/scenario.hpp"

namespace mt3::pmbm {

struct PmbmConfig {
    double p_s = 0.95;
    double p_d = 0.95;
    /// Clutter intensity per unit measurement volume (uniform on the FOV).
    double clutter_intensity = 4.4e-3;
    double lambda0 = 2.0;
    double lambda_b = 1.3e-4;
    State birth_mean{7.0, 0.0, 0.0, 0.0};
    Matrix4d birth_cov = Eigen::Vector4d{10.0, 30.0, 3.0, 3.0}.asDiagonal();
    Matrix4d f = Matrix4d::Identity();
    Matrix4d q = Matrix4d::Zero();
    MeasurementModel model;

    double gate = 20.0;                 // squared Mahalanobis distance
    std::size_t max_hypotheses = 200;   // Murty budget, split by parent weight
    int iterations = 5;                 // IPLF
    double prune_hypothesis = 1e-4;
    double prune_existence = 1e-5;
    double prune_ppp = 1e-5;

    void validate() const;
};

/// Filter settings matching a scenario generator (radar model, its FOV and
/// noise, motion and birth parameters).
PmbmConfig pmbm_config(const sim::ScenarioConfig& cfg);

struct LocalHypothesis {
    double existence = 0.0;
    Gaussian state;
};

struct Track {
    std::vector<LocalHypothesis> hypotheses;
};

struct GlobalHypothesis {
    double log_weight = 0.0;
    /// One local hypothesis index per track.
    std::vector<int> local;
};

struct PmbmState {
    std::vector<metrics::GaussianComponent> ppp;
    std::vector<Track> tracks;
    std::vector<GlobalHypothesis> globals;
};

class PmbmFilter {
public:
    explicit PmbmFilter(PmbmConfig cfg);

    const PmbmConfig& config() const { return cfg_; }

    /// Undetected intensity lambda0 N(birth), no tracks, one empty hypothesis.
    PmbmState initial_state() const;
    PmbmState predict(const PmbmState& s) const;
    PmbmState update(const PmbmState& s, const std::vector<Measurement>& z) const;

    /// Filter a whole window: update at the first step, then predict and
    /// update at each later one. Returns the posterior at the last step.
    PmbmState run(const sim::MeasurementSet& ms) const;

private:
    PmbmConfig cfg_;
};

/// Multi-Bernoulli of the highest-weight global hypothesis (existence capped
/// at 0.99) plus the Poisson mixture. Throws std::logic_error without
/// hypotheses.
metrics::PmbDensity to_pmb(const PmbmState& s, double cap = 0.99);

}  // namespace mt3::pmbm
