#pragma once

#include "mt3/sim/config.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace mt3::sim {

using RandomSource = std::mt19937_64;

class DegenerateGeometryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Nearly-constant-velocity transition matrix.
Eigen::Matrix4d transition_matrix(double dt);
/// Process noise covariance sigma_q^2 * [[I dt^3/3, I dt^2/2], [I dt^2/2, I dt]].
Eigen::Matrix4d process_noise(double sigma_q, double dt);

/// Draw x' ~ N(F x, Q).
State propagate_state(const State& x, const ScenarioConfig& cfg, RandomSource& rng);

/// Noiseless radar map H(x) = (range, range-rate, bearing).
Measurement measure_state(const State& x);

/// H(x) is defined and falls inside the FOV.
bool state_in_fov(const State& x, const FovBounds& fov);

struct Trajectory {
    int object_id = 0;
    int birth_step = 0;
    std::vector<State> states;     // one per step from birth_step
    std::vector<char> detected;    // detection draw succeeded at that step

    int last_step() const { return birth_step + static_cast<int>(states.size()) - 1; }
    bool alive_at(int t) const { return t >= birth_step && t <= last_step(); }
    const State& state_at(int t) const { return states.at(static_cast<std::size_t>(t - birth_step)); }
};

struct GroundTruthSample {
    std::vector<Trajectory> trajectories;
    int final_step = 0;

    /// x_{1:m}: states of objects alive at the final step, optionally only
    /// those whose noiseless measurement lies in the FOV.
    std::vector<State> final_states(const FovBounds& fov, bool in_fov_only = true) const;
    std::vector<int> final_object_ids(const FovBounds& fov, bool in_fov_only = true) const;
};

struct LabeledMeasurement {
    Measurement z;
    int t = 0;
    int label = -1;   // object id, or -1 for clutter
};

/// Window of measurements, ascending in time-step; ties in generation order.
struct MeasurementSet {
    std::vector<LabeledMeasurement> items;
    int first_step = 0;   // T - tau
    int last_step = 0;    // T

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    std::vector<int> labels() const;
};

struct Scenario {
    MeasurementSet measurements;
    GroundTruthSample truth;
};

Scenario sample_scenario(const ScenarioConfig& cfg, RandomSource& rng);

/// Convenience for seeded generation; identical seeds give identical output.
Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Deterministically derive a child seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace mt3::sim
