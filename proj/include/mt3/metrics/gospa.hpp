#pragma once

#include <vector>

#include "mt3/metrics/density.hpp"

namespace mt3::metrics {

struct GospaParams {
    double c = 10.0;
    double p = 1.0;
    /// Distance over (px, py) only unless set; then the full 4-d state.
    bool use_velocity = false;

    void validate() const;
};

struct GospaResult {
    double total = 0.0;
    // Contributions to total^p: the three terms sum to total^p.
    double localization = 0.0;
    double false_cost = 0.0;
    double missed_cost = 0.0;
    /// Index into truth for every estimate, or -1 when left unassigned.
    std::vector<int> assignment;
};

double state_distance(const State& a, const State& b, bool use_velocity);

/// GOSPA with alpha = 2, solved exactly on an augmented square assignment.
/// Pairs whose distance reaches the cutoff are reported as unassigned.
GospaResult gospa(const std::vector<State>& estimates, const std::vector<State>& truth,
                  const GospaParams& params = {});

/// Means of the Bernoullis whose existence strictly exceeds p_cutoff.
std::vector<State> extract_estimates(const MultiBernoulli& mb, double p_cutoff);

}  // namespace mt3::metrics
