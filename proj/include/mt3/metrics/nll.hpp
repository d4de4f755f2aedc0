#pragma once

#include <vector>

#include "mt3/metrics/density.hpp"

namespace mt3::metrics {

struct NllResult {
    double total = 0.0;
    double localization = 0.0;
    double false_cost = 0.0;
    double missed_cost = 0.0;
    /// Set when no assignment has finite cost (a truth the density cannot
    /// explain at all); every field is then +inf.
    bool infinite = false;
    /// Index into truth for every Bernoulli, or -1.
    std::vector<int> assignment;
};

/// Negative log-likelihood of `truth` under a PMB density, keeping only the
/// most likely Bernoulli-to-truth association. Existence probabilities are
/// used as given; cap them first (cap_existence) for evaluation.
NllResult pmb_nll(const PmbDensity& d, const std::vector<State>& truth);

}  // namespace mt3::metrics
