#pragma once

#include <cstdint>

#include "mt3/autodiff/parameters.hpp"

namespace mt3::ad {

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Gradients m;
    Gradients v;
    std::int64_t step = 0;
};

/// One bias-corrected Adam update. Moments are allocated on first use.
void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace mt3::ad
