#include "mt3/autodiff/adam.hpp"

#include <cmath>

namespace mt3::ad {

void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
    if (grads.size() != params.size()) throw DimensionError("adam_step: gradient count mismatch");
    if (state.m.empty()) {
        state.m = zero_gradients(params);
        state.v = zero_gradients(params);
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i].value;
        const auto& g = grads[i];
        if (g.size() != p.size()) throw DimensionError("adam_step: gradient shape mismatch for " + params[i].name);
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mh = m[j] / c1;
            const double vh = v[j] / c2;
            p[j] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        }
    }
}

}  // namespace mt3::ad
