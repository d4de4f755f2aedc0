#pragma once

#include <cstdint>
#include <string>

#include "mt3/model/mt3v2.hpp"
#include "mt3/sim/config.hpp"

namespace mt3::harness {

/// Initial learning rate for short CPU runs of the reduced network. The
/// full-scale default (5e-5) is tuned for ~1M steps.
inline constexpr double kToyLearningRate = 1e-3;

struct TrainerConfig {
    std::size_t batch = 32;
    double lr = 5e-5;
    std::int64_t patience = 50000;   // steps without a new best loss before lr /= lr_divisor
    double lr_divisor = 4.0;
    std::int64_t max_steps = 0;
    std::int64_t eval_every = 1000;  // held-out GOSPA interval; 0 disables periodic evaluation
    std::size_t eval_scenarios = 200;
    std::int64_t checkpoint_every = 0;
    /// Scenarios with more than k in-FOV objects are redrawn, at most this
    /// many times, before the step is aborted.
    int max_resamples = 1000;

    void validate() const;
};

struct TaskSpec {
    std::string task = "1";
    sim::ScenarioConfig scenario;
    model::Mt3v2Config model;
    double beta = 4.0;
    TrainerConfig trainer;

    void validate() const;

    /// Scenario preset `task` with the full-size network; `toy_dims` swaps in
    /// the reduced network (d'=32, N=M=2, 2 heads, k=8).
    static TaskSpec preset(const std::string& task, bool toy_dims = false);
};

}  // namespace mt3::harness
