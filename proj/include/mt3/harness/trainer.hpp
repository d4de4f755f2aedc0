#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mt3/harness/task.hpp"
#include "mt3/metrics/gospa.hpp"
#include "mt3/sim/scenario.hpp"

namespace mt3::harness {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario for batch slot `slot` of step `step`. Draws whose in-FOV object
/// count exceeds k are replaced by further draws from a derived seed.
sim::Scenario training_scenario(const TaskSpec& spec, std::uint64_t seed, std::int64_t step, std::size_t slot);

/// The fixed held-out set used for the training curve.
std::vector<sim::Scenario> heldout_scenarios(const TaskSpec& spec, std::uint64_t seed);

struct CurvePoint {
    std::int64_t step = 0;
    double gospa = 0.0;
    double p_cutoff = 0.0;
};

struct HeldoutScore {
    double gospa = 0.0;
    double p_cutoff = 0.0;
};

/// Mean GOSPA on `scenarios` at the cutoff minimizing it.
HeldoutScore heldout_gospa(const model::Mt3v2& m, const std::vector<sim::Scenario>& scenarios,
                           const sim::FovBounds& fov);

struct StepRecord {
    std::int64_t step = 0;
    double loss = 0.0;   // batch mean
    double lr = 0.0;
};

struct TrainResult {
    model::Mt3v2 model;
    std::vector<StepRecord> losses;
    std::vector<CurvePoint> curve;
    std::optional<model::Mt3v2> best;   // parameters at the best held-out GOSPA
};

struct TrainHooks {
    /// Called after every step.
    std::function<void(const StepRecord&)> on_step;
    std::function<void(const CurvePoint&)> on_eval;
};

/// Adam on freshly generated batches. With `out` set, writes loss and curve
/// CSVs plus checkpoints (periodic, final and best held-out GOSPA).
TrainResult train(const TaskSpec& spec, std::uint64_t seed, const std::optional<std::filesystem::path>& out = {},
                  const TrainHooks& hooks = {});

}  // namespace mt3::harness
