#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mt3/harness/trackers.hpp"
#include "mt3/metrics/records.hpp"
#include "mt3/metrics/tuning.hpp"
#include "mt3/sim/config.hpp"

namespace mt3::harness {

/// Mean with a 95% normal-approximation halfwidth.
struct Estimate {
    double mean = 0.0;
    double ci = 0.0;
    bool operator==(const Estimate&) const = default;
};

/// Sample mean and 1.96·sd/√N (sd with N−1 in the denominator; 0 for N < 2).
Estimate estimate(const std::vector<double>& values);

struct Decomposition {
    Estimate total, localization, false_cost, missed_cost;
    bool operator==(const Decomposition&) const = default;
};

struct AlgorithmSummary {
    std::string task;
    std::string algorithm;
    std::size_t n = 0;
    Decomposition gospa;
    /// Averaged over scenarios with finite NLL; `nll_infinite` counts the rest.
    Decomposition nll;
    std::size_t nll_infinite = 0;
    double p_cutoff = 0.0;
    double lambda_bar = 0.0;   // 0 when the tracker supplies its own PPP
    double time_median = 0.0;  // seconds per scenario
    double time_mean = 0.0;

    bool operator==(const AlgorithmSummary&) const = default;
    /// Equality ignoring wall-clock fields.
    bool same_scores(const AlgorithmSummary& o) const;
};

struct EvalReport {
    std::vector<AlgorithmSummary> rows;
    bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
    std::size_t n_scenarios = 1000;
    metrics::GospaParams gospa;
    std::vector<double> cutoff_grid = metrics::default_cutoff_grid();
    std::vector<double> intensity_grid = metrics::default_intensity_grid();
};

/// Seeded evaluation scenarios; index i always maps to the same draw.
std::vector<sim::Scenario> evaluation_scenarios(const sim::ScenarioConfig& cfg, std::size_t n, std::uint64_t seed);

struct AlgorithmRun {
    AlgorithmSummary summary;
    std::vector<metrics::MetricRow> scenarios;   // per-scenario GOSPA and NLL rows
};

/// Scores one tracker on prepared scenarios. p_cutoff (and λ̄ for trackers
/// without a PPP) are tuned on these same scenarios.
AlgorithmRun evaluate_tracker(const Tracker& tracker, const std::string& task,
                              const std::vector<sim::Scenario>& scenarios, const sim::FovBounds& fov,
                              const EvalOptions& opt = {});

/// Every tracker sees the identical scenario stream drawn from `seed`.
EvalReport evaluate(const std::vector<const Tracker*>& trackers, const std::string& task,
                    const sim::ScenarioConfig& cfg, std::uint64_t seed, const EvalOptions& opt = {},
                    std::vector<AlgorithmRun>* runs = nullptr);

}  // namespace mt3::harness
