#pragma once

#include <memory>
#include <string>

#include "mt3/metrics/density.hpp"
#include "mt3/model/mt3v2.hpp"
#include "mt3/pmbm/pmbm.hpp"
#include "mt3/sim/scenario.hpp"

namespace mt3::harness {

/// A tracker maps a measurement window to a PMB posterior for the final step.
/// Trackers without a Poisson component leave `ppp` empty and get a uniform
/// background rate tuned during evaluation.
struct TrackerOutput {
    metrics::MultiBernoulli bernoullis;
    std::optional<metrics::PoissonIntensity> ppp;
};

class Tracker {
public:
    virtual ~Tracker() = default;
    virtual std::string name() const = 0;
    /// Must be safe to call concurrently.
    virtual TrackerOutput track(const sim::Scenario& sc) const = 0;
};

class Mt3v2Tracker : public Tracker {
public:
    explicit Mt3v2Tracker(model::Mt3v2 net, std::string label = "mt3v2");
    std::string name() const override { return label_; }
    TrackerOutput track(const sim::Scenario& sc) const override;

private:
    model::Mt3v2 net_;
    std::string label_;
};

class PmbmTracker : public Tracker {
public:
    explicit PmbmTracker(pmbm::PmbmConfig cfg);
    std::string name() const override { return "pmbm"; }
    TrackerOutput track(const sim::Scenario& sc) const override;

private:
    pmbm::PmbmFilter filter_;
};

/// Reads the answer off the ground truth: one Bernoulli per in-FOV object at
/// its true state with existence `p` and covariance `cov`.
class OracleTracker : public Tracker {
public:
    OracleTracker(sim::FovBounds fov, Eigen::Matrix4d cov = default_cov(), double p = 0.99);
    std::string name() const override { return "oracle"; }
    TrackerOutput track(const sim::Scenario& sc) const override;

    static Eigen::Matrix4d default_cov();

private:
    sim::FovBounds fov_;
    Eigen::Matrix4d cov_;
    double p_;
};

/// "mt3v2" (needs a checkpoint), "pmbm" or "oracle".
std::unique_ptr<Tracker> make_tracker(const std::string& name, const sim::ScenarioConfig& scenario,
                                      const std::optional<std::filesystem::path>& checkpoint = {});

}  // namespace mt3::harness
