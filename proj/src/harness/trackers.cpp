#include "mt3/harness/trackers.hpp"

#include <stdexcept>

namespace mt3::harness {

Mt3v2Tracker::Mt3v2Tracker(model::Mt3v2 net, std::string label) : net_(std::move(net)), label_(std::move(label)) {}

TrackerOutput Mt3v2Tracker::track(const sim::Scenario& sc) const { return {net_.predict(sc.measurements), {}}; }

PmbmTracker::PmbmTracker(pmbm::PmbmConfig cfg) : filter_(std::move(cfg)) {}

TrackerOutput PmbmTracker::track(const sim::Scenario& sc) const {
    auto d = pmbm::to_pmb(filter_.run(sc.measurements));
    return {std::move(d.bernoullis), std::move(d.ppp)};
}

OracleTracker::OracleTracker(sim::FovBounds fov, Eigen::Matrix4d cov, double p) : fov_(fov), cov_(cov), p_(p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("OracleTracker: p must lie in (0, 1)");
}

Eigen::Matrix4d OracleTracker::default_cov() { return Eigen::Vector4d(0.01, 0.01, 0.01, 0.01).asDiagonal(); }

TrackerOutput OracleTracker::track(const sim::Scenario& sc) const {
    TrackerOutput out;
    for (const auto& x : sc.truth.final_states(fov_)) out.bernoullis.push_back({x, cov_, p_});
    return out;
}

std::unique_ptr<Tracker> make_tracker(const std::string& name, const sim::ScenarioConfig& scenario,
                                      const std::optional<std::filesystem::path>& checkpoint) {
    if (name == "mt3v2") {
        if (!checkpoint) throw std::invalid_argument("mt3v2 tracker needs a checkpoint");
        return std::make_unique<Mt3v2Tracker>(model::Mt3v2::load(*checkpoint));
    }
    if (name == "pmbm") return std::make_unique<PmbmTracker>(pmbm::pmbm_config(scenario));
    if (name == "oracle") return std::make_unique<OracleTracker>(scenario.fov);
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

}  // namespace mt3::harness
