#pragma once

#include "mt3/sim/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mt3::sim {

// Line-delimited CSV records, 17 significant digits so values round-trip:
//   measurements.csv  scenario_id,t,r,rdot,theta,label
//   truth.csv         scenario_id,object_id,t,px,py,vx,vy
// truth.csv lists every step of every trajectory. A dataset directory also
// holds config.cfg (the generating config, which fixes the window [0, tau])
// and count.txt (number of scenarios, since empty scenarios have no rows).

void write_measurements(std::ostream& out, const std::vector<Scenario>& scenarios);
void write_truth(std::ostream& out, const std::vector<Scenario>& scenarios);

/// Rebuild scenarios from the two files. Detection flags are not stored and
/// come back empty; tau fixes the window [0, tau].
std::vector<Scenario> read_dataset(std::istream& measurements, std::istream& truth, int tau,
                                   std::size_t count = 0);

void save_dataset(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                  const ScenarioConfig& cfg);
std::vector<Scenario> load_dataset(const std::filesystem::path& dir, ScenarioConfig* cfg_out = nullptr);

}  // namespace mt3::sim
