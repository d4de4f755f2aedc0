#include "mt3/sim/dataset_io.hpp"

#include <fstream>
#include <iomanip>
#include <algorithm>
#include <map>
#include <sstream>
#include <string>

namespace mt3::sim {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

void write_measurements(std::ostream& out, const std::vector<Scenario>& scenarios) {
    out << "scenario_id,t,r,rdot,theta,label\n" << std::setprecision(17);
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (const auto& m : scenarios[s].measurements.items)
            out << s << ',' << m.t << ',' << m.z[0] << ',' << m.z[1] << ',' << m.z[2] << ',' << m.label << '\n';
}

void write_truth(std::ostream& out, const std::vector<Scenario>& scenarios) {
    out << "scenario_id,object_id,t,px,py,vx,vy\n" << std::setprecision(17);
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (const auto& tr : scenarios[s].truth.trajectories)
            for (std::size_t i = 0; i < tr.states.size(); ++i) {
                const auto& x = tr.states[i];
                out << s << ',' << tr.object_id << ',' << tr.birth_step + static_cast<int>(i) << ',' << x[0] << ','
                    << x[1] << ',' << x[2] << ',' << x[3] << '\n';
            }
}

std::vector<Scenario> read_dataset(std::istream& measurements, std::istream& truth, int tau,
                                   std::size_t count) {
    std::map<std::size_t, Scenario> by_id;
    auto scenario = [&](std::size_t id) -> Scenario& {
        auto [it, inserted] = by_id.try_emplace(id);
        if (inserted) {
            it->second.measurements.first_step = 0;
            it->second.measurements.last_step = tau;
            it->second.truth.final_step = tau;
        }
        return it->second;
    };

    std::string line;
    std::getline(measurements, line);
    while (std::getline(measurements, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6) throw std::runtime_error("measurements.csv: malformed row '" + line + "'");
        LabeledMeasurement m;
        m.t = std::stoi(f[1]);
        m.z = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
        m.label = std::stoi(f[5]);
        scenario(std::stoul(f[0])).measurements.items.push_back(m);
    }

    std::getline(truth, line);
    while (std::getline(truth, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw std::runtime_error("truth.csv: malformed row '" + line + "'");
        auto& sc = scenario(std::stoul(f[0]));
        const int id = std::stoi(f[1]);
        const int t = std::stoi(f[2]);
        const State x{std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
        auto& trajs = sc.truth.trajectories;
        if (trajs.empty() || trajs.back().object_id != id) {
            Trajectory tr;
            tr.object_id = id;
            tr.birth_step = t;
            trajs.push_back(tr);
        }
        trajs.back().states.push_back(x);
    }

    if (!by_id.empty()) count = std::max(count, by_id.rbegin()->first + 1);
    std::vector<Scenario> out(count);
    for (auto& sc : out) {
        sc.measurements.last_step = tau;
        sc.truth.final_step = tau;
    }
    for (auto& [id, sc] : by_id) out[id] = std::move(sc);
    return out;
}

void save_dataset(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                  const ScenarioConfig& cfg) {
    std::filesystem::create_directories(dir);
    std::ofstream m(dir / "measurements.csv");
    std::ofstream t(dir / "truth.csv");
    if (!m || !t) throw std::runtime_error("cannot write dataset into " + dir.string());
    write_measurements(m, scenarios);
    write_truth(t, scenarios);
    save_config(cfg, dir / "config.cfg");
    std::ofstream(dir / "count.txt") << scenarios.size() << '\n';
}

std::vector<Scenario> load_dataset(const std::filesystem::path& dir, ScenarioConfig* cfg_out) {
    const ScenarioConfig cfg = load_config(dir / "config.cfg");
    if (cfg_out) *cfg_out = cfg;
    std::ifstream m(dir / "measurements.csv");
    std::ifstream t(dir / "truth.csv");
    if (!m || !t) throw std::runtime_error("cannot read dataset from " + dir.string());
    std::size_t count = 0;
    if (std::ifstream c(dir / "count.txt"); c) c >> count;
    return read_dataset(m, t, cfg.tau, count);
}

}  // namespace mt3::sim
