#include "mt3/metrics/records.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mt3::metrics {

MetricRow to_row(std::size_t scenario_id, const GospaResult& r) {
    return {scenario_id, "gospa", r.total, r.localization, r.false_cost, r.missed_cost};
}

MetricRow to_row(std::size_t scenario_id, const NllResult& r) {
    return {scenario_id, "nll", r.total, r.localization, r.false_cost, r.missed_cost};
}

void write_rows(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "scenario_id,metric,total,loc,false,missed\n" << std::setprecision(17);
    for (const auto& r : rows)
        out << r.scenario_id << ',' << r.metric << ',' << r.total << ',' << r.localization << ','
            << r.false_cost << ',' << r.missed_cost << '\n';
}

std::vector<MetricRow> read_rows(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "scenario_id,metric,total,loc,false,missed")
        throw std::runtime_error("metric rows: missing header");
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (f.size() != 6) throw std::runtime_error("metric rows: bad line '" + line + "'");
        try {
            rows.push_back({std::stoul(f[0]), f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                            std::stod(f[5])});
        } catch (const std::logic_error&) {
            throw std::runtime_error("metric rows: bad number in '" + line + "'");
        }
    }
    return rows;
}

}  // namespace mt3::metrics
