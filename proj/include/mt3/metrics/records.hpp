#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mt3/metrics/gospa.hpp"
#include "mt3/metrics/nll.hpp"

namespace mt3::metrics {

// scenario_id,metric,total,loc,false,missed
struct MetricRow {
    std::size_t scenario_id = 0;
    std::string metric;
    double total = 0.0;
    double localization = 0.0;
    double false_cost = 0.0;
    double missed_cost = 0.0;

    bool operator==(const MetricRow&) const = default;
};

MetricRow to_row(std::size_t scenario_id, const GospaResult& r);
MetricRow to_row(std::size_t scenario_id, const NllResult& r);

void write_rows(std::ostream& out, const std::vector<MetricRow>& rows);
/// Throws std::runtime_error on malformed input.
std::vector<MetricRow> read_rows(std::istream& in);

}  // namespace mt3::metrics
