#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mt3/harness/evaluate.hpp"

namespace mt3::harness {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One line per AlgorithmSummary; doubles at 17 significant digits so the
/// file parses back to equal values.
void write_summary_csv(std::ostream& out, const EvalReport& report);
EvalReport read_summary_csv(std::istream& in);

void save_report(const std::filesystem::path& file, const EvalReport& report);
EvalReport load_report(const std::filesystem::path& file);

/// Full-scale results (1M GPU training steps) for tasks 1-4, shown next to
/// desk-scale numbers as a reference band.
struct Reference {
    double gospa = 0.0, gospa_ci = 0.0;
    double nll = 0.0, nll_ci = 0.0;
    double seconds = 0.0;
};
std::optional<Reference> reference_result(const std::string& task, const std::string& algorithm);

/// Aligned text tables: GOSPA and NLL (total ± CI with decomposition) and
/// inference time, one row per (task, algorithm).
std::string gospa_table(const EvalReport& report);
std::string nll_table(const EvalReport& report);
std::string timing_table(const EvalReport& report);

/// Writes summary.csv, gospa.txt, nll.txt and timing.txt into `out_dir`.
void write_report(const std::filesystem::path& out_dir, const std::vector<EvalReport>& reports);

}  // namespace mt3::harness
