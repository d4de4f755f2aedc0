#include "mt3/harness/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace mt3::harness {

namespace {

constexpr const char* kHeader =
    "task,algorithm,n,"
    "gospa,gospa_ci,gospa_loc,gospa_loc_ci,gospa_false,gospa_false_ci,gospa_missed,gospa_missed_ci,"
    "nll,nll_ci,nll_loc,nll_loc_ci,nll_false,nll_false_ci,nll_missed,nll_missed_ci,"
    "nll_infinite,p_cutoff,lambda_bar,time_median,time_mean";

void put(std::ostream& out, const Estimate& e) { out << ',' << e.mean << ',' << e.ci; }
void put(std::ostream& out, const Decomposition& d) {
    put(out, d.total);
    put(out, d.localization);
    put(out, d.false_cost);
    put(out, d.missed_cost);
}

class FieldReader {
public:
    FieldReader(const std::string& line, std::size_t line_no) : line_no_(line_no) {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields_.push_back(f);
        if (!line.empty() && line.back() == ',') fields_.emplace_back();
    }
    std::size_t size() const { return fields_.size(); }
    std::string text() { return next(); }
    double number() {
        const std::string f = next();
        try {
            std::size_t used = 0;
            const double v = std::stod(f, &used);
            if (used == f.size()) return v;
        } catch (const std::exception&) {
        }
        fail("bad number '" + f + "'");
    }
    std::size_t count() {
        const double v = number();
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) fail("bad count");
        return static_cast<std::size_t>(v);
    }
    Estimate estimate() {
        Estimate e;
        e.mean = number();
        e.ci = number();
        return e;
    }
    Decomposition decomposition() {
        Decomposition d;
        d.total = estimate();
        d.localization = estimate();
        d.false_cost = estimate();
        d.missed_cost = estimate();
        return d;
    }

private:
    std::string next() {
        if (pos_ >= fields_.size()) fail("too few fields");
        return fields_[pos_++];
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ReportError("summary line " + std::to_string(line_no_) + ": " + what);
    }

    std::vector<std::string> fields_;
    std::size_t pos_ = 0;
    std::size_t line_no_;
};

std::string fixed(double v, int digits = 2) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string pm(double mean, double ci, int digits = 2) { return fixed(mean, digits) + " ± " + fixed(ci, digits); }

// Display width, counting each UTF-8 code point once.
std::size_t width(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string align(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (w.size() <= c) w.push_back(0);
            w[c] = std::max(w[c], width(r[c]));
        }
    std::ostringstream out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string line;
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            line += rows[i][c];
            if (c + 1 < rows[i].size()) line += std::string(w[c] - width(rows[i][c]) + 2, ' ');
        }
        out << line << '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < w.size(); ++c) total += w[c] + (c + 1 < w.size() ? 2 : 0);
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

std::vector<std::string> decomposition_row(const AlgorithmSummary& s, const Decomposition& d) {
    return {s.task, s.algorithm, pm(d.total.mean, d.total.ci), fixed(d.localization.mean), fixed(d.false_cost.mean),
            fixed(d.missed_cost.mean)};
}

}  // namespace

void write_summary_csv(std::ostream& out, const EvalReport& report) {
    out << kHeader << '\n' << std::setprecision(17);
    for (const auto& s : report.rows) {
        if (s.task.find_first_of(",\n") != std::string::npos || s.algorithm.find_first_of(",\n") != std::string::npos)
            throw ReportError("task and algorithm names may not contain commas or newlines");
        out << s.task << ',' << s.algorithm << ',' << s.n;
        put(out, s.gospa);
        put(out, s.nll);
        out << ',' << s.nll_infinite << ',' << s.p_cutoff << ',' << s.lambda_bar << ',' << s.time_median << ','
            << s.time_mean << '\n';
    }
}

EvalReport read_summary_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw ReportError("summary: missing or unexpected header");
    EvalReport report;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        FieldReader f(line, line_no);
        if (f.size() != 24) throw ReportError("summary line " + std::to_string(line_no) + ": expected 24 fields");
        AlgorithmSummary s;
        s.task = f.text();
        s.algorithm = f.text();
        s.n = f.count();
        s.gospa = f.decomposition();
        s.nll = f.decomposition();
        s.nll_infinite = f.count();
        s.p_cutoff = f.number();
        s.lambda_bar = f.number();
        s.time_median = f.number();
        s.time_mean = f.number();
        report.rows.push_back(std::move(s));
    }
    return report;
}

void save_report(const std::filesystem::path& file, const EvalReport& report) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream f(file);
    if (!f) throw ReportError("cannot write " + file.string());
    write_summary_csv(f, report);
}

EvalReport load_report(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw ReportError("cannot read " + file.string());
    return read_summary_csv(f);
}

std::optional<Reference> reference_result(const std::string& task, const std::string& algorithm) {
    static const std::map<std::pair<std::string, std::string>, Reference> table = {
        {{"1", "pmbm"}, {3.44, 0.18, 1.78, 0.33, 4.92}},
        {{"1", "mt3v2"}, {3.46, 0.18, 6.49, 0.35, 0.03}},
        {{"2", "pmbm"}, {19.03, 0.53, 31.40, 1.00, 126.80}},
        {{"2", "mt3v2"}, {17.03, 0.46, 36.00, 0.94, 0.04}},
        {{"3", "pmbm"}, {7.27, 0.30, 22.39, 1.01, 13.90}},
        {{"3", "mt3v2"}, {6.01, 0.27, 12.90, 0.54, 0.04}},
        {{"4", "pmbm"}, {26.72, 0.71, 55.21, 1.49, 310.14}},
        {{"4", "mt3v2"}, {22.82, 0.56, 47.67, 1.13, 0.06}},
    };
    // Checkpoint variants such as "mt3v2-best" share the base reference.
    const std::string base = algorithm.substr(0, algorithm.find('-'));
    const auto it = table.find({task, base});
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::string gospa_table(const EvalReport& report) {
    std::vector<std::vector<std::string>> rows{{"Task", "Algorithm", "GOSPA", "Localization", "False", "Missed",
                                                "p_cutoff", "Reference"}};
    for (const auto& s : report.rows) {
        auto r = decomposition_row(s, s.gospa);
        r.push_back(fixed(s.p_cutoff));
        const auto ref = reference_result(s.task, s.algorithm);
        r.push_back(ref ? pm(ref->gospa, ref->gospa_ci) : "-");
        rows.push_back(std::move(r));
    }
    return align(rows);
}

std::string nll_table(const EvalReport& report) {
    std::vector<std::vector<std::string>> rows{{"Task", "Algorithm", "NLL", "Localization", "False", "Missed",
                                                "Infinite", "lambda_bar", "Reference"}};
    for (const auto& s : report.rows) {
        auto r = decomposition_row(s, s.nll);
        r.push_back(std::to_string(s.nll_infinite));
        std::ostringstream lb;
        lb << std::setprecision(3) << s.lambda_bar;
        r.push_back(s.lambda_bar > 0.0 ? lb.str() : "own PPP");
        const auto ref = reference_result(s.task, s.algorithm);
        r.push_back(ref ? pm(ref->nll, ref->nll_ci) : "-");
        rows.push_back(std::move(r));
    }
    return align(rows);
}

std::string timing_table(const EvalReport& report) {
    std::vector<std::vector<std::string>> rows{
        {"Task", "Algorithm", "Median (s)", "Mean (s)", "Reference (s)"}};
    for (const auto& s : report.rows) {
        const auto ref = reference_result(s.task, s.algorithm);
        rows.push_back({s.task, s.algorithm, fixed(s.time_median, 4), fixed(s.time_mean, 4),
                        ref ? fixed(ref->seconds) : "-"});
    }
    return align(rows);
}

void write_report(const std::filesystem::path& out_dir, const std::vector<EvalReport>& reports) {
    EvalReport all;
    for (const auto& r : reports) all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    std::filesystem::create_directories(out_dir);
    save_report(out_dir / "summary.csv", all);
    const std::pair<const char*, std::string> tables[] = {
        {"gospa.txt", gospa_table(all)}, {"nll.txt", nll_table(all)}, {"timing.txt", timing_table(all)}};
    for (const auto& [name, text] : tables) {
        std::ofstream f(out_dir / name);
        if (!f) throw ReportError("cannot write " + (out_dir / name).string());
        f << text;
    }
}

}  // namespace mt3::harness
