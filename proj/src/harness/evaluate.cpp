#include "mt3/harness/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

namespace mt3::harness {

Estimate estimate(const std::vector<double>& values) {
    Estimate e;
    const auto n = static_cast<double>(values.size());
    if (values.empty()) return e;
    for (double v : values) e.mean += v;
    e.mean /= n;
    if (values.size() < 2) return e;
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.ci = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return e;
}

bool AlgorithmSummary::same_scores(const AlgorithmSummary& o) const {
    AlgorithmSummary a = *this;
    a.time_median = o.time_median;
    a.time_mean = o.time_mean;
    return a == o;
}

std::vector<sim::Scenario> evaluation_scenarios(const sim::ScenarioConfig& cfg, std::size_t n, std::uint64_t seed) {
    std::vector<sim::Scenario> out(n);
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) out[i] = sim::sample_scenario(cfg, sim::derive_seed(seed, i));
    return out;
}

namespace {

Decomposition decompose(const std::vector<metrics::MetricRow>& rows) {
    std::vector<double> t, l, f, m;
    for (const auto& r : rows) {
        t.push_back(r.total);
        l.push_back(r.localization);
        f.push_back(r.false_cost);
        m.push_back(r.missed_cost);
    }
    return {estimate(t), estimate(l), estimate(f), estimate(m)};
}

}  // namespace

AlgorithmRun evaluate_tracker(const Tracker& tracker, const std::string& task,
                              const std::vector<sim::Scenario>& scenarios, const sim::FovBounds& fov,
                              const EvalOptions& opt) {
    const std::size_t n = scenarios.size();
    std::vector<TrackerOutput> outputs(n);
    std::vector<std::vector<sim::State>> truths(n);
    std::vector<double> seconds(n);
    std::exception_ptr error;
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            const auto t0 = std::chrono::steady_clock::now();
            outputs[i] = tracker.track(scenarios[i]);
            seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            truths[i] = scenarios[i].truth.final_states(fov);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    AlgorithmRun run;
    auto& s = run.summary;
    s.task = task;
    s.algorithm = tracker.name();
    s.n = n;

    std::vector<metrics::MultiBernoulli> mbs(n);
    bool own_ppp = n > 0;
    for (std::size_t i = 0; i < n; ++i) {
        mbs[i] = outputs[i].bernoullis;
        own_ppp = own_ppp && outputs[i].ppp.has_value();
    }
    const auto cut = metrics::tune_p_cutoff(mbs, truths, opt.gospa, opt.cutoff_grid);
    s.p_cutoff = cut.best_value();
    if (!own_ppp && n > 0) s.lambda_bar = metrics::tune_background_intensity(mbs, truths, fov, opt.intensity_grid).best_value();

    std::vector<metrics::MetricRow> gospa_rows(n), nll_rows(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        gospa_rows[i] =
            metrics::to_row(i, metrics::gospa(metrics::extract_estimates(mbs[i], s.p_cutoff), truths[i], opt.gospa));
        metrics::PmbDensity d{metrics::cap_existence(mbs[i]),
                              own_ppp ? *outputs[i].ppp : metrics::PoissonIntensity::uniform(s.lambda_bar, fov)};
        nll_rows[i] = metrics::to_row(i, metrics::pmb_nll(d, truths[i]));
    }

    std::vector<metrics::MetricRow> finite;
    for (const auto& r : nll_rows) {
        if (std::isfinite(r.total))
            finite.push_back(r);
        else
            ++s.nll_infinite;
    }
    s.gospa = decompose(gospa_rows);
    s.nll = decompose(finite);

    if (n > 0) {
        for (double t : seconds) s.time_mean += t;
        s.time_mean /= static_cast<double>(n);
        std::vector<double> sorted = seconds;
        std::sort(sorted.begin(), sorted.end());
        s.time_median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }

    run.scenarios = std::move(gospa_rows);
    run.scenarios.insert(run.scenarios.end(), nll_rows.begin(), nll_rows.end());
    return run;
}

EvalReport evaluate(const std::vector<const Tracker*>& trackers, const std::string& task,
                    const sim::ScenarioConfig& cfg, std::uint64_t seed, const EvalOptions& opt,
                    std::vector<AlgorithmRun>* runs) {
    const auto scenarios = evaluation_scenarios(cfg, opt.n_scenarios, seed);
    EvalReport report;
    for (const Tracker* t : trackers) {
        auto run = evaluate_tracker(*t, task, scenarios, cfg.fov, opt);
        report.rows.push_back(run.summary);
        if (runs) runs->push_back(std::move(run));
    }
    return report;
}

}  // namespace mt3::harness
