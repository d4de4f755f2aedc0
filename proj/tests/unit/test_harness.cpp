#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "mt3/harness/evaluate.hpp"
#include "mt3/harness/report.hpp"
#include "mt3/harness/trainer.hpp"

using namespace mt3::harness;
namespace fs = std::filesystem;

namespace {

// Small enough that a handful of steps run in well under a second.
TaskSpec small_spec() {
    TaskSpec spec = TaskSpec::preset("toy", true);
    spec.model.d_model = 8;
    spec.model.ffn_hidden = 16;
    spec.model.head_hidden = 8;
    spec.model.contrastive_hidden = 8;
    spec.model.contrastive_dim = 8;
    spec.model.n_encoder = 1;
    spec.model.n_decoder = 1;
    spec.trainer.batch = 2;
    spec.trainer.eval_scenarios = 4;
    spec.trainer.eval_every = 0;
    return spec;
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mt3_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string measurement_digest(const mt3::sim::MeasurementSet& ms) {
    std::ostringstream s;
    s.precision(17);
    for (const auto& m : ms.items) s << m.z[0] << ' ' << m.z[1] << ' ' << m.z[2] << ' ' << m.t << ';';
    return s.str();
}

EvalOptions opts(std::size_t n) {
    EvalOptions o;
    o.n_scenarios = n;
    return o;
}

class RecordingTracker : public Tracker {
public:
    std::string name() const override { return "recorder"; }
    TrackerOutput track(const mt3::sim::Scenario& sc) const override {
        std::lock_guard lock(mu_);
        seen_.push_back(measurement_digest(sc.measurements));
        return {};
    }
    std::vector<std::string> seen() const {
        auto s = seen_;
        std::sort(s.begin(), s.end());
        return s;
    }

private:
    mutable std::mutex mu_;
    mutable std::vector<std::string> seen_;
};

AlgorithmSummary sample_summary(const std::string& task, const std::string& algo, double base) {
    AlgorithmSummary s;
    s.task = task;
    s.algorithm = algo;
    s.n = 1000;
    s.gospa = {{base, 0.1}, {base / 3, 0.01}, {0.1 / 3, 0.001}, {base / 7, 0.2}};
    s.nll = {{base * 2, 0.3}, {1.0 / 3.0, 0.05}, {0.0, 0.0}, {std::numbers::pi, 1e-17}};
    s.nll_infinite = 3;
    s.p_cutoff = 0.7;
    s.lambda_bar = 1.2345678901234567e-7;
    s.time_median = 0.0123;
    s.time_mean = 0.0151;
    return s;
}

}  // namespace

TEST(TaskSpec, PresetsValidate) {
    for (const std::string t : {"1", "2", "3", "4", "toy"}) {
        EXPECT_NO_THROW(TaskSpec::preset(t).validate());
        const auto toy = TaskSpec::preset(t, true);
        EXPECT_NO_THROW(toy.validate());
        EXPECT_EQ(toy.model.d_model, 32u);
        EXPECT_EQ(toy.model.k, 8u);
        EXPECT_EQ(toy.trainer.batch, 32u);
        EXPECT_EQ(toy.trainer.lr, 5e-5);
        EXPECT_EQ(toy.trainer.patience, 50000);
        EXPECT_EQ(toy.trainer.lr_divisor, 4.0);
    }
}

TEST(TaskSpec, RejectsBadSettings) {
    auto spec = small_spec();
    spec.trainer.batch = 0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.trainer.lr = 0.0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.model.window = 3;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.beta = -1.0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Train, ZeroStepsReturnsInitialModel) {
    const auto spec = small_spec();
    const auto dir = scratch_dir("zero");
    const auto a = train(spec, 7, dir);
    const auto b = train(spec, 7);
    EXPECT_TRUE(a.losses.empty());
    EXPECT_TRUE(a.curve.empty());
    EXPECT_FALSE(a.best.has_value());
    EXPECT_TRUE(a.model.params() == b.model.params());
    EXPECT_FALSE(a.model.params() == train(spec, 8).model.params());
    EXPECT_TRUE(mt3::model::Mt3v2::load(dir / "final").params() == a.model.params());
    fs::remove_all(dir);
}

TEST(Train, TrainingScenariosRespectK) {
    auto spec = small_spec();
    spec.model.k = 2;
    for (std::size_t slot = 0; slot < 200; ++slot) {
        const auto sc = training_scenario(spec, 3, 1, slot);
        EXPECT_LE(sc.truth.final_states(spec.scenario.fov).size(), 2u);
    }
    // Same coordinates give the same draw.
    EXPECT_EQ(measurement_digest(training_scenario(spec, 3, 5, 1).measurements),
              measurement_digest(training_scenario(spec, 3, 5, 1).measurements));
    EXPECT_NE(measurement_digest(training_scenario(spec, 3, 5, 1).measurements),
              measurement_digest(training_scenario(spec, 3, 5, 2).measurements));
}

TEST(Train, IdenticalSeedsGiveIdenticalLosses) {
    auto spec = small_spec();
    spec.trainer.max_steps = 5;
    spec.trainer.lr = 1e-3;
    const auto a = train(spec, 11);
    const auto b = train(spec, 11);
    ASSERT_EQ(a.losses.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.losses[i].loss, b.losses[i].loss) << i;
    EXPECT_TRUE(a.model.params() == b.model.params());
    const auto c = train(spec, 12);
    EXPECT_NE(a.losses[0].loss, c.losses[0].loss);
}

TEST(Train, LossesDecreaseOnAverage) {
    auto spec = small_spec();
    spec.trainer.max_steps = 60;
    spec.trainer.batch = 4;
    spec.trainer.lr = 3e-3;
    const auto r = train(spec, 5);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) {
        first += r.losses[i].loss;
        last += r.losses[r.losses.size() - 1 - i].loss;
    }
    EXPECT_LT(last, first);
}

TEST(Train, PlateauDividesLearningRate) {
    auto spec = small_spec();
    spec.trainer.max_steps = 12;
    spec.trainer.patience = 1;
    const auto r = train(spec, 2);
    double lr = spec.trainer.lr;
    int drops = 0;
    for (const auto& s : r.losses) {
        if (s.lr != lr) {
            EXPECT_EQ(s.lr, lr / 4.0);
            lr = s.lr;
            ++drops;
        }
    }
    EXPECT_GT(drops, 0);
}

TEST(Train, NonFiniteLossAborts) {
    auto spec = small_spec();
    spec.trainer.max_steps = 5;
    spec.trainer.lr = 1e300;
    try {
        train(spec, 1);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("step"), std::string::npos);
        EXPECT_NE(msg.find("seed"), std::string::npos);
    }
}

TEST(Train, CurveAndCheckpointsReproduce) {
    auto spec = small_spec();
    spec.trainer.max_steps = 4;
    spec.trainer.eval_every = 2;
    spec.trainer.checkpoint_every = 2;
    spec.trainer.lr = 1e-3;
    const auto dir = scratch_dir("curve");
    const auto r = train(spec, 9, dir);
    ASSERT_EQ(r.curve.size(), 3u);
    EXPECT_EQ(r.curve[0].step, 0);
    EXPECT_EQ(r.curve[1].step, 2);
    EXPECT_EQ(r.curve[2].step, 4);
    for (const char* f : {"losses.csv", "curve.csv", "final/manifest.txt", "best/manifest.txt",
                          "step_2/manifest.txt", "step_4/manifest.txt"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;

    const auto final_model = mt3::model::Mt3v2::load(dir / "final");
    const auto held = heldout_scenarios(spec, 9);
    EXPECT_EQ(heldout_gospa(final_model, held, spec.scenario.fov).gospa, r.curve.back().gospa);

    ASSERT_TRUE(r.best.has_value());
    double best = INFINITY;
    for (const auto& c : r.curve) best = std::min(best, c.gospa);
    EXPECT_EQ(heldout_gospa(*r.best, held, spec.scenario.fov).gospa, best);
    fs::remove_all(dir);
}

TEST(Estimate, HalfwidthFormula) {
    const auto e = estimate({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.ci, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(estimate({}).mean, 0.0);
    EXPECT_EQ(estimate({5.0}).ci, 0.0);
}

TEST(Estimate, HalfwidthShrinksAsInverseRootN) {
    std::mt19937_64 rng(4);
    std::gamma_distribution<double> g(2.0, 1.5);
    std::vector<double> pool(1600);
    for (auto& v : pool) v = g(rng);
    const std::size_t sizes[] = {100, 400, 1600};
    double mean_ci[3] = {0, 0, 0};
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        std::shuffle(pool.begin(), pool.end(), rng);
        for (int j = 0; j < 3; ++j) mean_ci[j] += estimate({pool.begin(), pool.begin() + sizes[j]}).ci / trials;
    }
    // Averaged over resamples, ci·√N estimates the same 1.96·sd.
    for (int j = 0; j < 2; ++j)
        EXPECT_NEAR(mean_ci[j] * std::sqrt(double(sizes[j])) / (mean_ci[2] * 40.0), 1.0, 0.03) << sizes[j];

    // Tiling a sample leaves sd nearly unchanged, so the ratio is exact up to
    // the N−1 correction.
    std::vector<double> base(pool.begin(), pool.begin() + 100), tiled;
    for (int r = 0; r < 16; ++r) tiled.insert(tiled.end(), base.begin(), base.end());
    EXPECT_NEAR(estimate(tiled).ci / estimate(base).ci, 0.25 * std::sqrt(99.0 * 1600.0 / (100.0 * 1599.0)), 1e-12);
}

TEST(Evaluate, ScenarioStreamIsShared) {
    const auto cfg = mt3::sim::task_config("1");
    RecordingTracker a, b;
    evaluate({&a, &b}, "1", cfg, 21, opts(30));
    EXPECT_EQ(a.seen().size(), 30u);
    EXPECT_EQ(a.seen(), b.seen());
    const auto s1 = evaluation_scenarios(cfg, 10, 21);
    const auto s2 = evaluation_scenarios(cfg, 20, 21);
    for (std::size_t i = 0; i < 10; ++i)
        EXPECT_EQ(measurement_digest(s1[i].measurements), measurement_digest(s2[i].measurements));
}

TEST(Evaluate, OracleTrackerClosedForm) {
    const auto cfg = mt3::sim::task_config("1");
    const OracleTracker oracle(cfg.fov);
    const auto scenarios = evaluation_scenarios(cfg, 60, 5);
    const auto run = evaluate_tracker(oracle, "1", scenarios, cfg.fov);
    const auto& s = run.summary;
    EXPECT_EQ(s.gospa.total.mean, 0.0);
    EXPECT_EQ(s.gospa.total.ci, 0.0);
    EXPECT_EQ(s.nll_infinite, 0u);
    const double lambda = mt3::metrics::default_intensity_grid().front();
    EXPECT_EQ(s.lambda_bar, lambda);

    // log N(x; x, Σ) = −(4 log 2π + log det Σ) / 2.
    const Eigen::Matrix4d cov = OracleTracker::default_cov();
    const double log_peak = -0.5 * (4.0 * std::log(2.0 * std::numbers::pi) + std::log(cov.determinant()));
    const double volume = mt3::sim::fov_volume(cfg.fov);
    std::size_t checked = 0;
    for (const auto& row : run.scenarios) {
        if (row.metric != "nll") continue;
        const auto m = scenarios[row.scenario_id].truth.final_states(cfg.fov).size();
        const double expected = lambda * volume + static_cast<double>(m) * (-std::log(0.99) - log_peak);
        EXPECT_NEAR(row.total, expected, 1e-9 * (1.0 + std::abs(expected)));
        ++checked;
    }
    EXPECT_EQ(checked, 60u);
}

TEST(Evaluate, SameAlgorithmTwiceGivesIdenticalRows) {
    const auto cfg = mt3::sim::task_config("toy");
    const PmbmTracker pmbm(mt3::pmbm::pmbm_config(cfg));
    const auto report = evaluate({&pmbm, &pmbm}, "toy", cfg, 3, opts(20));
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_TRUE(report.rows[0].same_scores(report.rows[1]));
    EXPECT_EQ(report.rows[0].lambda_bar, 0.0);
    EXPECT_TRUE(std::isfinite(report.rows[0].nll.total.mean));
    EXPECT_GT(report.rows[0].time_mean, 0.0);
    EXPECT_LE(report.rows[0].gospa.total.mean, 6.0);
}

TEST(Evaluate, Mt3v2TrackerRunsFromCheckpoint) {
    const auto spec = small_spec();
    const auto dir = scratch_dir("ckpt");
    train(spec, 1, dir);
    const auto tracker = make_tracker("mt3v2", spec.scenario, dir / "final");
    const auto report = evaluate({tracker.get()}, "toy", spec.scenario, 1, opts(10));
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_GT(report.rows[0].lambda_bar, 0.0);
    EXPECT_TRUE(std::isfinite(report.rows[0].gospa.total.mean));
    EXPECT_THROW(make_tracker("mt3v2", spec.scenario), std::invalid_argument);
    EXPECT_THROW(make_tracker("glmb", spec.scenario), std::invalid_argument);
    fs::remove_all(dir);
}

TEST(Report, CsvRoundTrip) {
    EvalReport r;
    r.rows.push_back(sample_summary("1", "pmbm", 3.4412));
    r.rows.push_back(sample_summary("toy", "mt3v2-best", 0.1 + 0.2));
    r.rows[1].nll.total.mean = INFINITY;
    std::stringstream ss;
    write_summary_csv(ss, r);
    EXPECT_EQ(read_summary_csv(ss), r);
}

TEST(Report, RejectsMalformedCsv) {
    std::stringstream bad_header("task,algo\n");
    EXPECT_THROW(read_summary_csv(bad_header), ReportError);
    EvalReport r;
    r.rows.push_back(sample_summary("1", "pmbm", 1.0));
    std::stringstream ss;
    write_summary_csv(ss, r);
    std::string text = ss.str();
    text.replace(text.find(",1000,"), 6, ",x,");
    std::stringstream corrupt(text);
    EXPECT_THROW(read_summary_csv(corrupt), ReportError);
    r.rows[0].algorithm = "a,b";
    std::stringstream out;
    EXPECT_THROW(write_summary_csv(out, r), ReportError);
}

TEST(Report, EmptyInputGivesHeaderOnlyFiles) {
    const auto dir = scratch_dir("empty");
    write_report(dir, {});
    EXPECT_TRUE(load_report(dir / "summary.csv").rows.empty());
    for (const char* f : {"gospa.txt", "nll.txt", "timing.txt"}) {
        std::ifstream in(dir / f);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) ++lines;
        EXPECT_EQ(lines, 2) << f;  // header and rule
    }
    fs::remove_all(dir);
}

TEST(Report, OneRowPerAlgorithmAndTask) {
    EvalReport r;
    r.rows.push_back(sample_summary("1", "mt3v2", 3.0));
    const auto dir = scratch_dir("one");
    write_report(dir, {r});
    EXPECT_EQ(load_report(dir / "summary.csv"), r);
    std::ifstream in(dir / "gospa.txt");
    std::string header, rule, row, extra;
    std::getline(in, header);
    std::getline(in, rule);
    std::getline(in, row);
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_NE(header.find("Localization"), std::string::npos);
    EXPECT_NE(row.find("3.00 ± 0.10"), std::string::npos);
    EXPECT_NE(row.find("3.46 ± 0.18"), std::string::npos);  // reference band
    fs::remove_all(dir);
}

TEST(Report, ReferenceValues) {
    const auto r = reference_result("4", "pmbm");
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->gospa, 26.72);
    EXPECT_EQ(r->nll, 55.21);
    EXPECT_EQ(r->seconds, 310.14);
    EXPECT_EQ(reference_result("2", "mt3v2-final")->gospa, 17.03);
    EXPECT_FALSE(reference_result("toy", "pmbm").has_value());
}
