// mt3: scenario generation, training, evaluation and reporting.
//
//   mt3 generate --task 1 --n 100 --seed 0 --out data/
//   mt3 train    --task toy --seed 0 --out runs/toy --toy-dims --steps 20000
//   mt3 evaluate --task toy --algos mt3v2,pmbm --checkpoint runs/toy --n 1000 --seed 1 --out eval/
//   mt3 report   --in eval/ --out tables/
//
// MT3_NUM_THREADS sets the OpenMP thread count (1 gives the reproducible
// single-threaded mode).

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mt3/harness/evaluate.hpp"
#include "mt3/harness/report.hpp"
#include "mt3/harness/trainer.hpp"
#include "mt3/sim/dataset_io.hpp"

namespace fs = std::filesystem;
using namespace mt3;

namespace {

void apply_thread_env() {
    if (const char* v = std::getenv("MT3_NUM_THREADS")) {
        const int n = std::atoi(v);
        if (n < 1) throw std::invalid_argument("MT3_NUM_THREADS must be a positive integer");
        omp_set_num_threads(n);
    }
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// A training directory holds final/ and best/; evaluate both. Anything else is
// taken to be a single checkpoint.
std::vector<std::pair<std::string, fs::path>> checkpoints(const fs::path& p) {
    if (fs::exists(p / "manifest.txt")) return {{"mt3v2", p}};
    std::vector<std::pair<std::string, fs::path>> out;
    for (const char* name : {"final", "best"})
        if (fs::exists(p / name / "manifest.txt")) out.emplace_back(std::string("mt3v2-") + name, p / name);
    if (out.empty()) throw std::runtime_error("no checkpoint found at " + p.string());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MT3v2 and PMBM multi-object tracking benchmark"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Sample scenarios and write them as a dataset");
    std::string g_task = "1", g_out;
    std::size_t g_n = 100;
    std::uint64_t g_seed = 0;
    gen->add_option("--task", g_task, "Task preset (1-4, toy) or config file");
    gen->add_option("--n", g_n, "Number of scenarios");
    gen->add_option("--seed", g_seed);
    gen->add_option("--out", g_out)->required();

    auto* tr = app.add_subcommand("train", "Train MT3v2 on freshly generated data");
    std::string t_task = "1", t_out;
    std::uint64_t t_seed = 0;
    bool t_toy = false, t_quiet = false;
    std::int64_t t_steps = -1, t_eval_every = -1, t_ckpt_every = -1;
    std::size_t t_batch = 0, t_eval_n = 0;
    std::int64_t t_patience = 0;
    double t_lr = 0.0;
    tr->add_option("--task", t_task);
    tr->add_option("--seed", t_seed);
    tr->add_option("--out", t_out)->required();
    tr->add_flag("--toy-dims", t_toy, "Reduced network: d'=32, N=M=2, 2 heads, k=8");
    tr->add_option("--steps", t_steps, "Optimizer steps (default 0)");
    tr->add_option("--batch", t_batch);
    tr->add_option("--lr", t_lr, "Initial learning rate");
    tr->add_option("--patience", t_patience, "Steps without a new best loss before the lr is divided");
    tr->add_option("--eval-every", t_eval_every, "Held-out GOSPA interval in steps");
    tr->add_option("--eval-scenarios", t_eval_n);
    tr->add_option("--checkpoint-every", t_ckpt_every);
    tr->add_flag("--quiet", t_quiet);

    auto* ev = app.add_subcommand("evaluate", "Score trackers on a shared scenario stream");
    std::string e_task = "1", e_algos = "mt3v2,pmbm", e_ckpt, e_out = ".";
    std::size_t e_n = 1000;
    std::uint64_t e_seed = 0;
    ev->add_option("--task", e_task);
    ev->add_option("--algos", e_algos, "Comma-separated: mt3v2, pmbm, oracle");
    ev->add_option("--checkpoint", e_ckpt, "Checkpoint directory, or a training directory (final and best)");
    ev->add_option("--n", e_n);
    ev->add_option("--seed", e_seed);
    ev->add_option("--out", e_out, "Directory for eval_<task>.csv and per-scenario rows");

    auto* rep = app.add_subcommand("report", "Collect eval_*.csv files into tables");
    std::string r_in, r_out;
    rep->add_option("--in", r_in)->required();
    rep->add_option("--out", r_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        apply_thread_env();

        if (*gen) {
            const auto cfg = fs::exists(g_task) ? sim::load_config(g_task) : sim::task_config(g_task);
            sim::save_dataset(g_out, harness::evaluation_scenarios(cfg, g_n, g_seed), cfg);
            std::cout << "wrote " << g_n << " scenarios to " << g_out << '\n';
        }

        if (*tr) {
            auto spec = harness::TaskSpec::preset(t_task, t_toy);
            auto& tc = spec.trainer;
            if (t_steps >= 0) tc.max_steps = t_steps;
            if (t_batch > 0) tc.batch = t_batch;
            if (t_lr > 0.0) tc.lr = t_lr;
            if (t_patience > 0) tc.patience = t_patience;
            if (t_eval_every >= 0) tc.eval_every = t_eval_every;
            if (t_eval_n > 0) tc.eval_scenarios = t_eval_n;
            if (t_ckpt_every >= 0) tc.checkpoint_every = t_ckpt_every;

            harness::TrainHooks hooks;
            if (!t_quiet) {
                hooks.on_step = [&](const harness::StepRecord& s) {
                    if (s.step % 100 == 0) std::cout << "step " << s.step << " loss " << s.loss << " lr " << s.lr << std::endl;
                };
                hooks.on_eval = [](const harness::CurvePoint& c) {
                    std::cout << "eval step " << c.step << " gospa " << c.gospa << " p_cutoff " << c.p_cutoff
                              << std::endl;
                };
            }
            const auto r = harness::train(spec, t_seed, fs::path(t_out), hooks);
            std::cout << "trained " << r.losses.size() << " steps; checkpoints in " << t_out << '\n';
        }

        if (*ev) {
            const auto cfg = sim::task_config(e_task);
            std::vector<std::unique_ptr<harness::Tracker>> owned;
            for (const auto& a : split(e_algos)) {
                if (a == "mt3v2") {
                    if (e_ckpt.empty()) throw std::invalid_argument("--checkpoint is required for mt3v2");
                    for (const auto& [label, dir] : checkpoints(e_ckpt))
                        owned.push_back(std::make_unique<harness::Mt3v2Tracker>(model::Mt3v2::load(dir), label));
                } else {
                    owned.push_back(harness::make_tracker(a, cfg));
                }
            }
            std::vector<const harness::Tracker*> trackers;
            for (const auto& t : owned) trackers.push_back(t.get());

            harness::EvalOptions opt;
            opt.n_scenarios = e_n;
            std::vector<harness::AlgorithmRun> runs;
            const auto report = harness::evaluate(trackers, e_task, cfg, e_seed, opt, &runs);

            fs::create_directories(e_out);
            harness::save_report(fs::path(e_out) / ("eval_" + e_task + ".csv"), report);
            for (const auto& run : runs) {
                std::ofstream f(fs::path(e_out) / ("scores_" + e_task + "_" + run.summary.algorithm + ".csv"));
                metrics::write_rows(f, run.scenarios);
            }
            std::cout << harness::gospa_table(report) << '\n'
                      << harness::nll_table(report) << '\n'
                      << harness::timing_table(report);
        }

        if (*rep) {
            std::vector<fs::path> files;
            if (fs::is_directory(r_in))
                for (const auto& e : fs::directory_iterator(r_in)) {
                    const auto name = e.path().filename().string();
                    if (name.starts_with("eval_") && name.ends_with(".csv")) files.push_back(e.path());
                }
            std::sort(files.begin(), files.end());
            std::vector<harness::EvalReport> reports;
            for (const auto& f : files) reports.push_back(harness::load_report(f));
            harness::write_report(r_out, reports);
            std::cout << "collected " << files.size() << " evaluation files into " << r_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "mt3: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
