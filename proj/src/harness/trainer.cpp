#include "mt3/harness/trainer.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mt3/autodiff/adam.hpp"
#include "mt3/losses/losses.hpp"
#include "mt3/metrics/tuning.hpp"

namespace mt3::harness {

namespace {

// Stream tags keep the derived seeds of different consumers apart.
constexpr std::uint64_t kInitTag = 0x1a17;
constexpr std::uint64_t kDropoutTag = 0xd20b;
constexpr std::uint64_t kHeldoutTag = 0x4e1d;

struct SampleResult {
    double loss = 0.0;
    ad::Gradients grads;
};

SampleResult sample_gradient(const model::Mt3v2& m, const TaskSpec& spec, const sim::Scenario& sc,
                             std::uint64_t dropout_seed) {
    ad::Tape tape;
    const auto bound = m.params().bind(tape, true);
    nn::Rng rng(dropout_seed);
    model::ForwardOptions opt;
    opt.train = true;
    opt.rng = &rng;
    const auto out = m.forward(bound, sc.measurements, opt);
    const auto u = m.contrastive_embeddings(bound, out.embeddings);
    const auto loss =
        losses::training_loss(out.layers, sc.truth.final_states(spec.scenario.fov), u, out.input.labels, spec.beta);
    tape.backward(loss.total);
    return {loss.total.item(), ad::collect_gradients(bound)};
}

void write_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
    std::ofstream f(path);
    f << "step,gospa,p_cutoff\n" << std::setprecision(17);
    for (const auto& c : curve) f << c.step << ',' << c.gospa << ',' << c.p_cutoff << '\n';
}

}  // namespace

sim::Scenario training_scenario(const TaskSpec& spec, std::uint64_t seed, std::int64_t step, std::size_t slot) {
    const std::uint64_t base = sim::derive_seed(seed, static_cast<std::uint64_t>(step), slot);
    for (int attempt = 0; attempt < spec.trainer.max_resamples; ++attempt) {
        auto sc = sim::sample_scenario(spec.scenario, attempt == 0 ? base : sim::derive_seed(base, attempt));
        if (sc.truth.final_states(spec.scenario.fov).size() <= spec.model.k) return sc;
    }
    throw TrainingError("training_scenario: no draw with at most k objects (step " + std::to_string(step) +
                        ", slot " + std::to_string(slot) + ")");
}

std::vector<sim::Scenario> heldout_scenarios(const TaskSpec& spec, std::uint64_t seed) {
    std::vector<sim::Scenario> out;
    const std::uint64_t base = sim::derive_seed(seed, kHeldoutTag);
    for (std::size_t i = 0; i < spec.trainer.eval_scenarios; ++i)
        out.push_back(sim::sample_scenario(spec.scenario, sim::derive_seed(base, i)));
    return out;
}

HeldoutScore heldout_gospa(const model::Mt3v2& m, const std::vector<sim::Scenario>& scenarios,
                           const sim::FovBounds& fov) {
    std::vector<metrics::MultiBernoulli> preds(scenarios.size());
    std::vector<std::vector<sim::State>> truths(scenarios.size());
    const auto n = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        preds[i] = m.predict(scenarios[i].measurements);
        truths[i] = scenarios[i].truth.final_states(fov);
    }
    const auto r = metrics::tune_p_cutoff(preds, truths);
    return {r.mean[r.best], r.best_value()};
}

TrainResult train(const TaskSpec& spec, std::uint64_t seed, const std::optional<std::filesystem::path>& out,
                  const TrainHooks& hooks) {
    spec.validate();
    const auto& tc = spec.trainer;
    TrainResult result{model::Mt3v2(spec.model, sim::derive_seed(seed, kInitTag)), {}, {}, std::nullopt};
    auto& net = result.model;

    std::ofstream loss_log;
    if (out) {
        std::filesystem::create_directories(*out);
        loss_log.open(*out / "losses.csv");
        loss_log << "step,loss,lr\n" << std::setprecision(17);
    }
    auto meta = [&](std::int64_t step, double lr) {
        return ad::Metadata{{"task", spec.task},
                            {"seed", std::to_string(seed)},
                            {"step", std::to_string(step)},
                            {"lr", (std::ostringstream() << std::setprecision(17) << lr).str()},
                            {"beta", (std::ostringstream() << std::setprecision(17) << spec.beta).str()}};
    };

    std::vector<sim::Scenario> heldout;
    double best_gospa = INFINITY;
    auto evaluate_now = [&](std::int64_t step) {
        if (heldout.empty()) heldout = heldout_scenarios(spec, seed);
        const auto s = heldout_gospa(net, heldout, spec.scenario.fov);
        const CurvePoint p{step, s.gospa, s.p_cutoff};
        result.curve.push_back(p);
        if (s.gospa < best_gospa) {
            best_gospa = s.gospa;
            result.best = net;
            if (out) net.save(*out / "best", meta(step, 0.0));
        }
        if (out) write_curve(*out / "curve.csv", result.curve);
        if (hooks.on_eval) hooks.on_eval(p);
    };

    ad::AdamConfig adam;
    adam.lr = tc.lr;
    ad::AdamState state;
    double best_loss = INFINITY;
    std::int64_t since_best = 0;

    if (tc.max_steps > 0 && tc.eval_every > 0) evaluate_now(0);

    std::vector<SampleResult> samples(tc.batch);
    for (std::int64_t step = 1; step <= tc.max_steps; ++step) {
        std::exception_ptr error;
        const auto batch = static_cast<long>(tc.batch);
#pragma omp parallel for schedule(dynamic)
        for (long b = 0; b < batch; ++b) {
            try {
                const auto sc = training_scenario(spec, seed, step, static_cast<std::size_t>(b));
                samples[b] = sample_gradient(net, spec, sc,
                                             sim::derive_seed(seed ^ kDropoutTag, static_cast<std::uint64_t>(step), b));
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);

        // Fixed summation order keeps results independent of thread count.
        double loss = 0.0;
        ad::Gradients grads = ad::zero_gradients(net.params());
        for (std::size_t b = 0; b < tc.batch; ++b) {
            if (!std::isfinite(samples[b].loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at step " << step << ", slot " << b << ", scenario seed "
                    << sim::derive_seed(seed, static_cast<std::uint64_t>(step), b);
                throw TrainingError(msg.str());
            }
            loss += samples[b].loss;
            ad::accumulate(grads, samples[b].grads);
        }
        loss /= static_cast<double>(tc.batch);
        ad::scale_gradients(grads, 1.0 / static_cast<double>(tc.batch));
        ad::adam_step(net.params(), grads, state, adam);

        const StepRecord rec{step, loss, adam.lr};
        result.losses.push_back(rec);
        if (loss_log) loss_log << step << ',' << loss << ',' << adam.lr << '\n';
        if (hooks.on_step) hooks.on_step(rec);

        if (loss < best_loss) {
            best_loss = loss;
            since_best = 0;
        } else if (++since_best >= tc.patience) {
            adam.lr /= tc.lr_divisor;
            since_best = 0;
        }

        if (tc.eval_every > 0 && (step % tc.eval_every == 0 || step == tc.max_steps)) evaluate_now(step);
        if (out && tc.checkpoint_every > 0 && step % tc.checkpoint_every == 0)
            net.save(*out / ("step_" + std::to_string(step)), meta(step, adam.lr));
    }
    if (out) net.save(*out / "final", meta(tc.max_steps, adam.lr));
    return result;
}

}  // namespace mt3::harness
