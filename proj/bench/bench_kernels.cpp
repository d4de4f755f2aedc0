// Parallel kernels against their serial reference loops, plus end-to-end
// per-sample training and inference cost.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mt3/autodiff/kernels.hpp"
#include "mt3/harness/trainer.hpp"
#include "mt3/losses/losses.hpp"
#include "mt3/pmbm/pmbm.hpp"

using namespace mt3;
namespace k = mt3::ad::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

template <bool Serial>
void BM_Gemm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto ta = state.range(1) ? k::Trans::Yes : k::Trans::No;
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        if constexpr (Serial)
            k::serial::gemm(ta, k::Trans::No, n, n, n, a.data(), b.data(), c.data());
        else
            k::gemm(ta, k::Trans::No, n, n, n, a.data(), b.data(), c.data());
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOP/s"] =
        benchmark::Counter(2.0 * n * n * n, benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK_TEMPLATE(BM_Gemm, true)->ArgsProduct({{32, 128, 256}, {0, 1}});
BENCHMARK_TEMPLATE(BM_Gemm, false)->ArgsProduct({{32, 128, 256}, {0, 1}});

template <bool Serial>
void BM_Softmax(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto in = random_vec(n * n, 3);
    std::vector<double> out(n * n);
    for (auto _ : state) {
        if constexpr (Serial)
            k::serial::softmax_columns(n, n, in.data(), out.data());
        else
            k::softmax_columns(n, n, in.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK_TEMPLATE(BM_Softmax, true)->Arg(128)->Arg(512);
BENCHMARK_TEMPLATE(BM_Softmax, false)->Arg(128)->Arg(512);

template <bool Serial>
void BM_LayerNorm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto in = random_vec(n * n, 4);
    std::vector<double> out(n * n), inv(n);
    for (auto _ : state) {
        if constexpr (Serial)
            k::serial::layer_norm_columns(n, n, in.data(), 1e-5, out.data(), inv.data());
        else
            k::layer_norm_columns(n, n, in.data(), 1e-5, out.data(), inv.data());
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK_TEMPLATE(BM_LayerNorm, true)->Arg(128)->Arg(512);
BENCHMARK_TEMPLATE(BM_LayerNorm, false)->Arg(128)->Arg(512);

// Forward + backward of the toy network on one toy scenario.
void BM_ToyTrainingSample(benchmark::State& state) {
    const auto spec = harness::TaskSpec::preset("toy", true);
    const model::Mt3v2 net(spec.model, 1);
    const auto sc = harness::training_scenario(spec, 1, 1, 0);
    const auto truth = sc.truth.final_states(spec.scenario.fov);
    for (auto _ : state) {
        ad::Tape tape;
        const auto p = net.params().bind(tape, true);
        const auto out = net.forward(p, sc.measurements);
        const auto u = net.contrastive_embeddings(p, out.embeddings);
        const auto loss = losses::training_loss(out.layers, truth, u, out.input.labels, spec.beta);
        tape.backward(loss.total);
        benchmark::DoNotOptimize(loss.total.item());
    }
}
BENCHMARK(BM_ToyTrainingSample)->Unit(benchmark::kMillisecond);

void BM_PmbmToyScenario(benchmark::State& state) {
    const auto cfg = sim::task_config("toy");
    const pmbm::PmbmFilter filter(pmbm::pmbm_config(cfg));
    const auto sc = sim::sample_scenario(cfg, 5);
    for (auto _ : state) benchmark::DoNotOptimize(filter.run(sc.measurements).globals.size());
}
BENCHMARK(BM_PmbmToyScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
