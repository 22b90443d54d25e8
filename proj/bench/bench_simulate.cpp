// Serial reference vs OpenMP Monte Carlo driver on the same configuration. Both produce
// bitwise-identical estimates; the benchmark measures only throughput.

#include <benchmark/benchmark.h>

#include "fracstorm/kernels.hpp"
#include "fracstorm/simulate.hpp"

namespace {

using namespace fracstorm;

struct Setup {
    ModelParams params;
    EigenSystem es;
    Eigen::VectorXd u0;
    SimConfig config;

    explicit Setup(int replicates) {
        params.alpha = 2.0;
        params.beta = 0.5;
        params.lambda = 1.0;
        config.nx = 48;
        config.nt = 64;
        config.T = 0.25;
        config.replicates = replicates;
        config.seed = 7;
        es = make_eigen_system(params.alpha, params.nu, SpaceGrid(params.R, config.nx));
        u0 = Eigen::VectorXd::Ones(config.nx);
    }
};

void BM_SimulateSerial(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto est = simulate_mild_serial(s.params, s.es, s.u0, s.config);
        benchmark::DoNotOptimize(est.mean.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateOpenMP(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto est = simulate_mild(s.params, s.es, s.u0, s.config);
        benchmark::DoNotOptimize(est.mean.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SimulateSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateOpenMP)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
