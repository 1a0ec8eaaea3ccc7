#include <benchmark/benchmark.h>

#include <vector>

#include "tanova/anova.hpp"
#include "tanova/rng.hpp"
#include "tanova/simgen.hpp"
#include "tanova/transport.hpp"

using namespace tanova;

// Serial is the reference implementation; the openmp policy must win on
// multi-core hosts while producing bit-identical results (see test_parallel).

namespace {

std::vector<CovOperator> benchmark_family(Index q, int k_groups) {
    GenModelConfig cfg;
    cfg.dim = q;
    cfg.concentration = 10.0;
    cfg.groups = k_groups;
    std::mt19937_64 rng = rng_stream(90210);
    CovOperator origin = origin_covariance(q, rng);
    return make_barycentric_family(cfg, origin, rng).covs;
}

CurveGroupSet benchmark_curves(Index q, int n_per_group) {
    std::mt19937_64 rng = rng_stream(90211);
    CovOperator pop = origin_covariance(q, rng);
    std::vector<std::string> labels;
    std::vector<Matrix> curves;
    for (int g = 0; g < 3; ++g) {
        labels.push_back("g" + std::to_string(g));
        curves.push_back(sample_gaussian_curves(pop, n_per_group, rng));
    }
    return CurveGroupSet(std::move(labels), std::move(curves));
}

void bm_frechet_mean(benchmark::State& state, Parallel par) {
    const Index q = state.range(0);
    const std::vector<CovOperator> covs = benchmark_family(q, 8);
    DescentConfig cfg;
    cfg.grad_tol = 1e-9;
    for (auto _ : state) {
        TransportResult res = frechet_mean(covs, cfg, par);
        benchmark::DoNotOptimize(res.grad_norm);
    }
    state.counters["q"] = static_cast<double>(q);
}

void bm_permutation_test(benchmark::State& state, Parallel par) {
    const int b = static_cast<int>(state.range(0));
    const CurveGroupSet groups = benchmark_curves(8, 20);
    AnovaConfig cfg;
    cfg.permutations = b;
    cfg.seed = 7;
    for (auto _ : state) {
        AnovaResult res = permutation_test(groups, cfg, par);
        benchmark::DoNotOptimize(res.p_value);
    }
    state.counters["B"] = static_cast<double>(b);
}

}  // namespace

BENCHMARK_CAPTURE(bm_frechet_mean, serial, Parallel::serial)
    ->Arg(16)
    ->Arg(48)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_frechet_mean, openmp, Parallel::openmp)
    ->Arg(16)
    ->Arg(48)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_CAPTURE(bm_permutation_test, serial, Parallel::serial)
    ->Arg(32)
    ->Arg(128)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_permutation_test, openmp, Parallel::openmp)
    ->Arg(32)
    ->Arg(128)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
