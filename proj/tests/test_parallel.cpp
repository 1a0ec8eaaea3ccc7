#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

#include "tanova/anova.hpp"
#include "tanova/rng.hpp"
#include "tanova/simgen.hpp"
#include "tanova/transport.hpp"
#include "support.hpp"

using namespace tanova;
using namespace tanova::testing;

// The threaded paths write each replicate/map into its own preassigned slot
// and reduce in fixed index order, so they must agree with the serial path
// bit for bit, not merely within tolerance.

namespace {

bool same_bits(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

CurveGroupSet simulated_groups(std::uint64_t seed, Index q, int n_per_group) {
    std::mt19937_64 rng = rng_stream(seed);
    CovOperator pop = origin_covariance(q, rng);
    std::vector<Matrix> curves;
    std::vector<std::string> labels;
    for (int g = 0; g < 3; ++g) {
        curves.push_back(sample_gaussian_curves(pop, n_per_group, rng));
        labels.push_back("g" + std::to_string(g));
    }
    return CurveGroupSet(std::move(labels), std::move(curves));
}

}  // namespace

TEST_CASE("frechet_mean is bit-identical across execution policies") {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    std::mt19937_64 rng = rng_stream(8001);
    std::vector<CovOperator> covs;
    for (int j = 0; j < 5; ++j) covs.push_back(CovOperator(random_spd(9, rng)));

    TransportResult serial = frechet_mean(covs, {}, Parallel::serial);
    TransportResult threaded = frechet_mean(covs, {}, Parallel::openmp);

    CHECK(serial.iterations == threaded.iterations);
    CHECK(serial.converged == threaded.converged);
    CHECK(serial.grad_norm == threaded.grad_norm);
    CHECK(same_bits(serial.mean.mat(), threaded.mean.mat()));
    REQUIRE(serial.maps.size() == threaded.maps.size());
    for (size_t j = 0; j < serial.maps.size(); ++j) {
        CHECK(same_bits(serial.maps[j].mat(), threaded.maps[j].mat()));
        CHECK(same_bits(serial.deviations[j].mat(), threaded.deviations[j].mat()));
    }
    REQUIRE(serial.functional_trace.size() == threaded.functional_trace.size());
    for (size_t i = 0; i < serial.functional_trace.size(); ++i) {
        CHECK(serial.functional_trace[i] == threaded.functional_trace[i]);
    }
}

TEST_CASE("permutation_test is bit-identical across execution policies") {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    CurveGroupSet groups = simulated_groups(8002, 6, 10);
    AnovaConfig cfg;
    cfg.permutations = 64;
    cfg.seed = 17;

    AnovaResult serial = permutation_test(groups, cfg, Parallel::serial);
    AnovaResult threaded = permutation_test(groups, cfg, Parallel::openmp);

    CHECK(serial.statistic == threaded.statistic);
    CHECK(serial.p_value == threaded.p_value);
    CHECK(serial.converged_fraction == threaded.converged_fraction);
    REQUIRE(serial.perm_statistics.size() == threaded.perm_statistics.size());
    for (size_t b = 0; b < serial.perm_statistics.size(); ++b) {
        CHECK(serial.perm_statistics[b] == threaded.perm_statistics[b]);
    }
}

TEST_CASE("baseline_sqrt_test is bit-identical across execution policies") {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    CurveGroupSet groups = simulated_groups(8003, 5, 8);
    AnovaConfig cfg;
    cfg.permutations = 32;
    cfg.seed = 4;

    AnovaResult serial = baseline_sqrt_test(groups, cfg, Parallel::serial);
    AnovaResult threaded = baseline_sqrt_test(groups, cfg, Parallel::openmp);

    CHECK(serial.statistic == threaded.statistic);
    CHECK(serial.p_value == threaded.p_value);
    for (size_t b = 0; b < serial.perm_statistics.size(); ++b) {
        CHECK(serial.perm_statistics[b] == threaded.perm_statistics[b]);
    }
}

TEST_CASE("thread count does not leak into results") {
#ifdef _OPENMP
    CurveGroupSet groups = simulated_groups(8004, 5, 8);
    AnovaConfig cfg;
    cfg.permutations = 32;
    cfg.seed = 11;

    omp_set_num_threads(1);
    AnovaResult one = permutation_test(groups, cfg, Parallel::openmp);
    omp_set_num_threads(3);
    AnovaResult three = permutation_test(groups, cfg, Parallel::openmp);

    CHECK(one.statistic == three.statistic);
    CHECK(one.p_value == three.p_value);
    for (size_t b = 0; b < one.perm_statistics.size(); ++b) {
        CHECK(one.perm_statistics[b] == three.perm_statistics[b]);
    }
#endif
}
