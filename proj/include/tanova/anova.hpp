#pragma once

#include <cstdint>
#include <vector>

#include "tanova/curves.hpp"
#include "tanova/transport.hpp"

namespace tanova {

enum class CovCenter { group_mean, none };
enum class CovDenominator { n, n_minus_1 };

// How per-group deviation norms are pooled into one statistic.  `sum` is the
// canonical statistic; `max` is an extension point calibrated by the same
// permutation scheme.
enum class Combine { sum, max };

struct AnovaConfig {
    MatNorm norm = MatNorm::hs;
    int permutations = 200;
    std::uint64_t seed = 0;
    DescentConfig descent{};
    CovDenominator denominator = CovDenominator::n_minus_1;
    CovCenter center = CovCenter::group_mean;
    Combine combine = Combine::sum;
};

struct AnovaResult {
    double statistic = 0.0;
    std::vector<double> perm_statistics;
    double p_value = 1.0;
    std::vector<int> group_sizes;
    MatNorm norm = MatNorm::hs;
    // Fraction of permutation replicates whose descent converged; replicates
    // that stop at the iteration cap still contribute their statistic.
    double converged_fraction = 1.0;
    bool observed_converged = true;
    int observed_iterations = 0;
};

// Sum of squared deviation norms, sum_j ||Delta_j||_r^2.
double test_statistic(const std::vector<SymMatrix>& deviations, MatNorm norm);

// Empirical covariance of the rows of `curves` (n x q), centered and scaled
// per the config.
CovOperator empirical_covariance(const Matrix& curves, const AnovaConfig& cfg = {});

// p = (1 + #{T*_b >= T_obs}) / (B + 1); ties count toward rejection.
double permutation_p_value(double observed, const std::vector<double>& perm_stats);

AnovaResult permutation_test(const CurveGroupSet& groups, const AnovaConfig& cfg,
                             Parallel par = Parallel::openmp);

// Square-root-metric baseline: the statistic is the largest pairwise
// Hilbert-Schmidt distance between group covariance square roots, calibrated
// by the same permutation scheme and seeds as permutation_test.
AnovaResult baseline_sqrt_test(const CurveGroupSet& groups, const AnovaConfig& cfg,
                               Parallel par = Parallel::openmp);

}  // namespace tanova
