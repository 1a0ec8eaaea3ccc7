#include "tanova/anova.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "tanova/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tanova {

namespace {

double combine_norms(const std::vector<SymMatrix>& deviations, MatNorm which,
                     Combine combine) {
    if (deviations.empty()) {
        throw InvalidInput("no deviation operators");
    }
    double out = 0.0;
    for (const SymMatrix& d : deviations) {
        const double v = norm(d, which);
        if (combine == Combine::sum) {
            out += v * v;
        } else {
            out = std::max(out, v * v);
        }
    }
    return out;
}

std::vector<CovOperator> group_covariances(const std::vector<Matrix>& groups,
                                           const AnovaConfig& cfg) {
    std::vector<CovOperator> covs;
    covs.reserve(groups.size());
    for (const Matrix& g : groups) covs.push_back(empirical_covariance(g, cfg));
    return covs;
}

// Shared implementation of the transport test and the square-root baseline.
// `statistic` maps the group covariances of one (possibly permuted) split to
// a scalar; `converged` reports whether its internals converged.
template <typename StatFn>
AnovaResult run_permutation(const CurveGroupSet& groups, const AnovaConfig& cfg,
                            Parallel par, StatFn statistic) {
    if (groups.n_groups() < 2) {
        throw InvalidInput("permutation test needs at least two groups");
    }
    if (cfg.permutations < 1) {
        throw InvalidInput("permutation count must be at least 1");
    }

    const std::vector<int> sizes = groups.group_sizes();
    const Index n_total = groups.total_curves();
    const Index q = groups.dim();

    Matrix pooled(n_total, q);
    {
        Index row = 0;
        for (const Matrix& g : groups.curves()) {
            pooled.middleRows(row, g.rows()) = g;
            row += g.rows();
        }
    }

    bool observed_converged = true;
    int observed_iterations = 0;
    const double observed = statistic(groups.curves(), par, &observed_converged,
                                      &observed_iterations);

    const int b_count = cfg.permutations;
    std::vector<double> stats(static_cast<size_t>(b_count), 0.0);
    std::vector<char> conv(static_cast<size_t>(b_count), 1);

    std::exception_ptr fail;
    auto replicate = [&](int b) {
        try {
            std::mt19937_64 rng = rng_stream(cfg.seed, static_cast<std::uint64_t>(b) + 1);
            std::vector<Index> idx(static_cast<size_t>(n_total));
            std::iota(idx.begin(), idx.end(), Index{0});
            std::shuffle(idx.begin(), idx.end(), rng);

            std::vector<Matrix> shuffled;
            shuffled.reserve(sizes.size());
            Index cursor = 0;
            for (int nj : sizes) {
                Matrix g(nj, q);
                for (int r = 0; r < nj; ++r) {
                    g.row(r) = pooled.row(idx[static_cast<size_t>(cursor + r)]);
                }
                cursor += nj;
                shuffled.push_back(std::move(g));
            }

            bool ok = true;
            int it = 0;
            stats[static_cast<size_t>(b)] = statistic(shuffled, Parallel::serial, &ok, &it);
            conv[static_cast<size_t>(b)] = ok ? 1 : 0;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(tanova_anova_fail)
#endif
            {
                if (!fail) fail = std::current_exception();
            }
        }
    };

#ifdef _OPENMP
    if (par == Parallel::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int b = 0; b < b_count; ++b) replicate(b);
    } else {
        for (int b = 0; b < b_count; ++b) replicate(b);
    }
#else
    for (int b = 0; b < b_count; ++b) replicate(b);
#endif
    if (fail) std::rethrow_exception(fail);

    AnovaResult res;
    res.statistic = observed;
    res.perm_statistics = std::move(stats);
    res.p_value = permutation_p_value(observed, res.perm_statistics);
    res.group_sizes = sizes;
    res.norm = cfg.norm;
    res.converged_fraction =
        std::accumulate(conv.begin(), conv.end(), 0.0) / static_cast<double>(b_count);
    res.observed_converged = observed_converged;
    res.observed_iterations = observed_iterations;
    return res;
}

}  // namespace

double test_statistic(const std::vector<SymMatrix>& deviations, MatNorm norm) {
    return combine_norms(deviations, norm, Combine::sum);
}

CovOperator empirical_covariance(const Matrix& curves, const AnovaConfig& cfg) {
    const Index n = curves.rows();
    const Index q = curves.cols();
    if (n < 1 || q < 1) {
        throw InvalidInput("empirical covariance needs a nonempty curve matrix");
    }
    if (!curves.allFinite()) {
        throw InvalidInput("curve matrix has non-finite values");
    }
    if (cfg.center == CovCenter::group_mean && n < 2) {
        throw InsufficientData("centering requires at least 2 curves");
    }
    double denom = (cfg.denominator == CovDenominator::n)
                       ? static_cast<double>(n)
                       : static_cast<double>(n) - 1.0;
    if (!(denom > 0.0)) {
        throw InsufficientData("denominator n-1 requires at least 2 curves");
    }
    Matrix centered = curves;
    if (cfg.center == CovCenter::group_mean) {
        centered.rowwise() -= curves.colwise().mean();
    }
    return CovOperator::unchecked((centered.transpose() * centered) / denom);
}

double permutation_p_value(double observed, const std::vector<double>& perm_stats) {
    if (perm_stats.empty()) {
        throw InvalidInput("no permutation statistics");
    }
    const auto exceed = std::count_if(perm_stats.begin(), perm_stats.end(),
                                      [&](double s) { return s >= observed; });
    return (1.0 + static_cast<double>(exceed)) /
           (static_cast<double>(perm_stats.size()) + 1.0);
}

AnovaResult permutation_test(const CurveGroupSet& groups, const AnovaConfig& cfg,
                             Parallel par) {
    auto statistic = [&cfg](const std::vector<Matrix>& split, Parallel inner,
                            bool* converged, int* iterations) {
        std::vector<CovOperator> covs = group_covariances(split, cfg);
        auto descend = [&]() -> TransportResult {
            try {
                return frechet_mean(covs, cfg.descent, inner);
            } catch (const RankDeficientMean&) {
                throw BasisReductionRequired(
                    "group covariances are rank-deficient; run basis reduction "
                    "before testing");
            } catch (const RankDeficientInputs&) {
                throw BasisReductionRequired(
                    "group covariances are rank-deficient; run basis reduction "
                    "before testing");
            }
        };
        TransportResult tr = descend();
        *converged = tr.converged;
        *iterations = tr.iterations;
        return combine_norms(tr.deviations, cfg.norm, cfg.combine);
    };
    return run_permutation(groups, cfg, par, statistic);
}

AnovaResult baseline_sqrt_test(const CurveGroupSet& groups, const AnovaConfig& cfg,
                               Parallel par) {
    auto statistic = [&cfg](const std::vector<Matrix>& split, Parallel /*inner*/,
                            bool* converged, int* iterations) {
        std::vector<CovOperator> covs = group_covariances(split, cfg);
        std::vector<Matrix> roots;
        roots.reserve(covs.size());
        for (const CovOperator& c : covs) roots.push_back(sqrt_psd(c).mat());
        double worst = 0.0;
        for (size_t i = 0; i < roots.size(); ++i) {
            for (size_t j = i + 1; j < roots.size(); ++j) {
                worst = std::max(worst, (roots[i] - roots[j]).norm());
            }
        }
        *converged = true;
        *iterations = 0;
        return worst;
    };
    AnovaResult res = run_permutation(groups, cfg, par, statistic);
    res.norm = MatNorm::hs;
    return res;
}

}  // namespace tanova
