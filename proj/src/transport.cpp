#include "tanova/transport.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tanova {

namespace {

// Eigen-factored descent iterate shared across the K map evaluations of one
// iteration.
struct MeanFactor {
    Matrix root;      // sigma^{1/2}
    Matrix inv_root;  // sigma^{-1/2}
};

MeanFactor factor_mean(const Matrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    const Vector& vals = es.eigenvalues();
    const double lmax = vals.maxCoeff();
    if (!(lmax > 0.0) || vals.minCoeff() <= clip_band() * lmax) {
        throw RankDeficientMean(
            "descent iterate is rank-deficient within the clip band; reduce the "
            "basis or regularize the inputs");
    }
    Vector roots = vals.cwiseSqrt();
    MeanFactor f;
    f.root = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
    f.inv_root = es.eigenvectors() * roots.cwiseInverse().asDiagonal() *
                 es.eigenvectors().transpose();
    return f;
}

struct MapAndCross {
    Matrix map;
    double cross_trace;  // tr (sigma^{1/2} target sigma^{1/2})^{1/2}
};

MapAndCross map_to(const MeanFactor& f, const Matrix& target) {
    Matrix mid = sym_part(f.root * target * f.root);
    Eigen::SelfAdjointEigenSolver<Matrix> es(mid);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix mid_root =
        es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
    return {sym_part(f.inv_root * mid_root * f.inv_root), roots.sum()};
}

void check_common_dim(const std::vector<CovOperator>& covs) {
    const Index q = covs.front().dim();
    for (const CovOperator& c : covs) {
        if (c.dim() != q) {
            throw DimMismatch("covariances have mixed dimensions " +
                              std::to_string(q) + " and " + std::to_string(c.dim()));
        }
    }
}

Matrix initial_iterate(const std::vector<CovOperator>& covs, const DescentInit& init) {
    const Index q = covs.front().dim();
    Matrix sigma;
    switch (init.kind) {
        case DescentInit::Kind::input_index: {
            if (init.index < 0 || init.index >= static_cast<int>(covs.size())) {
                throw InvalidInput("descent init index out of range");
            }
            sigma = covs[static_cast<size_t>(init.index)].mat();
            break;
        }
        case DescentInit::Kind::trace_scaled_identity: {
            double tbar = 0.0;
            for (const CovOperator& c : covs) tbar += c.trace();
            tbar /= static_cast<double>(covs.size()) * static_cast<double>(q);
            return tbar * Matrix::Identity(q, q);
        }
        case DescentInit::Kind::explicit_matrix: {
            if (!init.matrix) {
                throw InvalidInput("explicit descent init requires a matrix");
            }
            if (init.matrix->dim() != q) {
                throw DimMismatch("descent init dimension does not match inputs");
            }
            sigma = init.matrix->mat();
            break;
        }
    }
    // The iterate must be injective; lift a rank-deficient start with a ridge
    // slightly above the clip band.
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (es.eigenvalues().minCoeff() <= clip_band() * lmax) {
        sigma += 1e-8 * (lmax > 0.0 ? lmax : 1.0) * Matrix::Identity(q, q);
    }
    return sigma;
}

}  // namespace

double bw_distance(const CovOperator& a, const CovOperator& b) {
    if (a.dim() != b.dim()) {
        throw DimMismatch("bw_distance: dimensions " + std::to_string(a.dim()) +
                          " and " + std::to_string(b.dim()));
    }
    const Matrix ra = sqrt_psd(a).mat();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(ra * b.mat() * ra),
                                             Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double pi2 = a.trace() + b.trace() - 2.0 * cross;
    return std::sqrt(std::max(pi2, 0.0));
}

SymMatrix optimal_map(const CovOperator& mean, const CovOperator& target) {
    if (mean.dim() != target.dim()) {
        throw DimMismatch("optimal_map: dimensions " + std::to_string(mean.dim()) +
                          " and " + std::to_string(target.dim()));
    }
    MeanFactor f = factor_mean(mean.mat());
    return SymMatrix(map_to(f, target.mat()).map);
}

TransportResult frechet_mean(const std::vector<CovOperator>& covs,
                             const DescentConfig& cfg, Parallel par) {
    const int k = static_cast<int>(covs.size());
    if (k < 2) {
        throw InvalidInput("frechet_mean needs at least two covariances");
    }
    check_common_dim(covs);
    if (cfg.max_iters < 1) {
        throw InvalidInput("max_iters must be at least 1");
    }
    if (!(cfg.grad_tol > 0.0)) {
        throw InvalidInput("grad_tol must be positive");
    }

    // The descent is well defined only if some input is injective within the
    // clip band; otherwise every iterate collapses onto a common null space.
    bool any_full_rank = false;
    for (const CovOperator& c : covs) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(c.mat(), Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        if (lmax > 0.0 && es.eigenvalues().minCoeff() > clip_band() * lmax) {
            any_full_rank = true;
            break;
        }
    }
    if (!any_full_rank) {
        throw RankDeficientInputs(
            "no input covariance is full-rank within the clip band; apply basis "
            "reduction first");
    }

    const Index q = covs.front().dim();
    Matrix sigma = initial_iterate(covs, cfg.init);
    const double tol = cfg.grad_tol * sigma.trace();

    std::vector<Matrix> maps(static_cast<size_t>(k));
    std::vector<double> crosses(static_cast<size_t>(k), 0.0);
    std::vector<double> functional;
    functional.reserve(static_cast<size_t>(cfg.max_iters));

    int iters = 0;
    double gnorm = 0.0;
    bool converged = false;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const MeanFactor f = factor_mean(sigma);

        std::exception_ptr fail;
        auto eval = [&](int j) {
            try {
                MapAndCross mc = map_to(f, covs[static_cast<size_t>(j)].mat());
                maps[static_cast<size_t>(j)] = std::move(mc.map);
                crosses[static_cast<size_t>(j)] = mc.cross_trace;
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical(tanova_transport_fail)
#endif
                {
                    if (!fail) fail = std::current_exception();
                }
            }
        };
#ifdef _OPENMP
        if (par == Parallel::openmp) {
#pragma omp parallel for schedule(static)
            for (int j = 0; j < k; ++j) eval(j);
        } else {
            for (int j = 0; j < k; ++j) eval(j);
        }
#else
        for (int j = 0; j < k; ++j) eval(j);
#endif
        if (fail) std::rethrow_exception(fail);

        // Sum of squared transport distances to the inputs, a free byproduct
        // of the map eigendecompositions.
        const double tr_sigma = sigma.trace();
        double fval = 0.0;
        for (int j = 0; j < k; ++j) {
            fval += std::max(tr_sigma + covs[static_cast<size_t>(j)].trace() -
                                 2.0 * crosses[static_cast<size_t>(j)],
                             0.0);
        }
        functional.push_back(fval);

        Matrix t_avg = Matrix::Zero(q, q);
        for (int j = 0; j < k; ++j) t_avg += maps[static_cast<size_t>(j)];
        t_avg /= static_cast<double>(k);

        gnorm = ((t_avg - Matrix::Identity(q, q)) * f.root).norm();
        iters = it;
        if (gnorm <= tol) {
            converged = true;
            break;
        }
        if (it == cfg.max_iters) break;  // report maps at the last evaluated iterate
        sigma = sym_part(t_avg * sigma * t_avg);
    }

    std::vector<SymMatrix> out_maps;
    std::vector<SymMatrix> out_devs;
    out_maps.reserve(static_cast<size_t>(k));
    out_devs.reserve(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) {
        out_maps.emplace_back(maps[static_cast<size_t>(j)]);
        out_devs.emplace_back(maps[static_cast<size_t>(j)] - Matrix::Identity(q, q));
    }

    return TransportResult{CovOperator::unchecked(std::move(sigma)),
                           std::move(out_maps),
                           std::move(out_devs),
                           iters,
                           gnorm,
                           converged,
                           std::move(functional)};
}

std::vector<SymMatrix> transport_deviations(const TransportResult& result) {
    std::vector<SymMatrix> devs;
    devs.reserve(result.maps.size());
    const Index q = result.mean.dim();
    for (const SymMatrix& t : result.maps) {
        devs.emplace_back(t.mat() - Matrix::Identity(q, q));
    }
    return devs;
}

}  // namespace tanova
