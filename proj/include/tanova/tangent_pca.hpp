#pragma once

#include <vector>

#include "tanova/transport.hpp"

namespace tanova {

struct TangentPcaResult {
    // All K eigenvalues of the empirical tangent-space covariance operator,
    // descending and clamped at zero; at most K-1 are nonzero when the
    // deviations sum to zero.
    Vector eigenvalues;
    Vector variance_proportions;  // eigenvalues normalized to sum 1
    // Components above the rank threshold, orthonormal in the Sigma inner
    // product; scores is K x M with scores(j, m) = <Delta_j, E_m>_Sigma.
    std::vector<SymMatrix> components;
    Matrix scores;
    CovOperator mean;
};

// <A, B>_Sigma = trace(A Sigma B) for symmetric A, B.
double sigma_inner(const SymMatrix& a, const SymMatrix& b, const CovOperator& mean);

// PCA of the deviations in the Sigma inner product via the K x K Gram matrix.
// Sign convention: within each component the largest-magnitude score is
// positive.
TangentPcaResult tangent_pca(const std::vector<SymMatrix>& deviations,
                             const CovOperator& mean);

// (I + t E) Sigma (I + t E); steps leaving the PSD cone raise StepOutsideCone
// carrying the largest admissible |t| for that direction.
CovOperator geodesic_retract(const CovOperator& mean, const SymMatrix& component,
                             double t);

std::vector<CovOperator> principal_mode_samples(const TangentPcaResult& result,
                                                int component_index,
                                                const std::vector<double>& ts);

}  // namespace tanova
