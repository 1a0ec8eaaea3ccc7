#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tanova/spd.hpp"

namespace tanova {

struct GenModelConfig {
    Index dim = 50;            // grid size q
    double concentration = 20; // chi-square degrees of freedom k
    double vonmises_kappa = 1; // phase concentration (inverse scale)
    int n_terms = 10;          // truncation of the random series, <= dim
    int groups = 3;            // K
    // Replace the last map with K*I - sum of the others so the family has the
    // identity as its exact barycentric mean; PSD is enforced by retrying.
    bool exact_mean_identity = false;
    int retry_budget = 1000;
};

enum class PerturbKind { geodesic, additive };

struct PerturbConfig {
    double gamma = 0.0;
    PerturbKind kind = PerturbKind::additive;
    int k1 = 1;  // groups receiving the perturbed covariance
    int k2 = 0;  // groups keeping the base (0 = all remaining)
};

// Midpoint grid t_i = (i - 1/2) / q on (0, 1).
Vector midpoint_grid(Index q);

// Best-Fisher rejection sampler; exact for all kappa >= 0.  Angles are
// reported in (-pi, pi].
double sample_von_mises(double mu, double kappa, std::mt19937_64& rng);

double sample_chi2(double k, std::mt19937_64& rng);

// Random PSD map T = I + sum_n (delta_n / k - 1) phi_n phi_n^T with
// delta_n ~ chi^2_k and phi_n orthonormalizing the grid-sampled shifted sines
// sin(2 n pi t - theta), theta ~ von Mises(0, kappa).  E[T] = I.
SymMatrix generative_map(const GenModelConfig& cfg, std::mt19937_64& rng);

// Deterministic core of generative_map: the map for given phase and scaled
// amplitudes delta_n / k.
SymMatrix generative_map_at(double theta, const Vector& scaled_deltas, Index q);

struct BarycentricFamily {
    std::vector<SymMatrix> maps;    // T_j
    std::vector<CovOperator> covs;  // T_j origin T_j
};

BarycentricFamily make_barycentric_family(const GenModelConfig& cfg,
                                          const CovOperator& origin,
                                          std::mt19937_64& rng);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
// of each diagonal entry of R folded into Q.
Matrix haar_orthogonal(Index q, std::mt19937_64& rng);

// U diag(1, 2^-4, ..., q^-4) U^T with U Haar orthogonal.
CovOperator origin_covariance(Index q, std::mt19937_64& rng);

// n i.i.d. mean-zero Gaussian curves with the given covariance, one per row.
Matrix sample_gaussian_curves(const CovOperator& cov, Index n, std::mt19937_64& rng);

// Orthogonal polar factor of (s2^{1/2})^T s1^{1/2}, aligning the square roots.
Matrix procrustes_align(const CovOperator& s1, const CovOperator& s2);

// gamma = 0 returns base_m; geodesic kind with gamma = 1 returns base_f.
CovOperator perturb(const CovOperator& base_m, const CovOperator& base_f,
                    const PerturbConfig& cfg);

}  // namespace tanova
