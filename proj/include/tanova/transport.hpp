#pragma once

#include <optional>
#include <vector>

#include "tanova/spd.hpp"

namespace tanova {

// Execution policy for the data-parallel kernels (per-target transport maps
// inside a descent iteration, permutation replicates).  Both policies produce
// bit-identical results; serial is kept as the reference implementation.
enum class Parallel { serial, openmp };

struct DescentInit {
    enum class Kind { input_index, trace_scaled_identity, explicit_matrix };

    Kind kind = Kind::input_index;
    int index = 0;
    std::optional<CovOperator> matrix;

    static DescentInit input(int i) {
        DescentInit d;
        d.index = i;
        return d;
    }
    static DescentInit scaled_identity() {
        DescentInit d;
        d.kind = Kind::trace_scaled_identity;
        return d;
    }
    static DescentInit explicit_mean(CovOperator m) {
        DescentInit d;
        d.kind = Kind::explicit_matrix;
        d.matrix = std::move(m);
        return d;
    }
};

struct DescentConfig {
    int max_iters = 100;
    // Stopping rule: || (avg map - I) * sqrt(iterate) ||_hs <= grad_tol *
    // trace of the initial iterate.
    double grad_tol = 1e-9;
    DescentInit init{};
};

struct TransportResult {
    CovOperator mean;
    std::vector<SymMatrix> maps;        // optimal maps t_j, mean -> input j
    std::vector<SymMatrix> deviations;  // t_j - I
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    // Sum of squared transport distances from the iterate to the inputs,
    // recorded once per iteration (non-increasing along the descent).
    std::vector<double> functional_trace;
};

// Transport distance between two PSD covariance operators:
//   Pi^2 = tr a + tr b - 2 tr (a^{1/2} b a^{1/2})^{1/2},
// with negative round-off clamped before the final square root.
double bw_distance(const CovOperator& a, const CovOperator& b);

// Optimal transport map from an injective `mean` to `target`:
//   t = mean^{-1/2} (mean^{1/2} target mean^{1/2})^{1/2} mean^{-1/2}.
SymMatrix optimal_map(const CovOperator& mean, const CovOperator& target);

// Steepest-descent fixed-point iteration for the barycenter of the inputs.
// Maps and deviations in the result are evaluated at the returned mean.
TransportResult frechet_mean(const std::vector<CovOperator>& covs,
                             const DescentConfig& cfg = {},
                             Parallel par = Parallel::openmp);

std::vector<SymMatrix> transport_deviations(const TransportResult& result);

}  // namespace tanova
