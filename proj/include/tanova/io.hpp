#pragma once

#include <string>

#include "tanova/curves.hpp"

namespace tanova {

enum class RankPolicyKind { fixed_rank, energy_threshold };

struct RankPolicy {
    RankPolicyKind kind = RankPolicyKind::energy_threshold;
    int rank = 0;
    double energy = 1.0 - 1e-8;

    static RankPolicy fixed(int m) {
        RankPolicy p;
        p.kind = RankPolicyKind::fixed_rank;
        p.rank = m;
        return p;
    }
    static RankPolicy energy_frac(double tau) {
        RankPolicy p;
        p.energy = tau;
        return p;
    }
};

struct BasisReduction {
    CurveGroupSet reduced;
    Matrix basis;      // q x m, columns orthonormal
    bool rank_capped;  // requested rank exceeded the pooled rank
};

// Wide CSV: one curve per row, first column the group label, remaining q
// columns the curve values.  An optional header row is detected by a
// non-numeric first token together with a non-numeric value token.
CurveGroupSet load_curves(const std::string& path);

// Project every curve onto the top-m eigenvectors of the pooled group-centered
// covariance.  fixed_rank caps m at the pooled rank (flagged); the energy
// policy picks the smallest m capturing the requested trace fraction.
BasisReduction basis_reduce(const CurveGroupSet& groups, const RankPolicy& policy);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Matrix CSV with a `rows=R,cols=C` header line.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

void write_curves_csv(const std::string& path, const CurveGroupSet& groups);

}  // namespace tanova
