#include "tanova/spd.hpp"

#include <cmath>

namespace tanova {

EigDecomp sym_eig(const SymMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.mat());
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    // Eigen sorts ascending; flip to descending.
    EigDecomp out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

CovOperator sqrt_psd(const CovOperator& s) {
    EigDecomp ed = sym_eig(s);
    const double lmax = std::max(ed.values(0), 0.0);
    if (ed.values.minCoeff() < -clip_band() * std::max(lmax, 1e-300)) {
        throw NotPsd("sqrt_psd: eigenvalue below clip band");
    }
    Vector roots = ed.values.cwiseMax(0.0).cwiseSqrt();
    return CovOperator::unchecked(ed.vectors * roots.asDiagonal() *
                                  ed.vectors.transpose());
}

SymMatrix pinv_sqrt(const CovOperator& s, double rel_tol) {
    if (!(rel_tol >= 0.0)) {
        throw InvalidInput("pinv_sqrt: rel_tol must be nonnegative");
    }
    EigDecomp ed = sym_eig(s);
    const double lmax = std::max(ed.values(0), 0.0);
    const double thr = rel_tol * lmax;
    Vector inv = Vector::Zero(ed.values.size());
    for (Index i = 0; i < ed.values.size(); ++i) {
        if (ed.values(i) > thr) inv(i) = 1.0 / std::sqrt(ed.values(i));
    }
    return SymMatrix(sym_part(ed.vectors * inv.asDiagonal() * ed.vectors.transpose()));
}

double norm(const SymMatrix& s, MatNorm which) {
    if (which == MatNorm::hs) return s.mat().norm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.mat(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    const Vector& vals = es.eigenvalues();
    switch (which) {
        case MatNorm::op:
            return vals.cwiseAbs().maxCoeff();
        case MatNorm::trace:
            return vals.cwiseAbs().sum();
        default:
            throw InvalidInput("unknown norm");
    }
}

}  // namespace tanova
