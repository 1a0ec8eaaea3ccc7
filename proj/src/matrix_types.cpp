#include "tanova/matrix_types.hpp"

#include <atomic>
#include <cmath>

namespace tanova {

namespace {

std::atomic<double> g_clip_band{1e-10};

void check_shape(const Matrix& m) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw InvalidInput("matrix must have positive dimension");
    }
    if (m.rows() != m.cols()) {
        throw InvalidInput("matrix must be square, got " + std::to_string(m.rows()) +
                           "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) {
        throw InvalidInput("matrix has non-finite entries");
    }
}

Matrix checked_symmetric(Matrix m) {
    check_shape(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * scale) {
        throw InvalidInput("matrix is not symmetric (max asymmetry " +
                           std::to_string(skew) + ")");
    }
    return sym_part(m);
}

}  // namespace

double clip_band() { return g_clip_band.load(std::memory_order_relaxed); }

void set_clip_band(double band) {
    if (!(band > 0.0) || !(band < 1.0)) {
        throw InvalidInput("clip band must lie in (0, 1)");
    }
    g_clip_band.store(band, std::memory_order_relaxed);
}

SymMatrix::SymMatrix(Matrix m) : m_(checked_symmetric(std::move(m))) {}

SymMatrix SymMatrix::zero(Index dim) {
    return SymMatrix(Matrix::Zero(dim, dim), unchecked_t{});
}

SymMatrix SymMatrix::identity(Index dim) {
    return SymMatrix(Matrix::Identity(dim, dim), unchecked_t{});
}

namespace {

// Clips in-band negative eigenvalues to zero; anything further below is a
// genuine PSD violation.
Matrix checked_psd(Matrix m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    const Vector& vals = es.eigenvalues();
    const double lmax = std::max(vals.maxCoeff(), 0.0);
    const double lmin = vals.minCoeff();
    const double band = clip_band() * std::max(lmax, 1e-300);
    if (lmin < -band) {
        throw NotPsd("smallest eigenvalue " + std::to_string(lmin) +
                     " below clip band " + std::to_string(-band));
    }
    if (lmin < 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> full(m);
        Vector clipped = full.eigenvalues().cwiseMax(0.0);
        m = sym_part(full.eigenvectors() * clipped.asDiagonal() *
                     full.eigenvectors().transpose());
    }
    return m;
}

}  // namespace

CovOperator::CovOperator(Matrix m)
    : SymMatrix(checked_psd(checked_symmetric(std::move(m))), unchecked_t{}) {}

CovOperator::CovOperator(const SymMatrix& s)
    : SymMatrix(checked_psd(s.mat()), unchecked_t{}) {}

CovOperator CovOperator::zero(Index dim) {
    return unchecked(Matrix::Zero(dim, dim));
}

CovOperator CovOperator::identity(Index dim) {
    return unchecked(Matrix::Identity(dim, dim));
}

CovOperator CovOperator::unchecked(Matrix m) {
    check_shape(m);
    return CovOperator(sym_part(m), unchecked_t{});
}

}  // namespace tanova
