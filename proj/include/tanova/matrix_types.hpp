#pragma once

#include <Eigen/Dense>

#include "tanova/error.hpp"

namespace tanova {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative eigenvalue threshold below which a nominally PSD matrix is treated
// as rank-deficient and small negative round-off is clipped to zero.  One
// global knob so every kernel applies the same convention.
double clip_band();
void set_clip_band(double band);

// (A + A^T) / 2.  Products like T S T or B B^T are symmetric in exact
// arithmetic; this removes the round-off skew before wrapping them.
inline Matrix sym_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Dense symmetric matrix in a fixed basis.  Construction requires finite
// entries and symmetry to within 1e-12 * max(1, max|entry|); the stored
// matrix is the symmetrized part.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m);

    static SymMatrix zero(Index dim);
    static SymMatrix identity(Index dim);

    Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }

protected:
    struct unchecked_t {};
    SymMatrix(Matrix m, unchecked_t) : m_(std::move(m)) {}

    Matrix m_;
};

// Symmetric positive semi-definite matrix (a covariance operator in a fixed
// basis).  Construction clips negative eigenvalues within the clip band to
// zero; eigenvalues below -clip_band * lambda_max raise NotPsd.
class CovOperator : public SymMatrix {
public:
    explicit CovOperator(Matrix m);
    explicit CovOperator(const SymMatrix& s);

    static CovOperator zero(Index dim);
    static CovOperator identity(Index dim);

    // For results PSD by construction (conjugations T S T, products B B^T):
    // symmetrizes but skips the spectral check.
    static CovOperator unchecked(Matrix m);

    double trace() const { return m_.trace(); }

private:
    CovOperator(Matrix m, unchecked_t t) : SymMatrix(std::move(m), t) {}
};

}  // namespace tanova
