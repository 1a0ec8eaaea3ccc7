#pragma once

#include "tanova/matrix_types.hpp"

namespace tanova {

// Norms used for deviation operators: operator (spectral), Hilbert-Schmidt
// (Frobenius), trace (nuclear).
enum class MatNorm { op, hs, trace };

// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
// descending order and matching orthonormal eigenvector columns.
struct EigDecomp {
    Vector values;
    Matrix vectors;
};

EigDecomp sym_eig(const SymMatrix& s);

// Principal square root of a PSD matrix; negative round-off within the clip
// band is clamped to zero before taking square roots.
CovOperator sqrt_psd(const CovOperator& s);

// Moore-Penrose inverse square root: eigenvalues <= rel_tol * lambda_max map
// to zero, the rest to 1/sqrt(lambda).
SymMatrix pinv_sqrt(const CovOperator& s, double rel_tol = clip_band());

double norm(const SymMatrix& s, MatNorm which);

}  // namespace tanova
