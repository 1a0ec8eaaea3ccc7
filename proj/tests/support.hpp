#pragma once

#include <random>
#include <vector>

#include "tanova/matrix_types.hpp"
#include "tanova/rng.hpp"

namespace tanova::testing {

inline Matrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline Matrix random_symmetric(Index q, std::mt19937_64& rng, double scale = 1.0) {
    Matrix a = random_gaussian(q, q, rng);
    return scale * sym_part(a);
}

// Independent QR-based orthogonal sampler (kept separate from the library's
// generator so tests do not lean on the code they check).
inline Matrix random_orthogonal(Index q, std::mt19937_64& rng) {
    Matrix a = random_gaussian(q, q, rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix qmat = qr.householderQ() * Matrix::Identity(q, q);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < q; ++j) {
        if (r(j, j) < 0.0) qmat.col(j) = -qmat.col(j);
    }
    return qmat;
}

// SPD matrix with eigenvalues drawn uniformly from [lo, hi].
inline Matrix random_spd(Index q, std::mt19937_64& rng, double lo = 0.5,
                         double hi = 2.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    Vector values(q);
    for (Index i = 0; i < q; ++i) values(i) = unif(rng);
    const Matrix u = random_orthogonal(q, rng);
    return sym_part(u * values.asDiagonal() * u.transpose());
}

// Possibly rank-deficient PSD matrix A^T A / q with A n x q, n <= q.
inline Matrix random_psd_rank(Index q, Index rank, std::mt19937_64& rng) {
    Matrix a = random_gaussian(rank, q, rng);
    return sym_part(a.transpose() * a) / static_cast<double>(q);
}

inline double rel_err(const Matrix& got, const Matrix& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

inline double max_abs_diff(const Matrix& got, const Matrix& want) {
    return (got - want).cwiseAbs().maxCoeff();
}

}  // namespace tanova::testing
