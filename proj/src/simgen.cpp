#include "tanova/simgen.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tanova {

namespace {

constexpr double kPi = std::numbers::pi;

// Wrap to (-pi, pi].
double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * kPi);
    if (w <= -kPi) w = kPi;
    return w;
}

// Modified Gram-Schmidt with one reorthogonalization pass.  Columns must be
// independent on the grid; breakdown means the requested sines collapse.
void orthonormalize_columns(Matrix& phi) {
    for (Index c = 0; c < phi.cols(); ++c) {
        const double pre = phi.col(c).norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (Index p = 0; p < c; ++p) {
                phi.col(c) -= phi.col(p).dot(phi.col(c)) * phi.col(p);
            }
        }
        const double post = phi.col(c).norm();
        if (!(pre > 1e-12) || post < 1e-8 * pre) {
            throw DegenerateBasis("grid-sampled sine " + std::to_string(c + 1) +
                                  " is numerically dependent on earlier terms");
        }
        phi.col(c) /= post;
    }
}

void validate(const GenModelConfig& cfg) {
    if (cfg.dim < 1) throw InvalidInput("dim must be positive");
    if (!(cfg.concentration > 0.0)) throw InvalidInput("concentration must be positive");
    if (cfg.vonmises_kappa < 0.0) throw InvalidInput("vonmises_kappa must be nonnegative");
    if (cfg.n_terms < 1 || cfg.n_terms > cfg.dim) {
        throw InvalidInput("n_terms must lie in [1, dim]");
    }
    if (cfg.groups < 1) throw InvalidInput("groups must be positive");
    if (cfg.retry_budget < 1) throw InvalidInput("retry_budget must be positive");
}

}  // namespace

Vector midpoint_grid(Index q) {
    if (q < 1) throw InvalidInput("grid size must be positive");
    Vector grid(q);
    for (Index i = 0; i < q; ++i) {
        grid(i) = (static_cast<double>(i) + 0.5) / static_cast<double>(q);
    }
    return grid;
}

double sample_von_mises(double mu, double kappa, std::mt19937_64& rng) {
    if (kappa < 0.0) throw InvalidInput("kappa must be nonnegative");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (kappa < 1e-10) {
        return wrap_angle(mu + kPi * (2.0 * unif(rng) - 1.0));
    }
    // Best & Fisher rejection sampler with a wrapped-Cauchy envelope.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f = 0.0;
    for (;;) {
        const double u1 = unif(rng);
        const double u2 = unif(rng);
        const double z = std::cos(kPi * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0) break;
        if (std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double sign = unif(rng) > 0.5 ? 1.0 : -1.0;
    return wrap_angle(mu + sign * std::acos(f));
}

double sample_chi2(double k, std::mt19937_64& rng) {
    if (!(k > 0.0)) throw InvalidInput("chi-square degrees of freedom must be positive");
    std::gamma_distribution<double> gamma(k / 2.0, 2.0);
    return gamma(rng);
}

SymMatrix generative_map_at(double theta, const Vector& scaled_deltas, Index q) {
    const Index m = scaled_deltas.size();
    if (q < 1 || m < 1 || m > q) {
        throw InvalidInput("need 1 <= n_terms <= dim");
    }
    const Vector grid = midpoint_grid(q);
    Matrix phi(q, m);
    for (Index n = 1; n <= m; ++n) {
        phi.col(n - 1) =
            (2.0 * static_cast<double>(n) * kPi * grid.array() - theta).sin().matrix();
    }
    orthonormalize_columns(phi);
    // T = I + Phi diag(delta_n/k - 1) Phi^T; directions beyond the truncation
    // are left untouched (identity).
    const Vector shift = scaled_deltas.array() - 1.0;
    Matrix t = Matrix::Identity(q, q) + phi * shift.asDiagonal() * phi.transpose();
    return SymMatrix(sym_part(t));
}

SymMatrix generative_map(const GenModelConfig& cfg, std::mt19937_64& rng) {
    validate(cfg);
    const double theta = sample_von_mises(0.0, cfg.vonmises_kappa, rng);
    Vector scaled(cfg.n_terms);
    for (int n = 0; n < cfg.n_terms; ++n) {
        scaled(n) = sample_chi2(cfg.concentration, rng) / cfg.concentration;
    }
    return generative_map_at(theta, scaled, cfg.dim);
}

BarycentricFamily make_barycentric_family(const GenModelConfig& cfg,
                                          const CovOperator& origin,
                                          std::mt19937_64& rng) {
    validate(cfg);
    if (origin.dim() != cfg.dim) {
        throw DimMismatch("origin dimension does not match config");
    }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(origin.mat(), Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        if (!(lmax > 0.0) || es.eigenvalues().minCoeff() <= clip_band() * lmax) {
            throw RankDeficientInputs("origin covariance must be full-rank");
        }
    }

    const int k = cfg.groups;
    const Index q = cfg.dim;
    std::vector<SymMatrix> maps;

    for (int attempt = 0;; ++attempt) {
        if (attempt >= cfg.retry_budget) {
            throw CannotSymmetrize(
                "could not complete the family with a PSD balancing map in " +
                std::to_string(cfg.retry_budget) +
                " attempts; raise the concentration");
        }
        maps.clear();
        maps.reserve(static_cast<size_t>(k));
        const int free_draws = cfg.exact_mean_identity ? k - 1 : k;
        for (int j = 0; j < free_draws; ++j) {
            maps.push_back(generative_map(cfg, rng));
        }
        if (!cfg.exact_mean_identity) break;

        // Balance the family so the maps average to the identity exactly.
        Matrix sum = Matrix::Zero(q, q);
        for (const SymMatrix& t : maps) sum += t.mat();
        Matrix last = static_cast<double>(k) * Matrix::Identity(q, q) - sum;
        Eigen::SelfAdjointEigenSolver<Matrix> es(last, Eigen::EigenvaluesOnly);
        const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
        if (es.eigenvalues().minCoeff() >= -1e-12 * std::max(lmax, 1.0)) {
            maps.emplace_back(std::move(last));
            break;
        }
    }

    BarycentricFamily fam;
    fam.maps = std::move(maps);
    fam.covs.reserve(static_cast<size_t>(k));
    for (const SymMatrix& t : fam.maps) {
        fam.covs.push_back(CovOperator::unchecked(t.mat() * origin.mat() * t.mat()));
    }
    return fam;
}

Matrix haar_orthogonal(Index q, std::mt19937_64& rng) {
    if (q < 1) throw InvalidInput("dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(q, q);
    for (Index i = 0; i < q; ++i) {
        for (Index j = 0; j < q; ++j) z(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix qmat = qr.householderQ() * Matrix::Identity(q, q);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < q; ++j) {
        if (r(j, j) < 0.0) qmat.col(j) = -qmat.col(j);
    }
    return qmat;
}

CovOperator origin_covariance(Index q, std::mt19937_64& rng) {
    if (q < 1) throw InvalidInput("dimension must be positive");
    const Matrix u = haar_orthogonal(q, rng);
    Vector values(q);
    for (Index n = 1; n <= q; ++n) {
        values(n - 1) = 1.0 / (static_cast<double>(n) * static_cast<double>(n) *
                               static_cast<double>(n) * static_cast<double>(n));
    }
    return CovOperator::unchecked(u * values.asDiagonal() * u.transpose());
}

Matrix sample_gaussian_curves(const CovOperator& cov, Index n, std::mt19937_64& rng) {
    if (n < 1) throw InvalidInput("curve count must be positive");
    const Index q = cov.dim();
    const Matrix root = sqrt_psd(cov).mat();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(n, q);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < q; ++j) z(i, j) = normal(rng);
    }
    return z * root;  // row i is (root * z_i)^T
}

Matrix procrustes_align(const CovOperator& s1, const CovOperator& s2) {
    if (s1.dim() != s2.dim()) {
        throw DimMismatch("procrustes_align: dimensions do not match");
    }
    const Matrix r1 = sqrt_psd(s1).mat();
    const Matrix r2 = sqrt_psd(s2).mat();
    Eigen::JacobiSVD<Matrix> svd(r2.transpose() * r1,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

CovOperator perturb(const CovOperator& base_m, const CovOperator& base_f,
                    const PerturbConfig& cfg) {
    if (!(cfg.gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
    if (cfg.kind == PerturbKind::additive) {
        return CovOperator::unchecked((1.0 + cfg.gamma) * base_m.mat());
    }
    if (base_m.dim() != base_f.dim()) {
        throw DimMismatch("perturb: base dimensions do not match");
    }
    const Matrix rm = sqrt_psd(base_m).mat();
    const Matrix rf = sqrt_psd(base_f).mat();
    const Matrix rot = procrustes_align(base_m, base_f);
    const Matrix b = rm + cfg.gamma * (rf * rot - rm);
    return CovOperator::unchecked(b * b.transpose());
}

}  // namespace tanova
