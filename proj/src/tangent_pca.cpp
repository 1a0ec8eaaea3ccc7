#include "tanova/tangent_pca.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tanova {

namespace {

void check_dims(const std::vector<SymMatrix>& deviations, const CovOperator& mean) {
    if (deviations.empty()) {
        throw InvalidInput("no deviation operators");
    }
    for (const SymMatrix& d : deviations) {
        if (d.dim() != mean.dim()) {
            throw DimMismatch("deviation dimension " + std::to_string(d.dim()) +
                              " does not match mean dimension " +
                              std::to_string(mean.dim()));
        }
    }
}

}  // namespace

double sigma_inner(const SymMatrix& a, const SymMatrix& b, const CovOperator& mean) {
    if (a.dim() != mean.dim() || b.dim() != mean.dim()) {
        throw DimMismatch("sigma_inner: operand dimensions do not match the mean");
    }
    // trace(A Sigma B) = sum_ij (A Sigma)_ij B_ji; B symmetric.
    return ((a.mat() * mean.mat()).cwiseProduct(b.mat())).sum();
}

TangentPcaResult tangent_pca(const std::vector<SymMatrix>& deviations,
                             const CovOperator& mean) {
    check_dims(deviations, mean);
    const int k = static_cast<int>(deviations.size());

    // K x K Gram matrix of the deviations in the Sigma inner product, scaled
    // by 1/K so its spectrum matches the empirical tangent covariance.
    Matrix gram(k, k);
    for (int i = 0; i < k; ++i) {
        const Matrix prod = deviations[static_cast<size_t>(i)].mat() * mean.mat();
        for (int j = i; j < k; ++j) {
            const double g =
                prod.cwiseProduct(deviations[static_cast<size_t>(j)].mat()).sum();
            gram(i, j) = g;
            gram(j, i) = g;
        }
    }
    gram /= static_cast<double>(k);

    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    Vector values = es.eigenvalues().reverse().cwiseMax(0.0);
    Matrix weights = es.eigenvectors().rowwise().reverse();

    const double lmax = values(0);
    Vector proportions = Vector::Zero(k);
    if (lmax > 0.0) {
        proportions = values / values.sum();
    }

    TangentPcaResult out{std::move(values), std::move(proportions), {}, Matrix(), mean};
    if (lmax <= 0.0) {
        out.scores = Matrix::Zero(k, 0);
        return out;
    }

    int retained = 0;
    while (retained < k && out.eigenvalues(retained) > clip_band() * lmax) ++retained;

    out.scores = Matrix::Zero(k, retained);
    out.components.reserve(static_cast<size_t>(retained));
    const Index q = mean.dim();
    for (int m = 0; m < retained; ++m) {
        const double scale = std::sqrt(static_cast<double>(k) * out.eigenvalues(m));
        Vector w = weights.col(m);
        Vector score = scale * w;

        // Sign convention: the largest-magnitude score is positive.
        Index arg = 0;
        score.cwiseAbs().maxCoeff(&arg);
        if (score(arg) < 0.0) {
            score = -score;
            w = -w;
        }
        out.scores.col(m) = score;

        Matrix comp = Matrix::Zero(q, q);
        for (int j = 0; j < k; ++j) {
            comp += w(j) * deviations[static_cast<size_t>(j)].mat();
        }
        comp /= scale;
        out.components.emplace_back(sym_part(comp));
    }
    return out;
}

CovOperator geodesic_retract(const CovOperator& mean, const SymMatrix& component,
                             double t) {
    if (mean.dim() != component.dim()) {
        throw DimMismatch("geodesic_retract: dimensions do not match");
    }
    const Index q = mean.dim();
    if (t == 0.0) return mean;

    Eigen::SelfAdjointEigenSolver<Matrix> es(component.mat(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw InvalidInput("eigendecomposition failed");
    }
    const double mu_min = es.eigenvalues().minCoeff();
    const double mu_max = es.eigenvalues().maxCoeff();
    const double mu_span = std::max(std::abs(mu_min), std::abs(mu_max));
    // Smallest eigenvalue of I + tE decides admissibility.
    const double edge = 1.0 + t * (t > 0.0 ? mu_min : mu_max);
    if (edge < -1e-12 * (1.0 + std::abs(t) * mu_span)) {
        double max_abs_t = std::numeric_limits<double>::infinity();
        if (t > 0.0 && mu_min < 0.0) max_abs_t = 1.0 / (-mu_min);
        if (t < 0.0 && mu_max > 0.0) max_abs_t = 1.0 / mu_max;
        throw StepOutsideCone("step t=" + std::to_string(t) +
                                  " leaves the PSD cone; |t| must not exceed " +
                                  std::to_string(max_abs_t),
                              max_abs_t);
    }
    const Matrix a = Matrix::Identity(q, q) + t * component.mat();
    return CovOperator::unchecked(sym_part(a * mean.mat() * a));
}

std::vector<CovOperator> principal_mode_samples(const TangentPcaResult& result,
                                                int component_index,
                                                const std::vector<double>& ts) {
    if (component_index < 0 ||
        component_index >= static_cast<int>(result.components.size())) {
        throw InvalidInput("component index out of range");
    }
    std::vector<CovOperator> out;
    out.reserve(ts.size());
    const SymMatrix& comp = result.components[static_cast<size_t>(component_index)];
    for (double t : ts) {
        out.push_back(geodesic_retract(result.mean, comp, t));
    }
    return out;
}

}  // namespace tanova
