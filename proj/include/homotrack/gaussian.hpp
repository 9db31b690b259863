#pragma once

// Dense Gaussian primitives shared by the mixture model, the gain fields and
// the evaluation metrics. Everything here is templated on the scalar type.

#include "homotrack/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <span>

namespace homotrack {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
struct Gaussian {
    VectorX<Scalar> mean;
    MatrixX<Scalar> cov;

    Eigen::Index dim() const { return mean.size(); }
};

template <typename Scalar>
struct ConditionedGaussian {
    Gaussian<Scalar> posterior;
    Scalar log_likelihood; ///< log N(values; mean_obs, cov_obs + noise_var I)
};

/// Conditions on noisy observations of the coordinates `observed`
/// (values = x[observed] + N(0, noise_var I)). Throws NumericalFailure when
/// the innovation matrix is not positive definite.
template <typename Scalar>
ConditionedGaussian<Scalar> condition_on_coordinates(const Gaussian<Scalar>& g,
                                                     std::span<const Eigen::Index> observed,
                                                     const VectorX<Scalar>& values, Scalar noise_var) {
    const auto k = static_cast<Eigen::Index>(observed.size());
    const Eigen::Index n = g.dim();
    if (k == 0) return {g, Scalar(0)};

    MatrixX<Scalar> cross(n, k);  // Sigma[:, o]
    VectorX<Scalar> innov(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        cross.col(j) = g.cov.col(observed[j]);
        innov(j) = values(j) - g.mean(observed[j]);
    }
    MatrixX<Scalar> S(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i) S(i, j) = cross(observed[i], j);
    S.diagonal().array() += noise_var;

    Eigen::LLT<MatrixX<Scalar>> llt(S);
    if (llt.info() != Eigen::Success) throw NumericalFailure("innovation covariance is not positive definite");

    const VectorX<Scalar> alpha = llt.solve(innov);
    const MatrixX<Scalar> gain = llt.solve(cross.transpose()).transpose(); // Sigma[:, o] S^-1

    ConditionedGaussian<Scalar> out;
    out.posterior.mean = g.mean + cross * alpha;
    out.posterior.cov = g.cov - gain * cross.transpose();
    out.posterior.cov = (Scalar(0.5) * (out.posterior.cov + out.posterior.cov.transpose())).eval();

    const MatrixX<Scalar> L = llt.matrixL();
    const Scalar log_det = Scalar(2) * L.diagonal().array().log().sum();
    out.log_likelihood = Scalar(-0.5) * (innov.dot(alpha) + log_det +
                                         static_cast<Scalar>(k) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>));
    return out;
}

/// log N(x; mean, cov).
template <typename Scalar>
Scalar log_normal_pdf(const VectorX<Scalar>& x, const VectorX<Scalar>& mean, const MatrixX<Scalar>& cov) {
    Eigen::LLT<MatrixX<Scalar>> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalFailure("covariance is not positive definite");
    const VectorX<Scalar> d = x - mean;
    const VectorX<Scalar> z = llt.matrixL().solve(d);
    const MatrixX<Scalar> L = llt.matrixL();
    const Scalar log_det = Scalar(2) * L.diagonal().array().log().sum();
    return Scalar(-0.5) * (z.squaredNorm() + log_det +
                           static_cast<Scalar>(x.size()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>));
}

/// Cached Cholesky factor for repeated KL evaluations against one Gaussian.
template <typename Scalar>
struct FactoredGaussian {
    explicit FactoredGaussian(const Gaussian<Scalar>& g) : gaussian(&g), llt(g.cov) {
        if (llt.info() != Eigen::Success) throw NumericalFailure("covariance is not positive definite");
        const MatrixX<Scalar> L = llt.matrixL();
        log_det = Scalar(2) * L.diagonal().array().log().sum();
    }

    const Gaussian<Scalar>* gaussian;
    Eigen::LLT<MatrixX<Scalar>> llt;
    Scalar log_det;
};

/// KL(f || g) between Gaussians of equal dimension.
template <typename Scalar>
Scalar kl_divergence(const FactoredGaussian<Scalar>& f, const FactoredGaussian<Scalar>& g) {
    const auto n = static_cast<Scalar>(f.gaussian->dim());
    const MatrixX<Scalar> Lf = f.llt.matrixL();
    const MatrixX<Scalar> M = g.llt.matrixL().solve(Lf);
    const VectorX<Scalar> d = g.llt.matrixL().solve(g.gaussian->mean - f.gaussian->mean);
    return Scalar(0.5) * (M.squaredNorm() + d.squaredNorm() - n + g.log_det - f.log_det);
}

template <typename Scalar>
Scalar kl_divergence(const Gaussian<Scalar>& f, const Gaussian<Scalar>& g) {
    return kl_divergence(FactoredGaussian<Scalar>(f), FactoredGaussian<Scalar>(g));
}

/// E_y[peak * exp(-|x - y|^2 / (2 r^2))] for y ~ N(mean, cov) in the plane.
template <typename Scalar>
Scalar detection_marginal(const Vector2<Scalar>& x, const Vector2<Scalar>& mean, const Matrix2<Scalar>& cov,
                          Scalar radius, Scalar peak) {
    const Scalar r2 = radius * radius;
    const Matrix2<Scalar> spread = cov + r2 * Matrix2<Scalar>::Identity();
    const Vector2<Scalar> theta = x - mean;
    const Scalar quad = theta.dot(spread.inverse() * theta);
    const Scalar beta = peak / std::sqrt((cov / r2 + Matrix2<Scalar>::Identity()).determinant());
    return beta * std::exp(Scalar(-0.5) * quad);
}

} // namespace homotrack
