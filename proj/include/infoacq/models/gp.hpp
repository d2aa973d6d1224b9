#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "dataset.hpp"
#include "features.hpp"
#include "predictive.hpp"

namespace infoacq {

using KernelFunction = std::function<Matrix(const Matrix&, const Matrix&)>;

inline KernelFunction rbf_kernel(double lengthscale, double amplitude) {
    if (!(lengthscale > 0) || !(amplitude > 0)) throw contract_error("rbf_kernel: parameters must be positive");
    return [=](const Matrix& a, const Matrix& b) {
        Matrix k(a.rows(), b.rows());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < b.rows(); ++j)
                k(i, j) = amplitude * std::exp(-(a.row(i) - b.row(j)).squaredNorm() / (2.0 * lengthscale * lengthscale));
        return k;
    };
}

// Kernel of a linear model with N(0, λ⁻¹ I) weights over the given features.
inline KernelFunction linear_feature_kernel(FeatureMap features, double prior_precision) {
    return [f = std::move(features), prior_precision](const Matrix& a, const Matrix& b) {
        return Matrix(f(a) * f(b).transpose() / prior_precision);
    };
}

class GpRegression {
public:
    GpRegression(Matrix inputs, Vector targets, KernelFunction kernel, double noise_variance)
        : x_(std::move(inputs)), y_(std::move(targets)), kernel_(std::move(kernel)), noise_(noise_variance) {
        if (!(noise_ > 0)) throw contract_error("GpRegression: noise variance must be positive");
        if (x_.rows() != y_.size()) throw contract_error("GpRegression: row mismatch");
        if (x_.rows() > 0) {
            Matrix k = kernel_(x_, x_);
            k.diagonal().array() += noise_;
            chol_ = cholesky(k, "GP training covariance");
            alpha_ = chol_.solve(y_);
        }
    }

    [[nodiscard]] GaussianPredictive predict(const Matrix& query) const {
        GaussianPredictive out;
        out.noise_variance = noise_;
        const Matrix kqq = kernel_(query, query);
        if (x_.rows() == 0) {
            out.mean = Vector::Zero(query.rows());
            out.cov = kqq;
            return out;
        }
        const Matrix kqx = kernel_(query, x_);
        out.mean = kqx * alpha_;
        const Matrix v = chol_.llt.matrixL().solve(kqx.transpose());
        out.cov = symmetrized(kqq - v.transpose() * v);
        return out;
    }

    [[nodiscard]] double noise_variance() const noexcept { return noise_; }

private:
    Matrix x_;
    Vector y_;
    KernelFunction kernel_;
    double noise_;
    JitteredCholesky chol_;
    Vector alpha_;
};

inline GpRegression fit_gp_regression(const Dataset& data, KernelFunction kernel, double noise_variance) {
    if (data.kind != TaskKind::regression) throw contract_error("fit_gp_regression: regression data required");
    return GpRegression(data.inputs, data.targets, std::move(kernel), noise_variance);
}

} // namespace infoacq
