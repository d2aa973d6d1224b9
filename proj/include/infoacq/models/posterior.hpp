#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "dataset.hpp"
#include "features.hpp"

namespace infoacq {

// Gaussian posterior over weights. For a softmax GLM the weights are stored class-major:
// entry c·D + d multiplies feature d in the logit of class c.
struct WeightPosterior {
    Vector mean;
    Matrix covariance;
    Matrix precision;
    double noise_variance = 0.0;  // > 0 only for regression
    double prior_precision = 1.0;
    std::size_t num_outputs = 1;  // classes for a GLM, 1 for regression
    bool conjugate = false;       // exact Gaussian posterior of a linear-Gaussian model

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
    [[nodiscard]] std::size_t feature_dim() const noexcept { return dim() / num_outputs; }
};

namespace detail {
inline Matrix covariance_from_precision(const Matrix& precision) {
    const auto chol = cholesky(precision, "posterior precision");
    return symmetrized(chol.solve(Matrix::Identity(precision.rows(), precision.cols())));
}
} // namespace detail

inline WeightPosterior fit_bayes_linear(const Matrix& phi, const Vector& y, double prior_precision,
                                        double noise_variance) {
    if (!(prior_precision > 0) || !(noise_variance > 0))
        throw contract_error("fit_bayes_linear: precision and noise must be positive");
    if (phi.rows() != y.size()) throw contract_error("fit_bayes_linear: row mismatch");
    WeightPosterior post;
    post.noise_variance = noise_variance;
    post.prior_precision = prior_precision;
    post.conjugate = true;
    post.precision = prior_precision * Matrix::Identity(phi.cols(), phi.cols());
    post.precision.noalias() += phi.transpose() * phi / noise_variance;
    const auto chol = cholesky(post.precision, "posterior precision");
    post.covariance = symmetrized(chol.solve(Matrix::Identity(phi.cols(), phi.cols())));
    post.mean = chol.solve(Vector(phi.transpose() * y / noise_variance));
    return post;
}

inline WeightPosterior fit_bayes_linear(const Dataset& data, const FeatureMap& features, double prior_precision,
                                        double noise_variance) {
    if (data.kind != TaskKind::regression) throw contract_error("fit_bayes_linear: regression targets required");
    if (data.size() == 0) {
        const Matrix empty(0, static_cast<Eigen::Index>(features.dim()));
        return fit_bayes_linear(empty, Vector(0), prior_precision, noise_variance);
    }
    return fit_bayes_linear(features(data.inputs), data.targets, prior_precision, noise_variance);
}

// Rank-one conjugate update with a single observation (Kalman form).
inline WeightPosterior update_bayes_linear(WeightPosterior post, const Vector& phi, double y) {
    const Vector s_phi = post.covariance * phi;
    const double denom = post.noise_variance + phi.dot(s_phi);
    const Vector gain = s_phi / denom;
    post.mean += gain * (y - phi.dot(post.mean));
    post.covariance -= gain * s_phi.transpose();
    post.covariance = symmetrized(post.covariance);
    post.precision.noalias() += phi * phi.transpose() / post.noise_variance;
    return post;
}

// Softmax probabilities for each row of logits.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix p = logits;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double m = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

inline Matrix glm_weight_matrix(const Vector& w, std::size_t classes) {
    const auto d = static_cast<Eigen::Index>(static_cast<std::size_t>(w.size()) / classes);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), static_cast<Eigen::Index>(classes), d);
}

inline Matrix glm_probabilities(const Vector& w, const Matrix& phi, std::size_t classes) {
    return softmax_rows(phi * glm_weight_matrix(w, classes).transpose());
}

inline double glm_negative_log_joint(const Vector& w, const Matrix& phi, const std::vector<std::size_t>& labels,
                                     std::size_t classes, double prior_precision) {
    const Matrix logits = phi * glm_weight_matrix(w, classes).transpose();
    double nll = 0.5 * prior_precision * w.squaredNorm();
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        nll += lse - logits(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
    }
    return nll;
}

inline Vector glm_gradient(const Vector& w, const Matrix& phi, const std::vector<std::size_t>& labels,
                           std::size_t classes, double prior_precision) {
    Matrix resid = glm_probabilities(w, phi, classes);
    for (Eigen::Index i = 0; i < resid.rows(); ++i) resid(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
    const Matrix g = resid.transpose() * phi;  // C × D
    Vector out = prior_precision * w;
    for (Eigen::Index c = 0; c < g.rows(); ++c) out.segment(c * g.cols(), g.cols()) += g.row(c).transpose();
    return out;
}

// Sum of A(z_i) ⊗ φ_i φ_iᵀ over rows, with A(z) = diag(p) − p pᵀ.
inline Matrix glm_fisher_sum(const Matrix& probs, const Matrix& phi) {
    const Eigen::Index c = probs.cols();
    const Eigen::Index d = phi.cols();
    Matrix out = Matrix::Zero(c * d, c * d);
    for (Eigen::Index a = 0; a < c; ++a)
        for (Eigen::Index b = a; b < c; ++b) {
            Vector weights = -probs.col(a).cwiseProduct(probs.col(b));
            if (a == b) weights += probs.col(a);
            const Matrix block = phi.transpose() * weights.asDiagonal() * phi;
            out.block(a * d, b * d, d, d) = block;
            if (a != b) out.block(b * d, a * d, d, d) = block.transpose();
        }
    return out;
}

inline Matrix glm_ggn_hessian(const Vector& w, const Matrix& phi, std::size_t classes, double prior_precision) {
    Matrix h = glm_fisher_sum(glm_probabilities(w, phi, classes), phi);
    h.diagonal().array() += prior_precision;
    return h;
}

struct NewtonOptions {
    std::size_t max_steps = 500;
    double gradient_tolerance = 1e-6;
    Vector initial_weights;  // empty starts from zero
};

inline WeightPosterior fit_logistic_glm_laplace(const Matrix& phi, const std::vector<std::size_t>& labels,
                                                std::size_t classes, double prior_precision,
                                                const NewtonOptions& opts = {}) {
    if (classes < 2) throw contract_error("fit_logistic_glm_laplace: need at least two classes");
    if (!(prior_precision > 0)) throw contract_error("fit_logistic_glm_laplace: prior precision must be positive");
    if (static_cast<std::size_t>(phi.rows()) != labels.size()) throw contract_error("fit_logistic_glm_laplace: row mismatch");
    const auto p = static_cast<Eigen::Index>(classes) * phi.cols();
    Vector w = Vector::Zero(p);
    if (opts.initial_weights.size() == p) w = opts.initial_weights;
    else if (opts.initial_weights.size() != 0) throw contract_error("fit_logistic_glm_laplace: initial weights have wrong length");
    double f = glm_negative_log_joint(w, phi, labels, classes, prior_precision);
    Vector g = glm_gradient(w, phi, labels, classes, prior_precision);
    std::size_t step = 0;
    bool converged = g.norm() < opts.gradient_tolerance;
    for (; step < opts.max_steps && !converged; ++step) {
        const auto chol = cholesky(glm_ggn_hessian(w, phi, classes, prior_precision), "GLM Hessian");
        const Vector dir = -chol.solve(g);
        // A Newton decrement at rounding level means the objective cannot improve further.
        if (-g.dot(dir) <= 1e-13 * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }
        double t = 1.0;
        Vector trial = w + dir;
        double ft = glm_negative_log_joint(trial, phi, labels, classes, prior_precision);
        while (ft > f + 1e-4 * t * g.dot(dir) && t > 1e-12) {
            t *= 0.5;
            trial = w + t * dir;
            ft = glm_negative_log_joint(trial, phi, labels, classes, prior_precision);
        }
        w = trial;
        f = ft;
        g = glm_gradient(w, phi, labels, classes, prior_precision);
        converged = g.norm() < opts.gradient_tolerance;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fit_logistic_glm_laplace: no convergence after " << step << " Newton steps; |grad| = " << g.norm()
            << ", objective = " << f << ", |w| = " << w.norm();
        throw fit_error(msg.str());
    }
    WeightPosterior post;
    post.mean = w;
    post.precision = glm_ggn_hessian(w, phi, classes, prior_precision);
    post.covariance = detail::covariance_from_precision(post.precision);
    post.prior_precision = prior_precision;
    post.num_outputs = classes;
    return post;
}

inline std::vector<std::size_t> class_labels(const Dataset& data) {
    std::vector<std::size_t> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data.label(i);
    return labels;
}

inline WeightPosterior fit_logistic_glm_laplace(const Dataset& data, const FeatureMap& features,
                                                double prior_precision, const NewtonOptions& opts = {}) {
    if (data.kind != TaskKind::classification) throw contract_error("fit_logistic_glm_laplace: classification data required");
    const Matrix phi = data.size() ? features(data.inputs) : Matrix(0, static_cast<Eigen::Index>(features.dim()));
    return fit_logistic_glm_laplace(phi, class_labels(data), data.num_classes, prior_precision, opts);
}

} // namespace infoacq
