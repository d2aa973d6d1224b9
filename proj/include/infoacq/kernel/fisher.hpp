#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "../acq/scores.hpp"
#include "../errors.hpp"
#include "../linalg.hpp"
#include "../models/posterior.hpp"
#include "../rng.hpp"
#include "kernels.hpp"

namespace infoacq {

inline constexpr std::size_t max_expanded_dim = 512;

enum class FisherLayout { glm_kronecker, dense };

// Per-point Fisher blocks plus the training Hessian. GLM blocks are kept as (A(z), φ) pairs and
// only expanded to p×p on request.
class FisherBundle {
public:
    static FisherBundle glm(Matrix hessian, Matrix probs, Matrix features) {
        if (probs.rows() != features.rows()) throw contract_error("FisherBundle: probs/features row mismatch");
        if (hessian.rows() != probs.cols() * features.cols())
            throw contract_error("FisherBundle: Hessian does not match C·D");
        FisherBundle b(std::move(hessian), FisherLayout::glm_kronecker);
        b.probs_ = std::move(probs);
        b.features_ = std::move(features);
        return b;
    }
    static FisherBundle glm(const WeightPosterior& post, const Matrix& features) {
        return glm(post.precision, glm_probabilities(post.mean, features, post.num_outputs), features);
    }
    static FisherBundle dense(Matrix hessian, std::vector<Matrix> blocks) {
        for (const Matrix& f : blocks)
            if (f.rows() != hessian.rows() || f.cols() != hessian.cols())
                throw contract_error("FisherBundle: block shape mismatch");
        FisherBundle b(std::move(hessian), FisherLayout::dense);
        b.blocks_ = std::move(blocks);
        return b;
    }

    [[nodiscard]] FisherLayout layout() const noexcept { return layout_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(hessian_.rows()); }
    [[nodiscard]] std::size_t points() const noexcept {
        return layout_ == FisherLayout::dense ? blocks_.size() : static_cast<std::size_t>(features_.rows());
    }
    [[nodiscard]] const Matrix& hessian() const noexcept { return hessian_; }
    [[nodiscard]] const JitteredCholesky& hessian_cholesky() const noexcept { return hessian_chol_; }

    // A(z_i) for a GLM bundle.
    [[nodiscard]] Matrix curvature(std::size_t i) const {
        check(i);
        if (layout_ != FisherLayout::glm_kronecker) throw unsupported_error("FisherBundle: curvature needs GLM layout");
        const Vector p = probs_.row(static_cast<Eigen::Index>(i)).transpose();
        return Matrix(p.asDiagonal()) - p * p.transpose();
    }

    [[nodiscard]] Matrix block(std::size_t i) const {
        check(i);
        if (layout_ == FisherLayout::dense) return blocks_[i];
        if (dim() > max_expanded_dim) throw unsupported_error("FisherBundle: refusing to expand a block with p > 512");
        const Matrix a = curvature(i);
        const Vector x = features_.row(static_cast<Eigen::Index>(i)).transpose();
        const Matrix xx = x * x.transpose();
        const Eigen::Index d = x.size();
        Matrix out(a.rows() * d, a.cols() * d);
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * d, c * d, d, d) = a(r, c) * xx;
        return out;
    }

    // Rows B with Bᵀ B = F(x_i).
    [[nodiscard]] Matrix factor(std::size_t i) const {
        check(i);
        if (layout_ == FisherLayout::dense) return psd_factor(blocks_[i]).transpose();
        const Matrix s = psd_factor(curvature(i));
        const Eigen::Index d = features_.cols();
        const auto x = features_.row(static_cast<Eigen::Index>(i));
        Matrix out = Matrix::Zero(s.cols(), s.rows() * d);
        for (Eigen::Index r = 0; r < s.cols(); ++r)
            for (Eigen::Index c = 0; c < s.rows(); ++c) out.block(r, c * d, 1, d) = s(c, r) * x;
        return out;
    }

    [[nodiscard]] Matrix batch_factor(const std::vector<std::size_t>& batch) const {
        std::vector<Matrix> parts;
        Eigen::Index rows = 0;
        for (std::size_t i : batch) {
            parts.push_back(factor(i));
            rows += parts.back().rows();
        }
        Matrix out(rows, hessian_.rows());
        Eigen::Index at = 0;
        for (const Matrix& p : parts) {
            out.middleRows(at, p.rows()) = p;
            at += p.rows();
        }
        return out;
    }

private:
    FisherBundle(Matrix hessian, FisherLayout layout) : hessian_(symmetrized(hessian)), layout_(layout) {
        hessian_chol_ = cholesky(hessian_, "training Hessian");
    }
    void check(std::size_t i) const {
        if (i >= points()) throw contract_error("FisherBundle: point index out of range");
    }

    Matrix hessian_;
    JitteredCholesky hessian_chol_;
    FisherLayout layout_;
    Matrix probs_;
    Matrix features_;
    std::vector<Matrix> blocks_;
};

struct FisherBounds {
    double logdet = 0.0;
    double trace = 0.0;
};

// ½ ln det(F_batch H⁻¹ + I) and its upper bound ½ tr(F_batch H⁻¹), evaluated through low-rank factors.
inline FisherBounds fisher_eig_bounds(const FisherBundle& bundle, const std::vector<std::size_t>& batch) {
    if (batch.empty()) return {};
    const Matrix b = bundle.batch_factor(batch);
    const Matrix hb = bundle.hessian_cholesky().solve(b.transpose());
    Matrix w = symmetrized(b * hb);
    FisherBounds out;
    out.trace = 0.5 * std::max(0.0, w.trace());
    w.diagonal().array() += 1.0;
    out.logdet = 0.5 * std::max(0.0, logdet_spd(w, "Fisher EIG"));
    return out;
}

// ½ tr(F̄* (F_batch + H)⁻¹); smaller means more target information gained.
inline double fisher_epig_trace(const FisherBundle& bundle, const Matrix& target_fisher,
                                const std::vector<std::size_t>& batch) {
    if (target_fisher.rows() != bundle.hessian().rows() || target_fisher.cols() != bundle.hessian().cols())
        throw contract_error("fisher_epig_trace: target Fisher shape mismatch");
    const auto& chol = bundle.hessian_cholesky();
    const double base = whiten(chol, target_fisher).trace();
    if (batch.empty()) return 0.5 * std::max(0.0, base);
    const Matrix b = bundle.batch_factor(batch);
    const Matrix hb = chol.solve(b.transpose());
    Matrix inner = symmetrized(b * hb);
    inner.diagonal().array() += 1.0;
    const auto inner_chol = cholesky(inner, "Fisher EPIG");
    const Matrix reduction = inner_chol.solve(hb.transpose() * target_fisher * hb);
    return 0.5 * std::max(0.0, base - reduction.trace());
}

// (1/M) Σ_j A(z_j) ⊗ φ_j φ_jᵀ over target inputs.
inline Matrix glm_average_fisher(const WeightPosterior& post, const Matrix& target_features) {
    if (target_features.rows() == 0) throw contract_error("glm_average_fisher: empty target set");
    const Matrix probs = glm_probabilities(post.mean, target_features, post.num_outputs);
    return glm_fisher_sum(probs, target_features) / static_cast<double>(target_features.rows());
}

// ½ ln det(J_S H⁻¹ J_Sᵀ + I).
inline double similarity_logdet(const FisherBundle& bundle, const Matrix& jacobians,
                                const std::vector<std::size_t>& batch) {
    if (jacobians.cols() != bundle.hessian().rows()) throw contract_error("similarity_logdet: Jacobian width mismatch");
    if (batch.empty()) return 0.0;
    const Matrix js = jacobians(batch, Eigen::all);
    Matrix s = symmetrized(js * bundle.hessian_cholesky().solve(js.transpose()));
    s.diagonal().array() += 1.0;
    return 0.5 * logdet_spd(s, "similarity matrix");
}

// ½ ln det((J_Sᵀ J_S + H) H⁻¹).
inline double weight_space_logdet(const FisherBundle& bundle, const Matrix& jacobians,
                                  const std::vector<std::size_t>& batch) {
    if (jacobians.cols() != bundle.hessian().rows()) throw contract_error("weight_space_logdet: Jacobian width mismatch");
    const Matrix js = jacobians(batch, Eigen::all);
    const Matrix post = bundle.hessian() + js.transpose() * js;
    return 0.5 * (logdet_spd(post, "posterior precision") - bundle.hessian_cholesky().logdet());
}

inline KernelMatrix similarity_kernel(const FisherBundle& bundle, const Matrix& jacobians) {
    if (jacobians.cols() != bundle.hessian().rows()) throw contract_error("similarity_kernel: Jacobian width mismatch");
    return make_kernel_matrix(jacobians * bundle.hessian_cholesky().solve(jacobians.transpose()));
}

// Q_i(a, b) = φ_iᵀ M_ab φ_i for a symmetric class-major p×p matrix M.
inline std::vector<Matrix> glm_point_quadratic(const Matrix& m, const Matrix& features, std::size_t classes) {
    const Eigen::Index d = features.cols();
    const auto c = static_cast<Eigen::Index>(classes);
    if (m.rows() != c * d || m.cols() != c * d) throw contract_error("glm_point_quadratic: matrix does not match C·D");
    std::vector<Matrix> out(static_cast<std::size_t>(features.rows()), Matrix(c, c));
    for (Eigen::Index a = 0; a < c; ++a)
        for (Eigen::Index b = a; b < c; ++b) {
            const Vector v = (features * m.block(a * d, b * d, d, d)).cwiseProduct(features).rowwise().sum();
            for (Eigen::Index i = 0; i < features.rows(); ++i) {
                out[static_cast<std::size_t>(i)](a, b) = v(i);
                out[static_cast<std::size_t>(i)](b, a) = v(i);
            }
        }
    return out;
}

enum class GlmFisherObjective { eig_logdet, eig_trace, epig_trace };

// Single-point values of the chosen objective under precision H: logdet and trace bounds of the EIG,
// or the EPIG trace proxy ½ tr(F̄* (F_x + H)⁻¹) (lower is better).
inline Vector glm_fisher_point_scores(const Matrix& precision, const Matrix& probs, const Matrix& features,
                                      GlmFisherObjective objective, const Matrix& target_fisher = Matrix()) {
    const auto classes = static_cast<std::size_t>(probs.cols());
    const auto chol = cholesky(precision, "GLM precision");
    const Matrix cov = symmetrized(chol.solve(Matrix::Identity(precision.rows(), precision.cols())));
    const auto q = glm_point_quadratic(cov, features, classes);
    std::vector<Matrix> r;
    double base = 0.0;
    if (objective == GlmFisherObjective::epig_trace) {
        if (target_fisher.rows() != precision.rows()) throw contract_error("glm_fisher_point_scores: target Fisher shape mismatch");
        r = glm_point_quadratic(symmetrized(cov * target_fisher * cov), features, classes);
        base = (target_fisher * cov).trace();
    }
    Vector out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const Vector p = probs.row(i).transpose();
        const Matrix s = psd_factor(Matrix(p.asDiagonal()) - p * p.transpose());
        Matrix w = symmetrized(s.transpose() * q[static_cast<std::size_t>(i)] * s);
        if (objective == GlmFisherObjective::eig_trace) {
            out(i) = 0.5 * std::max(0.0, w.trace());
            continue;
        }
        w.diagonal().array() += 1.0;
        const auto inner = cholesky(w, "GLM point EIG");
        if (objective == GlmFisherObjective::eig_logdet) {
            out(i) = 0.5 * std::max(0.0, inner.logdet());
        } else {
            const Matrix reduction = inner.solve(Matrix(s.transpose() * r[static_cast<std::size_t>(i)] * s));
            out(i) = 0.5 * std::max(0.0, base - reduction.trace());
        }
    }
    return out;
}

// Greedy batch for a GLM Laplace posterior. The logdet and EPIG objectives fold each chosen Fisher block
// into the precision before the next pick; the trace bound is additive and needs no update.
inline AcquisitionBatch glm_fisher_greedy(const Matrix& precision, const Matrix& probs, const Matrix& features,
                                          std::size_t batch_size, GlmFisherObjective objective,
                                          const Matrix& target_fisher = Matrix()) {
    const auto n = static_cast<std::size_t>(features.rows());
    const Eigen::Index d = features.cols();
    Matrix h = precision;
    std::vector<std::uint8_t> open(n, 1);
    AcquisitionBatch out;
    Vector values;
    for (std::size_t step = 0; step < std::min(batch_size, n); ++step) {
        if (step == 0 || objective != GlmFisherObjective::eig_trace)
            values = glm_fisher_point_scores(h, probs, features, objective, target_fisher);
        const double sign = objective == GlmFisherObjective::epig_trace ? -1.0 : 1.0;
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (open[i] && (best == n || sign * values(static_cast<Eigen::Index>(i)) > sign * values(static_cast<Eigen::Index>(best))))
                best = i;
        out.indices.push_back(best);
        out.scores_at_selection.push_back(values(static_cast<Eigen::Index>(best)));
        open[best] = 0;
        if (objective == GlmFisherObjective::eig_trace) continue;
        const Vector p = probs.row(static_cast<Eigen::Index>(best)).transpose();
        const Matrix a = Matrix(p.asDiagonal()) - p * p.transpose();
        const Vector x = features.row(static_cast<Eigen::Index>(best)).transpose();
        const Matrix xx = x * x.transpose();
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) h.block(r * d, c * d, d, d) += a(r, c) * xx;
    }
    return out;
}

// Gradients of the negative log-likelihood for every label: row y is (p − e_y) ⊗ φ, class-major.
inline Matrix glm_label_jacobians(const Vector& probs, const Vector& features) {
    const Eigen::Index c = probs.size();
    const Eigen::Index d = features.size();
    Matrix out(c, c * d);
    for (Eigen::Index y = 0; y < c; ++y)
        for (Eigen::Index k = 0; k < c; ++k)
            out.block(y, k * d, 1, d) = (probs(k) - (k == y ? 1.0 : 0.0)) * features.transpose();
    return out;
}

// One gradient row per point at a label drawn from the model's predictive.
inline Matrix glm_sampled_jacobians(const Matrix& probs, const Matrix& features, std::uint64_t seed) {
    if (probs.rows() != features.rows()) throw contract_error("glm_sampled_jacobians: row mismatch");
    Rng rng = make_rng(seed);
    Matrix out(probs.rows(), probs.cols() * features.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const Vector p = probs.row(i).transpose();
        const auto y = static_cast<Eigen::Index>(categorical_draw(rng, p));
        out.row(i) = glm_label_jacobians(p, features.row(i).transpose()).row(y);
    }
    return out;
}

// ½ E_{y∼p} ‖∇ loss(y)‖².
inline double egl_score(const Vector& probs, const Matrix& label_jacobians) {
    if (probs.size() != label_jacobians.rows()) throw contract_error("egl_score: label count mismatch");
    return 0.5 * probs.dot(label_jacobians.rowwise().squaredNorm());
}

// ½ ‖∇ loss(y_obs)‖²; the second-order trace term is not included.
inline double grand_score(const Matrix& label_jacobians, std::size_t observed) {
    if (observed >= static_cast<std::size_t>(label_jacobians.rows())) throw contract_error("grand_score: label out of range");
    return 0.5 * label_jacobians.row(static_cast<Eigen::Index>(observed)).squaredNorm();
}

inline ScoreVector egl_scores(const Matrix& probs, const Matrix& features) {
    Vector out(probs.rows());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const Vector p = probs.row(i).transpose();
        out(i) = egl_score(p, glm_label_jacobians(p, features.row(i).transpose()));
    }
    return {std::move(out), "egl"};
}

inline ScoreVector grand_scores(const Matrix& probs, const Matrix& features, const std::vector<std::size_t>& labels) {
    if (labels.size() != static_cast<std::size_t>(probs.rows())) throw contract_error("grand_scores: label count mismatch");
    Vector out(probs.rows());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const Vector p = probs.row(i).transpose();
        out(i) = grand_score(glm_label_jacobians(p, features.row(i).transpose()), labels[static_cast<std::size_t>(i)]);
    }
    return {std::move(out), "grand"};
}

} // namespace infoacq
