#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "../acq/scores.hpp"
#include "../errors.hpp"
#include "../linalg.hpp"
#include "../models/posterior.hpp"

namespace infoacq {

struct KernelMatrix {
    Matrix gram;
    double jitter_applied = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(gram.rows()); }
};

inline KernelMatrix make_kernel_matrix(Matrix gram) {
    if (gram.rows() != gram.cols()) throw contract_error("KernelMatrix: not square");
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw contract_error("KernelMatrix: not symmetric");
    KernelMatrix k;
    k.gram = symmetrized(gram);
    k.jitter_applied = cholesky(k.gram, "kernel matrix").jitter;
    return k;
}

// (1/K) Σ_k (μ_k − μ̄)(μ_k − μ̄)ᵀ from member predictions (n × K).
inline KernelMatrix empirical_pred_kernel(const Matrix& predictions) {
    if (predictions.cols() < 1) throw contract_error("empirical_pred_kernel: need at least one member");
    const Matrix centered = predictions.colwise() - predictions.rowwise().mean();
    return make_kernel_matrix(centered * centered.transpose() / static_cast<double>(predictions.cols()));
}

// ∇_Ψ μ̃ Cov[Ψ] ∇_Ψ μ̃ᵀ with a one-trial multinomial Ψ over members with probabilities q.
inline KernelMatrix multinomial_psi_kernel(const Matrix& predictions, const Vector& q) {
    if (q.size() != predictions.cols()) throw contract_error("multinomial_psi_kernel: weight length mismatch");
    const Matrix cov = Matrix(q.asDiagonal()) - q * q.transpose();
    return make_kernel_matrix(predictions * cov * predictions.transpose());
}

// Same with Ψ ~ Dirichlet(α): Cov = (diag(α̃) − α̃α̃ᵀ) / (1 + α₀).
inline KernelMatrix dirichlet_psi_kernel(const Matrix& predictions, const Vector& alpha) {
    if (alpha.size() != predictions.cols()) throw contract_error("dirichlet_psi_kernel: concentration length mismatch");
    if ((alpha.array() <= 0).any()) throw contract_error("dirichlet_psi_kernel: concentrations must be positive");
    const double a0 = alpha.sum();
    const Vector mean = alpha / a0;
    const Matrix cov = (Matrix(mean.asDiagonal()) - mean * mean.transpose()) / (1.0 + a0);
    return make_kernel_matrix(predictions * cov * predictions.transpose());
}

// G Σ Gᵀ.
inline KernelMatrix posterior_gradient_kernel(const Matrix& covariance, const Matrix& grads) {
    if (grads.cols() != covariance.rows()) throw contract_error("posterior_gradient_kernel: dimension mismatch");
    return make_kernel_matrix(grads * covariance * grads.transpose());
}

inline KernelMatrix posterior_gradient_kernel(const WeightPosterior& post, const Matrix& grads) {
    return posterior_gradient_kernel(post.covariance, grads);
}

// Greedy maximization of ½ ln det(K_S + σ² I). Gains are reported relative to σ², i.e. as
// increments of ½ ln det(I + K_S / σ²).
inline AcquisitionBatch logdet_batch_select(const KernelMatrix& kernel, double noise_variance, std::size_t batch_size,
                                            const std::vector<std::uint8_t>& allowed = {}) {
    if (noise_variance < 0) throw contract_error("logdet_batch_select: negative noise");
    const auto n = static_cast<Eigen::Index>(kernel.size());
    std::vector<std::uint8_t> open = allowed.empty() ? std::vector<std::uint8_t>(kernel.size(), 1) : allowed;
    if (open.size() != kernel.size()) throw contract_error("logdet_batch_select: mask length mismatch");
    const double floor = noise_variance > 0 ? noise_variance : 1.0;
    Vector residual = kernel.gram.diagonal().array() + kernel.jitter_applied + noise_variance;
    Matrix factors(n, 0);
    AcquisitionBatch out;
    for (std::size_t step = 0; step < batch_size; ++step) {
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < n; ++i)
            if (open[static_cast<std::size_t>(i)] && (best < 0 || residual(i) > residual(best))) best = i;
        if (best < 0) break;
        if (!(residual(best) > 0)) throw numeric_error("logdet_batch_select: singular submatrix after jitter");
        out.indices.push_back(static_cast<std::size_t>(best));
        out.scores_at_selection.push_back(0.5 * std::log(residual(best) / floor));
        open[static_cast<std::size_t>(best)] = 0;
        const double pivot = std::sqrt(residual(best));
        Vector column = kernel.gram.col(best);
        if (factors.cols() > 0) column -= factors * factors.row(best).transpose();
        column /= pivot;
        factors.conservativeResize(Eigen::NoChange, factors.cols() + 1);
        factors.col(factors.cols() - 1) = column;
        residual -= column.cwiseAbs2();
        residual(best) = 0.0;
    }
    return out;
}

} // namespace infoacq
