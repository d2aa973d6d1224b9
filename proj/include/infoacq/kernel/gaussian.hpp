#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "../models/predictive.hpp"

namespace infoacq {

inline Matrix noisy_covariance(const GaussianPredictive& pred) {
    pred.validate();
    Matrix c = pred.cov;
    c.diagonal().array() += pred.noise_variance;
    return c;
}

// ½ ln((μ-variance + σ²) / σ²).
inline double gaussian_bald(double mu_variance, double noise_variance) {
    if (!(noise_variance > 0)) throw contract_error("gaussian_bald: noise variance must be positive");
    return 0.5 * std::log1p(std::max(mu_variance, 0.0) / noise_variance);
}

inline double gaussian_bald(const GaussianPredictive& pred) {
    if (pred.size() != 1) throw contract_error("gaussian_bald: expected a single query point");
    return gaussian_bald(pred.cov(0, 0), pred.noise_variance);
}

// Joint information gain ½ ln det(I + Cov/σ²) over all query points.
inline double gaussian_joint_bald(const GaussianPredictive& pred) {
    pred.validate();
    Matrix a = pred.cov / pred.noise_variance;
    a.diagonal().array() += 1.0;
    return 0.5 * logdet_spd(a, "joint BALD");
}

inline double gaussian_joint_entropy(const GaussianPredictive& pred) {
    const Matrix c = noisy_covariance(pred);
    const double m = static_cast<double>(pred.size());
    return 0.5 * logdet_spd(c, "joint entropy") + 0.5 * m * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

// I[y; y*] for a 2-point predictive ordered (x, x*).
inline double gaussian_epig(const GaussianPredictive& pred) {
    if (pred.size() != 2) throw contract_error("gaussian_epig: expected a predictive over (x, x*)");
    const Matrix c = noisy_covariance(pred);
    const double prod = c(0, 0) * c(1, 1);
    const double det = prod - c(0, 1) * c(1, 0);
    if (!(det > 0)) throw numeric_error("gaussian_epig: degenerate predictive determinant");
    return 0.5 * std::log(prod / det);
}

// I[y_batch; y_targets] from a joint predictive over both sets.
inline double gaussian_batch_epig(const GaussianPredictive& pred, const std::vector<std::size_t>& batch,
                                  const std::vector<std::size_t>& targets) {
    std::vector<std::size_t> both = batch;
    both.insert(both.end(), targets.begin(), targets.end());
    const double hb = logdet_spd(noisy_covariance(pred.select(batch)), "batch covariance");
    const double ht = logdet_spd(noisy_covariance(pred.select(targets)), "target covariance");
    const double hj = logdet_spd(noisy_covariance(pred.select(both)), "joint covariance");
    return std::max(0.0, 0.5 * (hb + ht - hj));
}

} // namespace infoacq
