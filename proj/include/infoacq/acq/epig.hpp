#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "../errors.hpp"
#include "../log.hpp"
#include "../models/posterior.hpp"
#include "../models/predictive.hpp"
#include "../rng.hpp"
#include "batchbald.hpp"
#include "scores.hpp"

namespace infoacq {

// (1/M) Σ_targets I[y; y*] under the member mixture.
inline ScoreVector epig_scores(const PredictionCube& pool, const PredictionCube& targets) {
    if (pool.members() != targets.members() || pool.sample_seed() != targets.sample_seed() ||
        pool.classes() != targets.classes())
        throw contract_error("epig_scores: pool and target cubes must share parameter samples");
    const auto k = static_cast<Eigen::Index>(pool.members());
    const auto c = static_cast<Eigen::Index>(pool.classes());
    const auto m = static_cast<Eigen::Index>(targets.points());
    if (m == 0) throw contract_error("epig_scores: empty target set");
    Matrix target_block(k, m * c);
    Matrix target_mean(m, c);
    for (Eigen::Index j = 0; j < m; ++j) {
        target_block.middleCols(j * c, c) = targets.point(static_cast<std::size_t>(j));
        target_mean.row(j) = target_block.middleCols(j * c, c).colwise().mean();
    }
    Vector s(static_cast<Eigen::Index>(pool.points()));
    for (std::size_t i = 0; i < pool.points(); ++i) {
        const auto block = pool.point(i);
        const Vector mean = block.colwise().mean().transpose();
        const Matrix joint = block.transpose() * target_block / static_cast<double>(k);  // C × (M·C)
        double total = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index a = 0; a < c; ++a)
                for (Eigen::Index b = 0; b < c; ++b) {
                    const double pj = joint(a, j * c + b);
                    if (pj > 0.0) total += pj * (std::log(pj) - safe_log(mean(a) * target_mean(j, b)));
                }
        s(static_cast<Eigen::Index>(i)) = clamp_nonnegative(total / static_cast<double>(m), "epig");
    }
    return {s, "epig"};
}

template <class M>
concept SamplingModel = requires(const M& model, Rng& rng, const typename M::Parameter& theta,
                                 const typename M::Input& x, const typename M::Label& y) {
    { model.draw_parameter(rng) } -> std::convertible_to<typename M::Parameter>;
    { model.log_likelihood(theta, x, y) } -> std::convertible_to<double>;
    { model.sample_label(theta, x, rng) } -> std::convertible_to<typename M::Label>;
};

namespace detail {
inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}
} // namespace detail

// Nested Monte Carlo EPIG: K inner parameter draws, M outer (x*, y, y*) draws.
template <SamplingModel Model, class TargetSampler>
MonteCarloEstimate epig_nested_mc(const Model& model, const typename Model::Input& x, TargetSampler&& target_sampler,
                                  std::size_t k, std::size_t m, std::uint64_t seed) {
    if (k == 0 || m == 0) throw contract_error("epig_nested_mc: K and M must be positive");
    Rng rng = make_rng(seed);
    std::vector<typename Model::Parameter> inner;
    inner.reserve(k);
    for (std::size_t i = 0; i < k; ++i) inner.push_back(model.draw_parameter(rng));
    std::vector<double> lx(k), lt(k), both(k);
    double sum = 0.0, sum_sq = 0.0;
    const double log_k = std::log(static_cast<double>(k));
    for (std::size_t j = 0; j < m; ++j) {
        const typename Model::Input xt = target_sampler(rng);
        const auto theta = model.draw_parameter(rng);
        const auto y = model.sample_label(theta, x, rng);
        const auto yt = model.sample_label(theta, xt, rng);
        for (std::size_t i = 0; i < k; ++i) {
            lx[i] = model.log_likelihood(inner[i], x, y);
            lt[i] = model.log_likelihood(inner[i], xt, yt);
            both[i] = lx[i] + lt[i];
        }
        const double term = log_k + detail::log_sum_exp(both) - detail::log_sum_exp(lx) - detail::log_sum_exp(lt);
        sum += term;
        sum_sq += term * term;
    }
    const double md = static_cast<double>(m);
    const double mean = sum / md;
    const double var = m > 1 ? std::max(0.0, (sum_sq - md * mean * mean) / (md - 1.0)) : 0.0;
    return {mean, std::sqrt(var / md)};
}

// w(x) = Σ_y p*(y) p̂(y|x) / p̂_pool(y); sums to the pool size.
inline ScoreVector target_resample_weights(const PredictionCube& pool, const Categorical& target_classes) {
    if (pool.points() == 0) throw contract_error("target_resample_weights: empty pool");
    if (target_classes.size() != pool.classes()) throw contract_error("target_resample_weights: class count mismatch");
    const auto n = static_cast<Eigen::Index>(pool.points());
    Matrix means(n, static_cast<Eigen::Index>(pool.classes()));
    for (Eigen::Index i = 0; i < n; ++i) means.row(i) = pool.mean(static_cast<std::size_t>(i)).transpose();
    const Vector marginal = means.colwise().mean().transpose();
    Vector ratio = Vector::Zero(marginal.size());
    for (Eigen::Index y = 0; y < marginal.size(); ++y) {
        const double target = target_classes[static_cast<std::size_t>(y)];
        if (target == 0.0) continue;
        if (!(marginal(y) > 0.0)) throw domain_error("target_resample_weights: class with zero estimated pool mass");
        ratio(y) = target / marginal(y);
    }
    return {means * ratio, "target-weights"};
}

inline double gaussian_bald_variance(double mu_variance, double noise_variance) {
    return 0.5 * std::log1p(std::max(mu_variance, 0.0) / noise_variance);
}

// JEPIG for a conjugate linear-Gaussian model:
// BALD(x | D) − E_pseudo-labels BALD(x | D ∪ pseudo-labelled eval set).
// The conditional covariance is independent of the pseudo-label values, so the expectation is exact.
inline MonteCarloEstimate jepig_conjugate(const WeightPosterior& post, const Vector& candidate, const Matrix& eval_features,
                                          std::size_t pseudo_draws, std::uint64_t /*seed*/) {
    if (!post.conjugate || !(post.noise_variance > 0))
        throw unsupported_error("jepig_conjugate: only conjugate linear-Gaussian models are supported");
    if (pseudo_draws == 0) throw contract_error("jepig_conjugate: need at least one pseudo-label draw");
    const double before = gaussian_bald_variance(candidate.dot(post.covariance * candidate), post.noise_variance);
    if (eval_features.rows() == 0) return {0.0, 0.0};
    Matrix precision = post.precision;
    precision.noalias() += eval_features.transpose() * eval_features / post.noise_variance;
    const auto chol = cholesky(precision, "JEPIG conditional precision");
    const double after = gaussian_bald_variance(candidate.dot(chol.solve(candidate)), post.noise_variance);
    return {before - after, 0.0};
}

} // namespace infoacq
