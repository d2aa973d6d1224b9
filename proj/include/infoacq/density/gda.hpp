#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "../acq/scores.hpp"
#include "../errors.hpp"
#include "../infomath.hpp"
#include "../linalg.hpp"
#include "../log.hpp"
#include "../models/predictive.hpp"

namespace infoacq {

inline constexpr double gda_jitter_scale = 1e-6;

enum class CovarianceMode { per_class, shared };

inline std::string to_string(CovarianceMode m) { return m == CovarianceMode::per_class ? "per-class" : "shared"; }

struct GdaFitStats {
    std::size_t samples_visited = 0;
    std::size_t accumulate_ops = 0;  // multiply-adds spent on the moment pass
};

// Class-conditional Gaussians q(z|y) with class-frequency priors q(y).
class GdaModel {
public:
    GdaModel(std::vector<Vector> means, std::vector<Matrix> covariances, Categorical priors, CovarianceMode mode,
             GdaFitStats stats)
        : means_(std::move(means)), covs_(std::move(covariances)), priors_(std::move(priors)), mode_(mode), stats_(stats) {
        if (means_.size() != priors_.size()) throw contract_error("GdaModel: prior/mean count mismatch");
        if (covs_.size() != (mode_ == CovarianceMode::shared ? 1 : means_.size()))
            throw contract_error("GdaModel: covariance count does not match mode");
        for (const Matrix& c : covs_) {
            Eigen::LLT<Matrix> llt(symmetrized(c));
            if (!c.allFinite() || llt.info() != Eigen::Success) throw fit_error("GdaModel: covariance is degenerate beyond jitter");
            const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
            factors_.push_back(std::move(llt));
            log_norms_.push_back(-0.5 * (static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) + logdet));
        }
    }

    [[nodiscard]] std::size_t classes() const noexcept { return means_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return means_.empty() ? 0 : static_cast<std::size_t>(means_[0].size()); }
    [[nodiscard]] CovarianceMode mode() const noexcept { return mode_; }
    [[nodiscard]] const Categorical& priors() const noexcept { return priors_; }
    [[nodiscard]] const Vector& mean(std::size_t c) const { return means_.at(c); }
    [[nodiscard]] const Matrix& covariance(std::size_t c) const { return covs_.at(slot(c)); }
    [[nodiscard]] const GdaFitStats& stats() const noexcept { return stats_; }

    [[nodiscard]] double log_class_density(const Vector& z, std::size_t c) const {
        if (static_cast<std::size_t>(z.size()) != dim()) throw contract_error("GdaModel: feature dimension mismatch");
        const auto& llt = factors_[slot(c)];
        const Vector r = llt.matrixL().solve(z - means_.at(c));
        return log_norms_[slot(c)] - 0.5 * r.squaredNorm();
    }

private:
    [[nodiscard]] std::size_t slot(std::size_t c) const { return mode_ == CovarianceMode::shared ? 0 : c; }

    std::vector<Vector> means_;
    std::vector<Matrix> covs_;
    Categorical priors_;
    CovarianceMode mode_;
    GdaFitStats stats_;
    std::vector<Eigen::LLT<Matrix>> factors_;
    std::vector<double> log_norms_;
};

// Single pass over the data accumulating per-class means and scatter (Welford); MLE covariances plus
// 1e-6·mean-diagonal jitter. Per-class mode falls back to shared when a class has ≤ D samples.
inline GdaModel fit_gda(const Matrix& features, const std::vector<std::size_t>& labels, CovarianceMode mode,
                        std::size_t classes = 0) {
    const auto n = static_cast<std::size_t>(features.rows());
    const auto d = features.cols();
    if (labels.size() != n) throw contract_error("fit_gda: label count mismatch");
    if (n == 0 || d == 0) throw contract_error("fit_gda: empty feature matrix");
    for (std::size_t y : labels) classes = std::max(classes, y + 1);
    std::vector<Vector> means(classes, Vector::Zero(d));
    std::vector<Matrix> scatter(classes, Matrix::Zero(d, d));
    std::vector<std::size_t> counts(classes, 0);
    GdaFitStats stats;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = labels[i];
        const Vector x = features.row(static_cast<Eigen::Index>(i)).transpose();
        ++counts[y];
        const Vector before = x - means[y];
        means[y] += before / static_cast<double>(counts[y]);
        scatter[y].noalias() += before * (x - means[y]).transpose();
        ++stats.samples_visited;
        stats.accumulate_ops += static_cast<std::size_t>(d * d + 2 * d);
    }
    for (std::size_t c = 0; c < classes; ++c)
        if (counts[c] == 0) throw fit_error("fit_gda: class " + std::to_string(c) + " has no samples");
    if (mode == CovarianceMode::per_class) {
        for (std::size_t c = 0; c < classes; ++c)
            if (counts[c] < static_cast<std::size_t>(d) + 1) {
                log(LogLevel::warning, "fit_gda: class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                                           " samples for dimension " + std::to_string(d) + ", using shared covariance");
                mode = CovarianceMode::shared;
                break;
            }
    }
    const auto jittered = [](Matrix cov) {
        cov = symmetrized(cov);
        const double scale = cov.diagonal().mean();
        cov.diagonal().array() += gda_jitter_scale * (scale > 0 ? scale : 1.0);
        return cov;
    };
    std::vector<Matrix> covs;
    if (mode == CovarianceMode::shared) {
        Matrix pooled = Matrix::Zero(d, d);
        for (const Matrix& s : scatter) pooled += s;
        covs.push_back(jittered(pooled / static_cast<double>(n)));
    } else {
        for (std::size_t c = 0; c < classes; ++c) covs.push_back(jittered(scatter[c] / static_cast<double>(counts[c])));
    }
    Vector priors(static_cast<Eigen::Index>(classes));
    for (std::size_t c = 0; c < classes; ++c) priors(static_cast<Eigen::Index>(c)) = static_cast<double>(counts[c]) / static_cast<double>(n);
    return GdaModel(std::move(means), std::move(covs), Categorical(priors), mode, stats);
}

// ln Σ_y q(z|y) q(y).
inline double log_marginal_density(const GdaModel& model, const Vector& z) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(model.classes());
    for (std::size_t c = 0; c < model.classes(); ++c) {
        terms[c] = std::log(model.priors()[c]) + model.log_class_density(z, c);
        best = std::max(best, terms[c]);
    }
    if (!std::isfinite(best)) return best;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - best);
    return best + std::log(sum);
}

inline Vector log_marginal_densities(const GdaModel& model, const Matrix& features) {
    Vector out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) out(i) = log_marginal_density(model, features.row(i).transpose());
    return out;
}

struct EntropyRmse {
    double rmse = 0.0;
    double bias = 0.0;  // mutual information
    double std = 0.0;   // spread of member entropies
};

// Error of member entropies against the predictive entropy: RMSE² = Var_ω H_ω + MI².
inline EntropyRmse entropy_rmse_decomposition(const PredictionCube& cube, std::size_t point) {
    if (!cube.consistent()) throw contract_error("entropy_rmse_decomposition: cube must be consistent");
    if (point >= cube.points()) throw contract_error("entropy_rmse_decomposition: point out of range");
    const double predictive = entropy(Categorical(cube.mean(point)));
    const std::size_t k = cube.members();
    std::vector<double> member(k);
    double mean = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
        member[m] = detail::entropy_unchecked(cube.member_probs(point, m), cube.classes());
        mean += member[m] / static_cast<double>(k);
    }
    double sq = 0.0, var = 0.0;
    for (double h : member) {
        sq += (predictive - h) * (predictive - h) / static_cast<double>(k);
        var += (h - mean) * (h - mean) / static_cast<double>(k);
    }
    return {std::sqrt(sq), predictive - mean, std::sqrt(var)};
}

} // namespace infoacq
