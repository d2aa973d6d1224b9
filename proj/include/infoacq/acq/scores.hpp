#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../infomath.hpp"
#include "../log.hpp"
#include "../models/predictive.hpp"

namespace infoacq {

struct ScoreVector {
    Vector scores;
    std::string tag;
    std::vector<std::uint8_t> finite_mask;  // 1 where the score may be selected

    ScoreVector() = default;
    ScoreVector(Vector values, std::string name) : scores(std::move(values)), tag(std::move(name)) {
        finite_mask.resize(static_cast<std::size_t>(scores.size()));
        for (Eigen::Index i = 0; i < scores.size(); ++i) finite_mask[static_cast<std::size_t>(i)] = std::isfinite(scores(i));
    }

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(scores.size()); }
    [[nodiscard]] bool valid(std::size_t i) const { return finite_mask[i] != 0; }
    [[nodiscard]] double operator[](std::size_t i) const { return scores(static_cast<Eigen::Index>(i)); }

    void mask(std::size_t i) { finite_mask[i] = 0; }
};

struct AcquisitionBatch {
    std::vector<std::size_t> indices;
    std::vector<double> scores_at_selection;

    [[nodiscard]] std::size_t size() const noexcept { return indices.size(); }
};

// Indices of valid entries ordered by descending value; ties keep the lower index first.
inline std::vector<std::size_t> descending_order(const Vector& values, const std::vector<std::uint8_t>& mask) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
    });
    return order;
}

inline AcquisitionBatch top_k(const ScoreVector& scores, std::size_t batch_size) {
    const auto order = descending_order(scores.scores, scores.finite_mask);
    AcquisitionBatch out;
    for (std::size_t r = 0; r < std::min(batch_size, order.size()); ++r) {
        out.indices.push_back(order[r]);
        out.scores_at_selection.push_back(scores[order[r]]);
    }
    return out;
}

namespace detail {
inline double member_mean_entropy(const PredictionCube& cube, std::size_t i) {
    double h = 0.0;
    for (std::size_t k = 0; k < cube.members(); ++k) h += detail::entropy_unchecked(cube.member_probs(i, k), cube.classes());
    return h / static_cast<double>(cube.members());
}
inline bool members_agree(const PredictionCube& cube, std::size_t i) {
    const auto block = cube.point(i);
    for (Eigen::Index k = 1; k < block.rows(); ++k)
        if (block.row(k) != block.row(0)) return false;
    return true;
}
inline double mean_entropy(const PredictionCube& cube, std::size_t i) {
    const Vector m = cube.mean(i);
    return detail::entropy_unchecked(m.data(), static_cast<std::size_t>(m.size()));
}
} // namespace detail

inline ScoreVector bald_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i)
        s(static_cast<Eigen::Index>(i)) =
            detail::members_agree(cube, i)
                ? 0.0
                : clamp_nonnegative(detail::mean_entropy(cube, i) - detail::member_mean_entropy(cube, i), "bald");
    return {s, "bald"};
}

inline ScoreVector entropy_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i) s(static_cast<Eigen::Index>(i)) = detail::mean_entropy(cube, i);
    return {s, "entropy"};
}

inline ScoreVector variation_ratio_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i) s(static_cast<Eigen::Index>(i)) = std::max(0.0, 1.0 - cube.mean(i).maxCoeff());
    return {s, "varratio"};
}

// Σ_y standard deviation of p(y|x,ω) across members (population moments).
inline ScoreVector mean_std_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i) {
        const auto block = cube.point(i);
        const Eigen::RowVectorXd mean = block.colwise().mean();
        const Eigen::RowVectorXd var = (block.rowwise() - mean).array().square().colwise().mean();
        s(static_cast<Eigen::Index>(i)) = var.cwiseMax(0.0).cwiseSqrt().sum();
    }
    return {s, "meanstd"};
}

// Σ_y Var_members p(y|x,ω).
inline ScoreVector prediction_variance_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i) {
        const auto block = cube.point(i);
        const Eigen::RowVectorXd mean = block.colwise().mean();
        s(static_cast<Eigen::Index>(i)) = (block.rowwise() - mean).array().square().colwise().mean().sum();
    }
    return {s, "predvar"};
}

// Mutual information with the information content −ln p replaced by its linearization 1 − p.
inline ScoreVector linearized_mi_scores(const PredictionCube& cube) {
    Vector s(static_cast<Eigen::Index>(cube.points()));
    for (std::size_t i = 0; i < cube.points(); ++i) {
        const auto block = cube.point(i);
        const Vector mean = block.colwise().mean().transpose();
        const double total = 1.0 - mean.squaredNorm();
        const double conditional = 1.0 - block.rowwise().squaredNorm().mean();
        s(static_cast<Eigen::Index>(i)) = total - conditional;
    }
    return {s, "linearized-mi"};
}

inline ScoreVector rho_loss_scores(const Vector& train_losses, const Vector& holdout_losses) {
    if (train_losses.size() != holdout_losses.size()) throw contract_error("rho_loss_scores: length mismatch");
    return {train_losses - holdout_losses, "rholoss"};
}

} // namespace infoacq
