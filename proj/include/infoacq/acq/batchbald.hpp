#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "../errors.hpp"
#include "../rng.hpp"
#include "scores.hpp"

namespace infoacq {

enum class ConfigMode { exact, sampled, automatic };

struct ConfigSampler {
    ConfigMode mode = ConfigMode::automatic;
    std::size_t samples = 10'000;
    std::size_t cap = 4096;
    std::uint64_t seed = 0;
};

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

namespace detail {

// C^b, saturating.
inline std::size_t configuration_count(std::size_t classes, std::size_t points) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < points; ++i) {
        if (n > std::numeric_limits<std::size_t>::max() / classes) return std::numeric_limits<std::size_t>::max();
        n *= classes;
    }
    return n;
}

inline bool use_exact(const ConfigSampler& s, std::size_t classes, std::size_t points) {
    const bool fits = configuration_count(classes, points) <= s.cap;
    if (s.mode == ConfigMode::exact) {
        if (!fits) throw config_error("exact enumeration of C^b configurations exceeds the cap");
        return true;
    }
    return s.mode == ConfigMode::automatic && fits;
}

// Rows: configurations of the listed points, columns: members; entries Π_i p(y_i | x_i, ω_k).
inline Matrix enumerate_configurations(const PredictionCube& cube, const std::vector<std::size_t>& points) {
    const auto k = static_cast<Eigen::Index>(cube.members());
    const auto c = static_cast<Eigen::Index>(cube.classes());
    Matrix p = Matrix::Ones(1, k);
    for (auto i : points) {
        const auto block = cube.point(i);  // K × C
        Matrix next(p.rows() * c, k);
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index y = 0; y < c; ++y) next.row(r * c + y) = p.row(r).cwiseProduct(block.col(y).transpose());
        p.swap(next);
    }
    return p;
}

// m configurations drawn from the mixture: member uniformly, then labels from that member.
inline Matrix sample_configurations(const PredictionCube& cube, const std::vector<std::size_t>& points, std::size_t m,
                                    Rng& rng) {
    const auto k = static_cast<Eigen::Index>(cube.members());
    Matrix p = Matrix::Ones(static_cast<Eigen::Index>(m), k);
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
        const std::size_t member = uniform_index(rng, cube.members());
        for (auto i : points) {
            const double* probs = cube.member_probs(i, member);
            const std::size_t y = categorical_draw(rng, std::span<const double>(probs, cube.classes()));
            const auto block = cube.point(i);
            p.row(s).array() *= block.col(static_cast<Eigen::Index>(y)).transpose().array();
        }
    }
    return p;
}

inline double exact_joint_entropy(const Matrix& configs, const PredictionCube::MemberBlock& last) {
    const Matrix joint = configs * last / static_cast<double>(last.rows());
    double h = 0.0;
    for (double v : joint.reshaped()) h += neg_xlogx(v);
    return h;
}

inline MonteCarloEstimate sampled_joint_entropy(const Matrix& configs, const PredictionCube::MemberBlock& last) {
    const double k = static_cast<double>(last.rows());
    const Matrix joint = configs * last / k;
    const Vector prefix = configs.rowwise().mean();
    const auto m = static_cast<double>(configs.rows());
    double sum = 0.0, sum_sq = 0.0;
    for (Eigen::Index s = 0; s < joint.rows(); ++s) {
        double t = 0.0;
        if (prefix(s) > 0.0)
            for (Eigen::Index y = 0; y < joint.cols(); ++y) t += neg_xlogx(joint(s, y)) / prefix(s);
        sum += t;
        sum_sq += t * t;
    }
    const double mean = sum / m;
    const double var = m > 1 ? std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0)) : 0.0;
    return {mean, std::sqrt(var / m)};
}

} // namespace detail

// Joint entropy H[y_1..y_b] of the member mixture, with a standard error (zero in exact mode).
inline MonteCarloEstimate batchbald_joint_entropy_estimate(const PredictionCube& cube, const std::vector<std::size_t>& batch,
                                                           const ConfigSampler& sampler) {
    if (batch.empty()) throw contract_error("batchbald_joint_entropy: empty batch");
    if (!cube.consistent()) throw contract_error("batchbald_joint_entropy: cube must use consistent samples");
    for (auto i : batch)
        if (i >= cube.points()) throw contract_error("batchbald_joint_entropy: index out of range");
    const std::vector<std::size_t> prefix(batch.begin(), batch.end() - 1);
    const auto last = cube.point(batch.back());
    if (detail::use_exact(sampler, cube.classes(), batch.size()))
        return {detail::exact_joint_entropy(detail::enumerate_configurations(cube, prefix), last), 0.0};
    Rng rng = make_rng(sampler.seed);
    return detail::sampled_joint_entropy(detail::sample_configurations(cube, prefix, sampler.samples, rng), last);
}

inline double batchbald_joint_entropy(const PredictionCube& cube, const std::vector<std::size_t>& batch,
                                      const ConfigSampler& sampler) {
    return batchbald_joint_entropy_estimate(cube, batch, sampler).value;
}

// a_BatchBALD = H[y_1..y_b] − Σ_i E_ω H[y_i | ω].
inline double batchbald_value(const PredictionCube& cube, const std::vector<std::size_t>& batch,
                              const ConfigSampler& sampler) {
    if (batch.empty()) return 0.0;
    double conditional = 0.0;
    for (auto i : batch) conditional += detail::member_mean_entropy(cube, i);
    return batchbald_joint_entropy(cube, batch, sampler) - conditional;
}

// Greedy BatchBALD. Masked entries of `allowed` are never selected.
inline AcquisitionBatch batchbald_select(const PredictionCube& cube, std::size_t batch_size, const ConfigSampler& sampler,
                                         const std::vector<std::uint8_t>& allowed = {}) {
    if (!cube.consistent()) throw contract_error("batchbald_select: cube must use consistent samples");
    const std::size_t n = cube.points();
    std::vector<std::uint8_t> open = allowed.empty() ? std::vector<std::uint8_t>(n, 1) : allowed;
    if (open.size() != n) throw contract_error("batchbald_select: mask length mismatch");
    std::vector<double> conditional(n);
    for (std::size_t i = 0; i < n; ++i) conditional[i] = detail::member_mean_entropy(cube, i);

    AcquisitionBatch out;
    Matrix configs = Matrix::Ones(1, static_cast<Eigen::Index>(cube.members()));
    bool exact = true;
    double conditional_sum = 0.0;
    for (std::size_t step = 0; step < batch_size; ++step) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_index = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (!open[c]) continue;
            const auto block = cube.point(c);
            const double h = exact ? detail::exact_joint_entropy(configs, block)
                                   : detail::sampled_joint_entropy(configs, block).value;
            const double score = h - conditional_sum - conditional[c];
            if (score > best) {
                best = score;
                best_index = c;
            }
        }
        if (best_index == n) break;
        open[best_index] = 0;
        out.indices.push_back(best_index);
        out.scores_at_selection.push_back(best);
        conditional_sum += conditional[best_index];
        if (step + 1 == batch_size) break;
        exact = detail::use_exact(sampler, cube.classes(), out.indices.size() + 1);
        if (exact) {
            configs = detail::enumerate_configurations(cube, out.indices);
        } else {
            Rng rng = make_rng(derive_seed(sampler.seed, step));
            configs = detail::sample_configurations(cube, out.indices, sampler.samples, rng);
        }
    }
    return out;
}

} // namespace infoacq
