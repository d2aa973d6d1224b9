#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "../rng.hpp"
#include "posterior.hpp"

namespace infoacq {

// Joint noise-free predictive at m query points plus homoscedastic observation noise.
struct GaussianPredictive {
    Vector mean;
    Matrix cov;
    double noise_variance = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(mean.size()); }

    void validate() const {
        if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw contract_error("GaussianPredictive: shape");
        if (!(noise_variance > 0)) throw contract_error("GaussianPredictive: noise variance must be positive");
    }

    [[nodiscard]] GaussianPredictive select(const std::vector<std::size_t>& idx) const {
        GaussianPredictive out;
        out.noise_variance = noise_variance;
        const auto m = static_cast<Eigen::Index>(idx.size());
        out.mean.resize(m);
        out.cov.resize(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            out.mean(a) = mean(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]));
            for (Eigen::Index b = 0; b < m; ++b)
                out.cov(a, b) = cov(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]),
                                    static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
        }
        return out;
    }
};

inline GaussianPredictive predict_bayes_linear(const WeightPosterior& post, const Matrix& phi) {
    GaussianPredictive out;
    out.mean = phi * post.mean;
    out.cov = symmetrized(phi * post.covariance * phi.transpose());
    out.noise_variance = post.noise_variance;
    return out;
}

struct ParameterSamples {
    Matrix samples;  // K × p
    std::uint64_t seed = 0;
    bool consistent = true;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(samples.rows()); }
};

inline ParameterSamples sample_parameters(const WeightPosterior& post, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw contract_error("sample_parameters: K must be at least 1");
    const Matrix factor = psd_factor(post.covariance);
    ParameterSamples out;
    out.seed = seed;
    out.samples.resize(static_cast<Eigen::Index>(k), post.mean.size());
    Rng rng = make_rng(seed);
    Vector z(post.mean.size());
    for (Eigen::Index r = 0; r < out.samples.rows(); ++r) {
        for (auto& v : z) v = standard_normal(rng);
        out.samples.row(r) = (post.mean + factor * z).transpose();
    }
    return out;
}

// Per point, per member categorical predictions. Storage is [point][member][class].
class PredictionCube {
public:
    using MemberBlock = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    PredictionCube(std::size_t points, std::size_t members, std::size_t classes, std::vector<double> values,
                   std::uint64_t sample_seed = 0, bool consistent = true)
        : n_(points), k_(members), c_(classes), values_(std::move(values)), seed_(sample_seed), consistent_(consistent) {
        if (k_ == 0 || c_ == 0) throw contract_error("PredictionCube: need at least one member and class");
        if (values_.size() != n_ * k_ * c_) throw contract_error("PredictionCube: value count mismatch");
        for (std::size_t s = 0; s < n_ * k_; ++s) {
            double total = 0.0;
            for (std::size_t c = 0; c < c_; ++c) {
                const double v = values_[s * c_ + c];
                if (!(v >= 0.0) || !std::isfinite(v)) throw contract_error("PredictionCube: invalid probability");
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-9) throw contract_error("PredictionCube: member slice does not sum to 1");
        }
    }

    [[nodiscard]] std::size_t points() const noexcept { return n_; }
    [[nodiscard]] std::size_t members() const noexcept { return k_; }
    [[nodiscard]] std::size_t classes() const noexcept { return c_; }
    [[nodiscard]] std::uint64_t sample_seed() const noexcept { return seed_; }
    [[nodiscard]] bool consistent() const noexcept { return consistent_; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t k, std::size_t c) const {
        return values_[(i * k_ + k) * c_ + c];
    }
    [[nodiscard]] const double* member_probs(std::size_t i, std::size_t k) const { return &values_[(i * k_ + k) * c_]; }

    // K × C block for one point.
    [[nodiscard]] MemberBlock point(std::size_t i) const {
        return MemberBlock(&values_[i * k_ * c_], static_cast<Eigen::Index>(k_), static_cast<Eigen::Index>(c_));
    }

    [[nodiscard]] Vector mean(std::size_t i) const { return point(i).colwise().mean().transpose(); }

    [[nodiscard]] PredictionCube rows(const std::vector<std::size_t>& idx) const {
        std::vector<double> out;
        out.reserve(idx.size() * k_ * c_);
        for (auto i : idx) out.insert(out.end(), values_.begin() + static_cast<std::ptrdiff_t>(i * k_ * c_),
                                      values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * k_ * c_));
        return PredictionCube(idx.size(), k_, c_, std::move(out), seed_, consistent_);
    }

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_, k_, c_;
    std::vector<double> values_;
    std::uint64_t seed_;
    bool consistent_;
};

// Softmax GLM predictions for every (point, member); the same K draws are used for every row.
inline PredictionCube predict_cube(const ParameterSamples& samples, const Matrix& phi, std::size_t classes) {
    if (!samples.consistent) throw contract_error("predict_cube: samples must be consistent across points");
    const std::size_t n = static_cast<std::size_t>(phi.rows());
    const std::size_t k = samples.size();
    std::vector<double> values(n * k * classes);
    for (std::size_t m = 0; m < k; ++m) {
        const Vector w = samples.samples.row(static_cast<Eigen::Index>(m)).transpose();
        const Matrix probs = glm_probabilities(w, phi, classes);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < classes; ++c)
                values[(i * k + m) * classes + c] = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    return PredictionCube(n, k, classes, std::move(values), samples.seed, true);
}

inline PredictionCube predict_cube(const ParameterSamples& samples, const Dataset& pool, const FeatureMap& features,
                                   std::size_t classes) {
    return predict_cube(samples, features(pool.inputs), classes);
}

// Member means of a linear model (identity link): n × K.
inline Matrix predict_means(const ParameterSamples& samples, const Matrix& phi) {
    return phi * samples.samples.transpose();
}

// Members fitted on bootstrap resamples; member k uses stream derive_seed(seed, k).
inline ParameterSamples bootstrap_parameters(const Dataset& data, std::size_t k, std::uint64_t seed,
                                             const std::function<Vector(const Dataset&)>& fit_mean) {
    if (k == 0) throw contract_error("bootstrap_parameters: K must be at least 1");
    ParameterSamples out;
    out.seed = seed;
    for (std::size_t m = 0; m < k; ++m) {
        Rng rng = make_rng(derive_seed(seed, m));
        std::vector<std::size_t> rows(data.size());
        for (auto& r : rows) r = uniform_index(rng, data.size());
        const Vector w = fit_mean(data.subset(rows));
        if (m == 0) out.samples.resize(static_cast<Eigen::Index>(k), w.size());
        out.samples.row(static_cast<Eigen::Index>(m)) = w.transpose();
    }
    return out;
}

} // namespace infoacq
