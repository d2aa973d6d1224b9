#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "../linalg.hpp"
#include "../rng.hpp"

namespace infoacq {

// Deterministic map from raw inputs to model features.
class FeatureMap {
public:
    static FeatureMap identity(std::size_t input_dim, bool bias = true) {
        FeatureMap f;
        f.input_dim_ = input_dim;
        f.bias_ = bias;
        return f;
    }

    // Random Fourier features approximating amplitude · exp(-|x-x'|² / (2 lengthscale²)).
    static FeatureMap random_fourier(std::size_t input_dim, std::size_t count, double lengthscale, double amplitude,
                                     std::uint64_t seed) {
        if (count == 0 || !(lengthscale > 0) || !(amplitude > 0))
            throw contract_error("random_fourier: count, lengthscale and amplitude must be positive");
        FeatureMap f;
        f.input_dim_ = input_dim;
        f.bias_ = false;
        f.fourier_ = true;
        f.frequencies_.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(input_dim));
        f.phases_.resize(static_cast<Eigen::Index>(count));
        Rng rng = make_rng(seed);
        for (Eigen::Index r = 0; r < f.frequencies_.rows(); ++r) {
            for (Eigen::Index c = 0; c < f.frequencies_.cols(); ++c)
                f.frequencies_(r, c) = standard_normal(rng) / lengthscale;
            f.phases_(r) = 2.0 * std::numbers::pi * uniform_open(rng);
        }
        f.scale_ = std::sqrt(2.0 * amplitude / static_cast<double>(count));
        return f;
    }

    [[nodiscard]] std::size_t input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] std::size_t dim() const noexcept {
        if (fourier_) return static_cast<std::size_t>(frequencies_.rows());
        return input_dim_ + (bias_ ? 1 : 0);
    }

    [[nodiscard]] Matrix operator()(const Matrix& x) const {
        if (static_cast<std::size_t>(x.cols()) != input_dim_) throw contract_error("FeatureMap: input dimension mismatch");
        if (fourier_) {
            Matrix z = x * frequencies_.transpose();
            z.rowwise() += phases_.transpose();
            return scale_ * z.array().cos().matrix();
        }
        Matrix out(x.rows(), static_cast<Eigen::Index>(dim()));
        out.leftCols(x.cols()) = x;
        if (bias_) out.col(x.cols()).setOnes();
        return out;
    }

private:
    std::size_t input_dim_ = 0;
    bool bias_ = true;
    bool fourier_ = false;
    Matrix frequencies_;
    Vector phases_;
    double scale_ = 1.0;
};

} // namespace infoacq
