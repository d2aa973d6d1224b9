#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "../errors.hpp"
#include "../rng.hpp"
#include "scores.hpp"

namespace infoacq {

enum class StochasticMode { softmax, power, softrank };

inline StochasticMode parse_stochastic_mode(const std::string& s) {
    if (s == "softmax") return StochasticMode::softmax;
    if (s == "power") return StochasticMode::power;
    if (s == "softrank") return StochasticMode::softrank;
    throw config_error("unknown stochastic mode '" + s + "'");
}

// Base values whose Gumbel perturbation at coldness β samples ∝ exp(β·base).
inline Vector stochastic_base(const ScoreVector& scores, StochasticMode mode) {
    const auto n = static_cast<Eigen::Index>(scores.size());
    Vector base = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    switch (mode) {
    case StochasticMode::softmax:
        for (Eigen::Index i = 0; i < n; ++i)
            if (scores.valid(static_cast<std::size_t>(i))) base(i) = scores.scores(i);
        break;
    case StochasticMode::power:
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!scores.valid(static_cast<std::size_t>(i))) continue;
            if (scores.scores(i) < 0.0) throw domain_error("stochastic_select: power mode needs nonnegative scores");
            base(i) = scores.scores(i) > 0.0 ? std::log(scores.scores(i)) : -std::numeric_limits<double>::infinity();
        }
        break;
    case StochasticMode::softrank: {
        const auto order = descending_order(scores.scores, scores.finite_mask);
        for (std::size_t r = 0; r < order.size(); ++r)
            base(static_cast<Eigen::Index>(order[r])) = -std::log(static_cast<double>(r + 1));
        break;
    }
    }
    return base;
}

// Gumbel-top-B: perturb β·base with standard Gumbel noise, equivalent to Gumbel(0, 1/β) on base.
inline AcquisitionBatch stochastic_select(const ScoreVector& scores, std::size_t batch_size, StochasticMode mode,
                                          double beta, std::uint64_t seed) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw contract_error("stochastic_select: coldness must be finite and ≥ 0");
    const Vector base = stochastic_base(scores, mode);
    Rng rng = make_rng(seed);
    Vector perturbed(base.size());
    std::vector<std::uint8_t> mask(scores.finite_mask);
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        const double g = standard_gumbel(rng);
        if (std::isinf(base(i)) && base(i) < 0) {
            perturbed(i) = -std::numeric_limits<double>::infinity();
            continue;
        }
        perturbed(i) = beta * base(i) + g;
    }
    const auto order = descending_order(perturbed, mask);
    AcquisitionBatch out;
    for (std::size_t r = 0; r < std::min(batch_size, order.size()); ++r) {
        out.indices.push_back(order[r]);
        out.scores_at_selection.push_back(scores[order[r]]);
    }
    return out;
}

} // namespace infoacq
