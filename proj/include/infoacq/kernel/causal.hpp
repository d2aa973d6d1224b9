#pragma once

#include <cmath>
#include <limits>

#include "../acq/scores.hpp"
#include "../errors.hpp"
#include "../linalg.hpp"

namespace infoacq {

inline constexpr double counterfactual_variance_floor = 1e-8;

struct CausalScores {
    double mu = 0.0;     // Var_ω μ(x, t)
    double rho = 0.0;    // Var_ω τ / Var_ω μ(x, 1 − t)
    double murho = 0.0;  // mu · rho
    bool rho_masked = false;
    bool murho_masked = false;
};

namespace detail {
inline double population_variance(const Vector& v) {
    return (v.array() - v.mean()).square().mean();
}
} // namespace detail

// Scores from per-member arm means. A near-zero counterfactual variance masks rho; murho stays 0 when
// the factual arm is also settled and is masked otherwise.
inline CausalScores causal_scores(const Vector& control, const Vector& treated, int observed_arm,
                                  double floor = counterfactual_variance_floor) {
    if (control.size() != treated.size()) throw contract_error("causal_scores: arm member counts differ");
    if (control.size() < 2) throw contract_error("causal_scores: need at least two members");
    if (observed_arm != 0 && observed_arm != 1) throw contract_error("causal_scores: arm must be 0 or 1");
    const Vector& factual = observed_arm == 1 ? treated : control;
    const Vector& counterfactual = observed_arm == 1 ? control : treated;
    CausalScores out;
    out.mu = detail::population_variance(factual);
    const double cf = detail::population_variance(counterfactual);
    const double effect = detail::population_variance(treated - control);
    if (cf <= floor) {
        out.rho = std::numeric_limits<double>::quiet_NaN();
        out.rho_masked = true;
        if (out.mu <= floor) {
            out.murho = 0.0;
        } else {
            out.murho = std::numeric_limits<double>::quiet_NaN();
            out.murho_masked = true;
        }
        return out;
    }
    out.rho = effect / cf;
    out.murho = out.mu * out.rho;
    return out;
}

struct CausalScoreVectors {
    ScoreVector mu;
    ScoreVector rho;
    ScoreVector murho;
};

// Member means are n × K per arm; arms holds the observed treatment of each pool point.
inline CausalScoreVectors causal_score_vectors(const Matrix& control, const Matrix& treated,
                                               const std::vector<int>& arms) {
    if (control.rows() != treated.rows() || control.cols() != treated.cols())
        throw contract_error("causal_score_vectors: arm shapes differ");
    if (arms.size() != static_cast<std::size_t>(control.rows())) throw contract_error("causal_score_vectors: arm count mismatch");
    const Eigen::Index n = control.rows();
    Vector mu(n), rho(n), murho(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = causal_scores(control.row(i).transpose(), treated.row(i).transpose(), arms[static_cast<std::size_t>(i)]);
        mu(i) = s.mu;
        rho(i) = s.rho;
        murho(i) = s.murho;
    }
    return {ScoreVector(std::move(mu), "mu-bald"), ScoreVector(std::move(rho), "rho-bald"),
            ScoreVector(std::move(murho), "murho-bald")};
}

} // namespace infoacq
