#pragma once

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace infoacq {

inline constexpr double prob_floor = 1e-300;
inline constexpr double mass_tolerance = 1e-9;

// -p ln p with 0 ln 0 = 0.
inline double neg_xlogx(double p) {
    if (p <= 0.0) return 0.0;
    return -p * std::log(std::max(p, prob_floor));
}

inline double safe_log(double p) { return std::log(std::max(p, prob_floor)); }

namespace detail {
template <class Range>
void validate_distribution(const Range& probs, std::string_view what) {
    if (std::size(probs) == 0) throw contract_error(std::string(what) + ": empty distribution");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw contract_error(std::string(what) + ": negative or non-finite probability");
        total += p;
    }
    if (std::abs(total - 1.0) > mass_tolerance)
        throw contract_error(std::string(what) + ": mass " + std::to_string(total) + " is not 1");
}

inline double entropy_unchecked(const double* p, std::size_t n) {
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) h += neg_xlogx(p[i]);
    return h;
}
} // namespace detail

class Categorical {
public:
    explicit Categorical(Vector probs) : probs_(std::move(probs)) {
        detail::validate_distribution(std::span<const double>(probs_.data(), static_cast<std::size_t>(probs_.size())),
                                      "Categorical");
    }
    Categorical(std::initializer_list<double> probs)
        : Categorical(Eigen::Map<const Vector>(probs.begin(), static_cast<Eigen::Index>(probs.size()))) {}

    [[nodiscard]] const Vector& probs() const noexcept { return probs_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

private:
    Vector probs_;
};

inline double entropy(const Categorical& p) {
    return detail::entropy_unchecked(p.probs().data(), p.size());
}

inline double kl_divergence(const Categorical& p, const Categorical& q) {
    if (p.size() != q.size()) throw contract_error("kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) throw domain_error("kl_divergence: p has mass outside the support of q");
        kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return std::max(kl, 0.0);
}

// Dense joint distribution over named discrete variables, last axis fastest.
class JointTable {
public:
    JointTable(std::vector<std::string> labels, std::vector<std::size_t> shape, std::vector<double> probs)
        : labels_(std::move(labels)), shape_(std::move(shape)), probs_(std::move(probs)) {
        if (labels_.size() != shape_.size()) throw contract_error("JointTable: label/shape mismatch");
        const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
        if (n != probs_.size()) throw contract_error("JointTable: shape does not match entry count");
        for (std::size_t a = 0; a < labels_.size(); ++a)
            for (std::size_t b = a + 1; b < labels_.size(); ++b)
                if (labels_[a] == labels_[b]) throw contract_error("JointTable: duplicate axis label " + labels_[a]);
        detail::validate_distribution(probs_, "JointTable");
    }

    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::vector<double>& probs() const noexcept { return probs_; }

    [[nodiscard]] std::size_t axis(std::string_view name) const {
        for (std::size_t a = 0; a < labels_.size(); ++a)
            if (labels_[a] == name) return a;
        throw contract_error("JointTable: unknown axis " + std::string(name));
    }

    [[nodiscard]] double at(std::span<const std::size_t> index) const { return probs_[flat(index)]; }

    [[nodiscard]] double entropy() const { return detail::entropy_unchecked(probs_.data(), probs_.size()); }

    // Marginal over the listed axes, kept in the listed order.
    [[nodiscard]] JointTable marginal(std::span<const std::size_t> keep) const {
        std::vector<std::string> labels;
        std::vector<std::size_t> shape;
        for (std::size_t a : keep) {
            if (a >= rank()) throw contract_error("JointTable: axis out of range");
            labels.push_back(labels_[a]);
            shape.push_back(shape_[a]);
        }
        const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
        std::vector<double> out(n, 0.0);
        std::vector<std::size_t> idx(rank(), 0);
        for (std::size_t f = 0; f < probs_.size(); ++f) {
            unflatten(f, idx);
            std::size_t g = 0;
            for (std::size_t k = 0; k < keep.size(); ++k) g = g * shape[k] + idx[keep[k]];
            out[g] += probs_[f];
        }
        return JointTable(std::move(labels), std::move(shape), renormalized(std::move(out)));
    }

    [[nodiscard]] JointTable marginal(std::initializer_list<std::string_view> names) const {
        std::vector<std::size_t> keep;
        for (auto n : names) keep.push_back(axis(n));
        return marginal(keep);
    }

    [[nodiscard]] double outcome_probability(std::size_t ax, std::size_t outcome) const {
        if (ax >= rank() || outcome >= shape_[ax]) throw contract_error("JointTable: outcome out of range");
        double total = 0.0;
        std::vector<std::size_t> idx(rank(), 0);
        for (std::size_t f = 0; f < probs_.size(); ++f) {
            unflatten(f, idx);
            if (idx[ax] == outcome) total += probs_[f];
        }
        return total;
    }

    // Distribution of the remaining axes given axis = outcome.
    [[nodiscard]] JointTable condition(std::size_t ax, std::size_t outcome) const {
        const double mass = outcome_probability(ax, outcome);
        if (!(mass > 0.0)) throw domain_error("JointTable: conditioning on a zero-probability outcome");
        std::vector<std::string> labels;
        std::vector<std::size_t> shape;
        for (std::size_t a = 0; a < rank(); ++a)
            if (a != ax) {
                labels.push_back(labels_[a]);
                shape.push_back(shape_[a]);
            }
        std::vector<double> out;
        out.reserve(probs_.size() / shape_[ax]);
        std::vector<std::size_t> idx(rank(), 0);
        for (std::size_t f = 0; f < probs_.size(); ++f) {
            unflatten(f, idx);
            if (idx[ax] == outcome) out.push_back(probs_[f] / mass);
        }
        return JointTable(std::move(labels), std::move(shape), renormalized(std::move(out)));
    }

    [[nodiscard]] Categorical as_categorical() const {
        return Categorical(Eigen::Map<const Vector>(probs_.data(), static_cast<Eigen::Index>(probs_.size())));
    }

private:
    std::size_t flat(std::span<const std::size_t> index) const {
        if (index.size() != rank()) throw contract_error("JointTable: index rank mismatch");
        std::size_t f = 0;
        for (std::size_t a = 0; a < rank(); ++a) {
            if (index[a] >= shape_[a]) throw contract_error("JointTable: index out of range");
            f = f * shape_[a] + index[a];
        }
        return f;
    }
    void unflatten(std::size_t f, std::vector<std::size_t>& idx) const {
        for (std::size_t a = rank(); a-- > 0;) {
            idx[a] = f % shape_[a];
            f /= shape_[a];
        }
    }
    static std::vector<double> renormalized(std::vector<double> v) {
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        if (total > 0.0)
            for (double& x : v) x /= total;
        return v;
    }

    std::vector<std::string> labels_;
    std::vector<std::size_t> shape_;
    std::vector<double> probs_;
};

struct Observation {
    std::string axis;
    std::size_t outcome = 0;
};

inline JointTable condition_on(JointTable table, std::span<const Observation> observed) {
    for (const auto& o : observed) table = table.condition(table.axis(o.axis), o.outcome);
    return table;
}

// H[target | given] − H[target | observed, given]; negative values are legitimate.
inline double information_gain(const JointTable& joint, std::string_view target,
                               std::span<const Observation> observed, std::span<const Observation> given = {}) {
    const JointTable base = condition_on(joint, given);
    const double before = base.marginal({target}).entropy();
    const double after = condition_on(base, observed).marginal({target}).entropy();
    return before - after;
}

// KL(p(target | observed, given) ‖ p(target | given)).
inline double surprise(const JointTable& joint, std::string_view target, std::span<const Observation> observed,
                       std::span<const Observation> given = {}) {
    const JointTable base = condition_on(joint, given);
    const Categorical prior = base.marginal({target}).as_categorical();
    const Categorical post = condition_on(base, observed).marginal({target}).as_categorical();
    return kl_divergence(post, prior);
}

namespace detail {
inline std::string_view other_axis(const JointTable& joint, std::string_view observed_axis) {
    if (joint.rank() != 2) throw contract_error("expected a joint over exactly two axes");
    const std::size_t ax = joint.axis(observed_axis);
    return joint.labels()[1 - ax];
}
} // namespace detail

inline double information_gain(const JointTable& joint, std::string_view observed_axis, std::size_t outcome) {
    const Observation obs{std::string(observed_axis), outcome};
    return information_gain(joint, detail::other_axis(joint, observed_axis), std::span(&obs, 1));
}

inline double surprise(const JointTable& joint, std::string_view observed_axis, std::size_t outcome) {
    const Observation obs{std::string(observed_axis), outcome};
    return surprise(joint, detail::other_axis(joint, observed_axis), std::span(&obs, 1));
}

inline double mutual_information(const JointTable& joint, std::string_view a, std::string_view b,
                                 std::span<const Observation> given = {}) {
    const JointTable base = condition_on(joint, given);
    return base.marginal({a}).entropy() + base.marginal({b}).entropy() - base.marginal({a, b}).entropy();
}

// I[A;B;z] = I[A;B] − I[A;B|z].
inline double triple_information(const JointTable& joint, std::string_view a, std::string_view b,
                                 const Observation& z) {
    return mutual_information(joint, a, b) - mutual_information(joint, a, b, std::span(&z, 1));
}

class DirichletParams {
public:
    explicit DirichletParams(Vector alpha) : alpha_(std::move(alpha)) {
        if (alpha_.size() == 0) throw contract_error("DirichletParams: empty");
        for (double a : alpha_)
            if (!(a > 0.0) || !std::isfinite(a)) throw contract_error("DirichletParams: concentrations must be positive");
        alpha0_ = alpha_.sum();
    }
    DirichletParams(std::initializer_list<double> alpha)
        : DirichletParams(Eigen::Map<const Vector>(alpha.begin(), static_cast<Eigen::Index>(alpha.size()))) {}

    [[nodiscard]] const Vector& alpha() const noexcept { return alpha_; }
    [[nodiscard]] double alpha0() const noexcept { return alpha0_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(alpha_.size()); }

private:
    Vector alpha_;
    double alpha0_ = 0.0;
};

inline double digamma(double x) { return boost::math::digamma(x); }
inline double trigamma(double x) { return boost::math::trigamma(x); }

inline double dirichlet_expected_entropy(const DirichletParams& d) {
    const double a0 = d.alpha0();
    double h = digamma(a0 + 1.0);
    for (double a : d.alpha()) h -= a / a0 * digamma(a + 1.0);
    return std::max(h, 0.0);
}

inline double dirichlet_entropy_variance(const DirichletParams& d) {
    const Vector& al = d.alpha();
    const double a0 = d.alpha0();
    const double norm = a0 * (a0 + 1.0);
    const double psi0 = digamma(a0 + 2.0);
    const double tri0 = trigamma(a0 + 2.0);
    double second = 0.0;
    for (Eigen::Index i = 0; i < al.size(); ++i) {
        const double m = digamma(al(i) + 2.0) - psi0;
        second += al(i) * (al(i) + 1.0) / norm * (m * m + trigamma(al(i) + 2.0) - tri0);
        const double mi = digamma(al(i) + 1.0) - psi0;
        for (Eigen::Index j = 0; j < al.size(); ++j) {
            if (j == i) continue;
            const double mj = digamma(al(j) + 1.0) - psi0;
            second += al(i) * al(j) / norm * (mi * mj - tri0);
        }
    }
    const double mean = dirichlet_expected_entropy(d);
    return std::max(second - mean * mean, 0.0);
}

inline constexpr double moment_match_alpha0_cap = 1e12;

inline DirichletParams dirichlet_moment_match(const Categorical& mean, double expected_entropy) {
    for (std::size_t i = 0; i < mean.size(); ++i)
        if (!(mean[i] > 0.0)) throw contract_error("dirichlet_moment_match: mean must be strictly positive");
    const double ceiling = entropy(mean);
    if (!(expected_entropy > 0.0) || !(expected_entropy < ceiling))
        throw domain_error("dirichlet_moment_match: expected entropy outside (0, H[mean])");
    auto expected_at = [&](double log_a0) {
        return dirichlet_expected_entropy(DirichletParams(std::exp(log_a0) * mean.probs()));
    };
    double lo = -20.0;
    double hi = std::log(moment_match_alpha0_cap);
    if (expected_at(hi) < expected_entropy)
        throw overflow_error("dirichlet_moment_match: concentration exceeds cap 1e12");
    if (expected_at(lo) > expected_entropy)
        throw domain_error("dirichlet_moment_match: concentration below solver range");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (expected_at(mid) < expected_entropy ? lo : hi) = mid;
    }
    return DirichletParams(std::exp(0.5 * (lo + hi)) * mean.probs());
}

struct StirlingBound {
    double bound = 0.0;
    double exact = 0.0;
    double gap = 0.0;
};

inline StirlingBound stirling_binomial_bound(std::size_t n, std::size_t r) {
    if (r > n) throw domain_error("stirling_binomial_bound: r exceeds N");
    const double nn = static_cast<double>(n);
    const double rr = static_cast<double>(r);
    auto term = [&](double count) { return count > 0.0 ? count * std::log(nn / count) : 0.0; };
    StirlingBound out;
    out.bound = term(rr) + term(nn - rr);
    out.exact = std::lgamma(nn + 1.0) - std::lgamma(rr + 1.0) - std::lgamma(nn - rr + 1.0);
    if (r == 0 || r == n) out.exact = 0.0;
    out.gap = out.bound - out.exact;
    return out;
}

} // namespace infoacq
