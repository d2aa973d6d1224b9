#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "../rng.hpp"
#include "dataset.hpp"
#include "gp.hpp"

namespace infoacq {

class SyntheticParams {
public:
    SyntheticParams() = default;
    SyntheticParams(std::initializer_list<std::pair<const std::string, double>> values) : values_(values) {}
    explicit SyntheticParams(std::map<std::string, double> values) : values_(std::move(values)) {}

    void set(const std::string& key, double value) { values_[key] = value; }
    [[nodiscard]] double get(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    [[nodiscard]] std::size_t count(const std::string& key, std::size_t fallback) const {
        const double v = get(key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v)) throw config_error("dataset parameter '" + key + "' must be a count");
        return static_cast<std::size_t>(v);
    }
    void require_known(const std::string& kind, const std::set<std::string>& known) const {
        for (const auto& [k, v] : values_)
            if (!known.contains(k)) throw config_error("dataset kind '" + kind + "' has no parameter '" + k + "'");
    }
    [[nodiscard]] const std::map<std::string, double>& values() const noexcept { return values_; }

private:
    std::map<std::string, double> values_;
};

struct SyntheticData {
    Dataset train;          // pool, training stream, or labeled set depending on the experiment
    Dataset test;
    Matrix target_inputs;   // inputs only; empty when the kind has no target distribution
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mean outcome of the two-arm structural model.
inline double two_arm_mean(double x, double t) {
    const double s = 2.0 * t - 1.0;
    return s * x + s - 2.0 * std::sin(2.0 * s * x) + 2.0 * (1.0 + 0.5 * x);
}

namespace detail {

struct ClusterLayout {
    std::size_t classes = 2;
    std::size_t clusters = 2;
    double radius = 2.0;
    double spread = 0.5;

    static ClusterLayout from(const SyntheticParams& p, std::size_t classes, std::size_t clusters, double spread) {
        ClusterLayout l;
        l.classes = p.count("classes", classes);
        l.clusters = p.count("clusters", clusters);
        l.radius = p.get("radius", 2.0);
        l.spread = p.get("spread", spread);
        if (l.classes < 2 || l.clusters < 1) throw config_error("cluster layout needs ≥2 classes and ≥1 cluster");
        return l;
    }

    // Centers on a circle, neighbouring centers belong to different classes.
    [[nodiscard]] Dataset draw(std::size_t n, Rng& rng) const {
        const std::size_t centers = classes * clusters;
        Dataset d;
        d.kind = TaskKind::classification;
        d.num_classes = classes;
        d.inputs.resize(static_cast<Eigen::Index>(n), 2);
        d.targets.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = uniform_index(rng, centers);
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(centers);
            const auto r = static_cast<Eigen::Index>(i);
            d.inputs(r, 0) = radius * std::cos(angle) + spread * standard_normal(rng);
            d.inputs(r, 1) = radius * std::sin(angle) + spread * standard_normal(rng);
            d.targets(r) = static_cast<double>(j % classes);
        }
        return d;
    }
};

inline const std::set<std::string> cluster_keys{"n", "test", "classes", "clusters", "radius", "spread"};

inline std::set<std::string> with_keys(std::set<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(extra);
    return base;
}
} // namespace detail

inline const std::map<std::string, std::set<std::string>>& synthetic_kinds() {
    static const std::map<std::string, std::set<std::string>> kinds{
        {"two-cluster-2d", detail::cluster_keys},
        {"repeated-pool", detail::with_keys(detail::cluster_keys, {"duplicates", "jitter"})},
        {"heavy-tail-pool", {"n", "test", "targets", "nu", "scale", "target_scale", "target_x", "target_y"}},
        {"ambiguous-label", detail::with_keys(detail::cluster_keys, {"noise"})},
        {"two-arm-causal", {"n", "test"}},
        {"gp-1d", {"n", "test", "lengthscale", "amplitude", "noise", "range"}},
    };
    return kinds;
}

inline TaskKind synthetic_task(const std::string& kind) {
    return kind == "gp-1d" || kind == "two-arm-causal" ? TaskKind::regression : TaskKind::classification;
}

inline void check_synthetic_params(const std::string& kind, const SyntheticParams& params) {
    const auto it = synthetic_kinds().find(kind);
    if (it == synthetic_kinds().end()) throw config_error("unknown synthetic dataset kind '" + kind + "'");
    params.require_known(kind, it->second);
}

namespace detail {

inline SyntheticData two_cluster(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("two-cluster-2d", p);
    const auto layout = ClusterLayout::from(p, 2, 2, 0.5);
    Rng train_rng = make_rng(derive_seed(seed, 1));
    Rng test_rng = make_rng(derive_seed(seed, 2));
    return {layout.draw(p.count("n", 200), train_rng), layout.draw(p.count("test", 1000), test_rng), Matrix()};
}

inline SyntheticData repeated_pool(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("repeated-pool", p);
    const auto layout = ClusterLayout::from(p, 2, 2, 0.5);
    const std::size_t copies = p.count("duplicates", 4);
    const double jitter = p.get("jitter", 0.1);
    if (copies < 1) throw config_error("repeated-pool: duplicates must be ≥ 1");
    Rng train_rng = make_rng(derive_seed(seed, 1));
    Rng test_rng = make_rng(derive_seed(seed, 2));
    Rng jitter_rng = make_rng(derive_seed(seed, 4));
    const Dataset base = layout.draw(p.count("n", 100), train_rng);
    Dataset pool;
    pool.kind = base.kind;
    pool.num_classes = base.num_classes;
    pool.duplication_factor = copies;
    const Eigen::Index n = base.inputs.rows();
    pool.inputs.resize(n * static_cast<Eigen::Index>(copies), 2);
    pool.targets.resize(n * static_cast<Eigen::Index>(copies));
    // Copy 0 is the unperturbed base set; later copies carry jitter.
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(copies); ++c)
        for (Eigen::Index i = 0; i < n; ++i) {
            pool.inputs.row(c * n + i) = base.inputs.row(i);
            if (c > 0) {
                pool.inputs(c * n + i, 0) += jitter * standard_normal(jitter_rng);
                pool.inputs(c * n + i, 1) += jitter * standard_normal(jitter_rng);
            }
            pool.targets(c * n + i) = base.targets(i);
        }
    return {pool, layout.draw(p.count("test", 1000), test_rng), Matrix()};
}

inline Matrix student_t_2d(std::size_t n, double nu, double scale, double loc_x, double loc_y, Rng& rng) {
    Matrix x(static_cast<Eigen::Index>(n), 2);
    const double root = std::sqrt(scale);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double chi2 = 2.0 * gamma_draw(rng, nu / 2.0);
        const double w = std::sqrt(nu / chi2);
        x(i, 0) = loc_x + root * w * standard_normal(rng);
        x(i, 1) = loc_y + root * w * standard_normal(rng);
    }
    return x;
}

inline Dataset label_heavy_tail(Matrix inputs, Rng& rng) {
    Dataset d;
    d.kind = TaskKind::classification;
    d.num_classes = 2;
    d.targets.resize(inputs.rows());
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        const double p1 = standard_normal_cdf(20.0 * (std::tanh(2.0 * inputs(i, 0)) - inputs(i, 1)));
        d.targets(i) = bernoulli(rng, p1) ? 1.0 : 0.0;
    }
    d.inputs = std::move(inputs);
    return d;
}

inline SyntheticData heavy_tail(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("heavy-tail-pool", p);
    const double nu = p.get("nu", 5.0);
    const double scale = p.get("scale", 0.8);
    const double tscale = p.get("target_scale", scale);
    const double tx = p.get("target_x", 0.0);
    const double ty = p.get("target_y", 0.0);
    Rng train_rng = make_rng(derive_seed(seed, 1));
    Rng test_rng = make_rng(derive_seed(seed, 2));
    Rng target_rng = make_rng(derive_seed(seed, 3));
    SyntheticData out;
    out.train = label_heavy_tail(student_t_2d(p.count("n", 2000), nu, scale, 0, 0, train_rng), train_rng);
    // The test set follows the target distribution.
    out.test = label_heavy_tail(student_t_2d(p.count("test", 1000), nu, tscale, tx, ty, test_rng), test_rng);
    out.target_inputs = student_t_2d(p.count("targets", 100), nu, tscale, tx, ty, target_rng);
    return out;
}

inline Dataset flip_labels(Dataset d, double rate, Rng& rng) {
    d.corrupted.assign(d.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!bernoulli(rng, rate)) continue;
        const std::size_t shift = 1 + uniform_index(rng, d.num_classes - 1);
        d.targets(static_cast<Eigen::Index>(i)) = static_cast<double>((d.label(i) + shift) % d.num_classes);
        d.corrupted[i] = 1;
    }
    return d;
}

inline SyntheticData ambiguous_label(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("ambiguous-label", p);
    const auto layout = ClusterLayout::from(p, 4, 1, 0.7);
    const double rate = p.get("noise", 0.1);
    if (rate < 0 || rate > 1) throw config_error("ambiguous-label: noise must lie in [0, 1]");
    Rng train_rng = make_rng(derive_seed(seed, 1));
    Rng test_rng = make_rng(derive_seed(seed, 2));
    Rng noise_rng = make_rng(derive_seed(seed, 5));
    SyntheticData out;
    out.train = flip_labels(layout.draw(p.count("n", 2000), train_rng), rate, noise_rng);
    out.test = layout.draw(p.count("test", 1000), test_rng);
    return out;
}

inline Dataset two_arm_draw(std::size_t n, Rng& rng) {
    Dataset d;
    d.kind = TaskKind::regression;
    d.inputs.resize(static_cast<Eigen::Index>(n), 2);
    d.targets.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
        const double x = standard_normal(rng);
        const double t = bernoulli(rng, 1.0 / (1.0 + std::exp(-(2.0 * x + 0.5)))) ? 1.0 : 0.0;
        d.inputs(i, 0) = x;
        d.inputs(i, 1) = t;
        d.targets(i) = two_arm_mean(x, t) + standard_normal(rng);
    }
    return d;
}

inline SyntheticData two_arm(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("two-arm-causal", p);
    Rng train_rng = make_rng(derive_seed(seed, 1));
    Rng test_rng = make_rng(derive_seed(seed, 2));
    return {two_arm_draw(p.count("n", 1000), train_rng), two_arm_draw(p.count("test", 1000), test_rng), Matrix()};
}

inline SyntheticData gp_1d(const SyntheticParams& p, std::uint64_t seed) {
    check_synthetic_params("gp-1d", p);
    const std::size_t n = p.count("n", 100);
    const std::size_t m = p.count("test", 200);
    const double range = p.get("range", 4.0);
    const double noise = p.get("noise", 0.1);
    Rng rng = make_rng(derive_seed(seed, 1));
    Matrix x(static_cast<Eigen::Index>(n + m), 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = range * (2.0 * uniform_open(rng) - 1.0);
    const Matrix k = rbf_kernel(p.get("lengthscale", 1.0), p.get("amplitude", 1.0))(x, x);
    const auto chol = cholesky(k, "gp-1d prior");
    Vector z(x.rows());
    for (auto& v : z) v = standard_normal(rng);
    const Vector f = chol.llt.matrixL() * z;
    SyntheticData out;
    for (Dataset* d : {&out.train, &out.test}) d->kind = TaskKind::regression;
    out.train.inputs = x.topRows(static_cast<Eigen::Index>(n));
    out.test.inputs = x.bottomRows(static_cast<Eigen::Index>(m));
    out.train.targets.resize(static_cast<Eigen::Index>(n));
    out.test.targets.resize(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double y = f(i) + std::sqrt(noise) * standard_normal(rng);
        if (i < static_cast<Eigen::Index>(n)) out.train.targets(i) = y;
        else out.test.targets(i - static_cast<Eigen::Index>(n)) = y;
    }
    return out;
}

} // namespace detail

inline SyntheticData make_synthetic(const std::string& kind, const SyntheticParams& params, std::uint64_t seed) {
    SyntheticData out;
    if (kind == "two-cluster-2d") out = detail::two_cluster(params, seed);
    else if (kind == "repeated-pool") out = detail::repeated_pool(params, seed);
    else if (kind == "heavy-tail-pool") out = detail::heavy_tail(params, seed);
    else if (kind == "ambiguous-label") out = detail::ambiguous_label(params, seed);
    else if (kind == "two-arm-causal") out = detail::two_arm(params, seed);
    else if (kind == "gp-1d") out = detail::gp_1d(params, seed);
    else throw config_error("unknown synthetic dataset kind '" + kind + "'");
    out.train.validate();
    out.test.validate();
    return out;
}

} // namespace infoacq
