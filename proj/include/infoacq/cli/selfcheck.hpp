#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "../acq/batchbald.hpp"
#include "../acq/epig.hpp"
#include "../acq/scores.hpp"
#include "../acq/stochastic.hpp"
#include "../density/gda.hpp"
#include "../infomath.hpp"
#include "../kernel/fisher.hpp"
#include "../kernel/gaussian.hpp"
#include "../kernel/kernels.hpp"
#include "../models/gp.hpp"

namespace infoacq {

// Every check passes iff its measured discrepancy is at most the matching tolerance.
struct CheckTolerances {
    double identity = 1e-10;
    double exact = 1e-12;
    double bound = 1e-9;
    double total_variation = 0.02;
    double saturation = 1e-3;

    [[nodiscard]] static CheckTolerances faulty() { return {-1.0, -1.0, -1.0, -1.0, -1.0}; }
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    double millis = 0.0;
};

namespace detail {

inline PredictionCube random_check_cube(Rng& rng, std::size_t n, std::size_t k, std::size_t c) {
    std::vector<double> v(n * k * c);
    for (std::size_t s = 0; s < n * k; ++s) {
        double total = 0;
        for (std::size_t j = 0; j < c; ++j) total += (v[s * c + j] = -std::log(uniform_open(rng)) + 1e-12);
        for (std::size_t j = 0; j < c; ++j) v[s * c + j] /= total;
    }
    return PredictionCube(n, k, c, std::move(v));
}

inline Matrix random_gaussian(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
    return m;
}

inline std::vector<std::size_t> mask_members(std::uint32_t mask, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) out.push_back(i);
    return out;
}

inline ConfigSampler exact_configs() {
    ConfigSampler s;
    s.mode = ConfigMode::exact;
    return s;
}

// Worst violation of submodularity, the BALD upper bound, and the greedy guarantee over small pools.
struct SubmodularReport {
    double submodular = 0, bald_bound = 0, greedy = 0;
};

inline SubmodularReport batchbald_small_pool_report(std::size_t instances, std::uint64_t seed) {
    SubmodularReport r;
    Rng rng = make_rng(seed);
    const auto cfg = exact_configs();
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = 2 + t % 4, k = 1 + t % 3;
        const auto cube = random_check_cube(rng, n, k, 2);
        const auto bald = bald_scores(cube);
        std::vector<double> value(1u << n);
        for (std::uint32_t m = 0; m < (1u << n); ++m) value[m] = batchbald_value(cube, mask_members(m, n), cfg);
        for (std::uint32_t m = 0; m < (1u << n); ++m) {
            double bald_sum = 0;
            for (auto i : mask_members(m, n)) bald_sum += bald[i];
            r.bald_bound = std::max(r.bald_bound, value[m] - bald_sum);
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = x + 1; y < n; ++y) {
                    const std::uint32_t bx = 1u << x, by = 1u << y;
                    if (m & (bx | by)) continue;
                    r.submodular = std::max(r.submodular, value[m | bx | by] + value[m] - value[m | bx] - value[m | by]);
                }
        }
        for (std::size_t b = 1; b <= n; ++b) {
            double best = 0;
            for (std::uint32_t m = 0; m < (1u << n); ++m)
                if (static_cast<std::size_t>(__builtin_popcount(m)) == b) best = std::max(best, value[m]);
            const auto greedy = batchbald_select(cube, b, cfg).indices;
            std::uint32_t gm = 0;
            for (auto i : greedy) gm |= 1u << i;
            r.greedy = std::max(r.greedy, (1 - 1 / std::numbers::e) * best - value[gm]);
        }
    }
    return r;
}

// Total variation between ordered Gumbel-top-2 pairs and the without-replacement product.
inline double gumbel_pair_total_variation(double beta, std::size_t draws, std::uint64_t seed) {
    const ScoreVector s(Vector{{0.2, 1.0, -0.4, 0.6}}, "x");
    Vector w = (beta * s.scores).array().exp();
    w /= w.sum();
    std::map<std::pair<std::size_t, std::size_t>, double> freq;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto b = stochastic_select(s, 2, StochasticMode::softmax, beta, derive_seed(seed, d));
        freq[{b.indices[0], b.indices[1]}] += 1.0 / static_cast<double>(draws);
    }
    double tv = 0;
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            if (i != j)
                tv += std::abs(w(i) * w(j) / (1 - w(i)) -
                               freq[{static_cast<std::size_t>(i), static_cast<std::size_t>(j)}]);
    return 0.5 * tv;
}

} // namespace detail

struct NamedCheck {
    std::string name;
    std::function<double()> discrepancy;
    double CheckTolerances::*tolerance;
};

inline std::vector<NamedCheck> selfcheck_suite() {
    using T = CheckTolerances;
    std::vector<NamedCheck> checks;
    checks.push_back({"batchbald-submodular", [] { return detail::batchbald_small_pool_report(60, 1).submodular; }, &T::bound});
    checks.push_back({"batchbald-below-bald-sum", [] { return detail::batchbald_small_pool_report(60, 2).bald_bound; }, &T::bound});
    checks.push_back({"batchbald-greedy-guarantee", [] { return detail::batchbald_small_pool_report(60, 3).greedy; }, &T::bound});
    checks.push_back({"joint-entropy-single-point", [] {
                          Rng rng = make_rng(4);
                          double worst = 0;
                          for (int t = 0; t < 20; ++t) {
                              const auto cube = detail::random_check_cube(rng, 3, 4, 3);
                              for (std::size_t i = 0; i < 3; ++i) {
                                  std::vector<double> mean(3, 0.0);
                                  for (std::size_t k = 0; k < 4; ++k)
                                      for (std::size_t y = 0; y < 3; ++y) mean[y] += cube(i, k, y) / 4;
                                  worst = std::max(worst, std::abs(batchbald_joint_entropy(cube, {i}, detail::exact_configs()) -
                                                                   detail::entropy_unchecked(mean.data(), 3)));
                              }
                          }
                          return worst;
                      },
                      &T::exact});
    checks.push_back({"gumbel-top-k-pairs", [] {
                          double worst = 0;
                          for (double beta : {0.5, 1.0, 2.0}) worst = std::max(worst, detail::gumbel_pair_total_variation(beta, 20'000, 5));
                          return worst;
                      },
                      &T::total_variation});
    checks.push_back({"epig-between-zero-and-bald", [] {
                          Rng rng = make_rng(6);
                          double worst = 0;
                          for (int t = 0; t < 30; ++t) {
                              const auto cube = detail::random_check_cube(rng, 10, 2 + t % 6, 2 + t % 3);
                              const auto epig = epig_scores(cube, cube.rows({6, 7, 8, 9}));
                              const auto bald = bald_scores(cube);
                              for (std::size_t i = 0; i < 10; ++i)
                                  worst = std::max({worst, -epig[i], epig[i] - bald[i]});
                          }
                          return worst;
                      },
                      &T::bound});
    checks.push_back({"kernel-multinomial-equals-empirical", [] {
                          Rng rng = make_rng(7);
                          const Matrix preds = detail::random_gaussian(rng, 7, 5);
                          return (empirical_pred_kernel(preds).gram - multinomial_psi_kernel(preds, Vector::Constant(5, 0.2)).gram)
                              .cwiseAbs()
                              .maxCoeff();
                      },
                      &T::exact});
    checks.push_back({"kernel-multinomial-twice-dirichlet", [] {
                          Rng rng = make_rng(8);
                          const Matrix preds = detail::random_gaussian(rng, 6, 4);
                          const Vector u = Vector::Constant(4, 0.25);
                          return (multinomial_psi_kernel(preds, u).gram - 2.0 * dirichlet_psi_kernel(preds, u).gram).cwiseAbs().maxCoeff();
                      },
                      &T::exact});
    checks.push_back({"kernel-gradient-equals-predictive", [] {
                          Rng rng = make_rng(9);
                          const Matrix phi = detail::random_gaussian(rng, 30, 4);
                          const auto post = fit_bayes_linear(phi, detail::random_gaussian(rng, 30, 1).col(0), 2.0, 0.3);
                          const Matrix q = detail::random_gaussian(rng, 6, 4);
                          return (posterior_gradient_kernel(post, q).gram - predict_bayes_linear(post, q).cov).cwiseAbs().maxCoeff();
                      },
                      &T::identity});
    checks.push_back({"fisher-logdet-exact-eig", [] {
                          Rng rng = make_rng(10);
                          const double noise = 0.7;
                          const Matrix train = detail::random_gaussian(rng, 15, 4);
                          const auto post = fit_bayes_linear(train, detail::random_gaussian(rng, 15, 1).col(0), 1.5, noise);
                          const Matrix pool = detail::random_gaussian(rng, 5, 4);
                          std::vector<Matrix> blocks;
                          for (Eigen::Index i = 0; i < 5; ++i) blocks.push_back(pool.row(i).transpose() * pool.row(i) / noise);
                          const std::vector<std::size_t> batch{0, 2, 4};
                          const Matrix sub = pool(batch, Eigen::all);
                          Matrix m = sub * post.covariance * sub.transpose() / noise;
                          m.diagonal().array() += 1.0;
                          return std::abs(fisher_eig_bounds(FisherBundle::dense(post.precision, blocks), batch).logdet -
                                          0.5 * std::log(m.determinant()));
                      },
                      &T::identity});
    checks.push_back({"fisher-logdet-below-trace", [] {
                          Rng rng = make_rng(11);
                          double worst = 0;
                          for (int t = 0; t < 30; ++t) {
                              const Eigen::Index p = 2 + t % 5;
                              std::vector<Matrix> blocks;
                              for (int i = 0; i < 3; ++i) {
                                  const Matrix a = detail::random_gaussian(rng, p, 1 + i);
                                  blocks.push_back(a * a.transpose());
                              }
                              Matrix h = detail::random_gaussian(rng, p, p);
                              h = h * h.transpose() / static_cast<double>(p);
                              h.diagonal().array() += 0.5;
                              const auto b = fisher_eig_bounds(FisherBundle::dense(h, blocks), {0, 1, 2});
                              worst = std::max(worst, b.logdet - b.trace);
                          }
                          return worst;
                      },
                      &T::bound});
    checks.push_back({"similarity-equals-weight-space", [] {
                          Rng rng = make_rng(12);
                          Matrix h = detail::random_gaussian(rng, 5, 5);
                          h = h * h.transpose() / 5.0;
                          h.diagonal().array() += 0.5;
                          const auto bundle = FisherBundle::dense(h, {});
                          const Matrix j = detail::random_gaussian(rng, 6, 5);
                          return std::abs(similarity_logdet(bundle, j, {0, 3, 4}) - weight_space_logdet(bundle, j, {0, 3, 4}));
                      },
                      &T::bound});
    checks.push_back({"variance-equals-linearized-mi", [] {
                          Rng rng = make_rng(13);
                          double worst = 0;
                          for (int t = 0; t < 20; ++t) {
                              const auto cube = detail::random_check_cube(rng, 8, 1 + t % 6, 2 + t % 4);
                              const auto a = prediction_variance_scores(cube), b = linearized_mi_scores(cube);
                              for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
                          }
                          return worst;
                      },
                      &T::exact});
    checks.push_back({"entropy-rmse-decomposition", [] {
                          Rng rng = make_rng(14);
                          double worst = 0;
                          for (int t = 0; t < 50; ++t) {
                              const auto cube = detail::random_check_cube(rng, 1, 2 + t % 7, 2 + t % 4);
                              const auto r = entropy_rmse_decomposition(cube, 0);
                              worst = std::max(worst, std::abs(r.rmse * r.rmse - r.std * r.std - r.bias * r.bias));
                          }
                          return worst;
                      },
                      &T::identity});
    checks.push_back({"stirling-bound", [] {
                          double worst = 0;
                          for (std::size_t n = 1; n <= 64; ++n)
                              for (std::size_t r = 0; r <= n; ++r) {
                                  const auto s = stirling_binomial_bound(n, r);
                                  worst = std::max({worst, s.exact - s.bound, s.gap - std::log(static_cast<double>(n))});
                              }
                          return worst;
                      },
                      &T::bound});
    checks.push_back({"joint-bald-saturates", [] {
                          Matrix pool(8, 1);
                          for (int i = 0; i < 8; ++i) pool(i, 0) = 2 * i - 7;
                          const GpRegression gp(Matrix(0, 1), Vector(0), rbf_kernel(1e-3, 1.0), 1.0);
                          return std::abs(gaussian_joint_bald(gp.predict(pool)) - 4.0 * std::numbers::ln2);
                      },
                      &T::saturation});
    return checks;
}

inline std::vector<CheckResult> run_selfcheck(const CheckTolerances& tol = {}) {
    std::vector<CheckResult> out;
    for (const auto& check : selfcheck_suite()) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult r;
        r.name = check.name;
        r.tolerance = tol.*check.tolerance;
        try {
            r.discrepancy = std::max(0.0, check.discrepancy());
            r.passed = std::isfinite(r.discrepancy) && r.discrepancy <= r.tolerance;
        } catch (const std::exception&) {
            r.discrepancy = std::numeric_limits<double>::infinity();
            r.passed = false;
        }
        r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace infoacq
