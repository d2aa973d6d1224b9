#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infoacq/infomath.hpp"

using namespace infoacq;

namespace {

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(n);
    double total = 0.0;
    for (auto& x : v) total += (x = e(gen));
    for (auto& x : v) x /= total;
    return v;
}

JointTable random_table(std::mt19937_64& gen, std::vector<std::string> labels, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return JointTable(std::move(labels), std::move(shape), random_simplex(gen, n));
}

double manual_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0) h -= x * std::log(x);
    return h;
}

struct McMoments {
    double mean, mean_se, var, var_se;
};

// Independent oracle: entropy of Dirichlet draws built from std::gamma_distribution.
McMoments dirichlet_entropy_mc(const Vector& alpha, std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::gamma_distribution<double>> gammas;
    for (double a : alpha) gammas.emplace_back(a, 1.0);
    std::vector<double> hs(draws);
    std::vector<double> p(static_cast<std::size_t>(alpha.size()));
    for (std::size_t s = 0; s < draws; ++s) {
        double total = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] = gammas[i](gen));
        double h = 0.0;
        for (double x : p)
            if (x > 0) h -= (x / total) * std::log(x / total);
        hs[s] = h;
    }
    double mean = 0.0;
    for (double h : hs) mean += h;
    mean /= static_cast<double>(draws);
    double m2 = 0.0, m4 = 0.0;
    for (double h : hs) {
        const double d = (h - mean) * (h - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= static_cast<double>(draws);
    m4 /= static_cast<double>(draws);
    const double n = static_cast<double>(draws);
    return {mean, std::sqrt(m2 / n), m2, std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
}

} // namespace

TEST(Entropy, Examples) {
    EXPECT_NEAR(entropy({0.5, 0.5}), std::numbers::ln2, 1e-12);
    EXPECT_EQ(entropy({1.0, 0.0}), 0.0);
    EXPECT_NEAR(entropy({0.75, 0.25}), 0.562335, 1e-6);
    EXPECT_NEAR(entropy({0.75, 0.25}), manual_entropy({0.75, 0.25}), 1e-15);
}

TEST(Entropy, RejectsInvalid) {
    EXPECT_THROW(Categorical({0.5, 0.6}), contract_error);
    EXPECT_THROW(Categorical({-0.1, 1.1}), contract_error);
    EXPECT_THROW(Categorical(Vector(0)), contract_error);
}

TEST(Kl, Examples) {
    EXPECT_NEAR(kl_divergence({0.5, 0.5}, {0.5, 0.5}), 0.0, 1e-15);
    EXPECT_NEAR(kl_divergence({1.0, 0.0}, {0.5, 0.5}), std::numbers::ln2, 1e-12);
    EXPECT_NEAR(kl_divergence({0.9, 0.1}, {0.5, 0.5}), 0.9 * std::log(1.8) + 0.1 * std::log(0.2), 1e-12);
    EXPECT_NEAR(kl_divergence({0.9, 0.1}, {0.5, 0.5}), 0.368064, 1e-6);
    EXPECT_THROW(kl_divergence({0.5, 0.5}, {1.0, 0.0}), domain_error);
}

TEST(InformationGain, Examples) {
    const JointTable indep({"x", "y"}, {2, 3}, {0.1, 0.2, 0.1, 0.15, 0.3, 0.15});
    for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(information_gain(indep, "y", y), 0.0, 1e-12);
    const JointTable same({"x", "y"}, {2, 2}, {0.5, 0.0, 0.0, 0.5});
    EXPECT_NEAR(information_gain(same, "y", 0), std::numbers::ln2, 1e-12);
    const JointTable zero({"x", "y"}, {2, 2}, {0.5, 0.0, 0.5, 0.0});
    EXPECT_THROW(information_gain(zero, "y", 1), domain_error);
}

TEST(InformationGain, CanBeNegative) {
    // Observing the rare y makes X more uncertain.
    const JointTable t({"x", "y"}, {2, 2}, {0.85, 0.05, 0.05, 0.05});
    EXPECT_LT(information_gain(t, "y", 1), 0.0);
}

TEST(InformationGain, ChainsOnRandomTables) {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 200; ++rep) {
        const auto t = random_table(gen, {"x", "y1", "y2"}, {2, 2, 2});
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                const std::vector<Observation> both{{"y1", a}, {"y2", b}};
                const std::vector<Observation> first{{"y1", a}};
                const std::vector<Observation> second{{"y2", b}};
                const double lhs = information_gain(t, "x", both);
                const double rhs = information_gain(t, "x", first) + information_gain(t, "x", second, first);
                EXPECT_NEAR(lhs, rhs, 1e-12);
            }
    }
}

TEST(InformationGain, AveragesToMutualInformation) {
    std::mt19937_64 gen(12);
    for (int rep = 0; rep < 100; ++rep) {
        const auto t = random_table(gen, {"x", "y"}, {3, 4});
        const auto py = t.marginal({"y"});
        double avg_ig = 0.0, avg_surprise = 0.0;
        for (std::size_t y = 0; y < 4; ++y) {
            avg_ig += py.probs()[y] * information_gain(t, "y", y);
            avg_surprise += py.probs()[y] * surprise(t, "y", y);
        }
        const double mi = mutual_information(t, "x", "y");
        EXPECT_NEAR(avg_ig, mi, 1e-9);
        EXPECT_NEAR(avg_surprise, mi, 1e-9);
    }
}

TEST(Surprise, MatchesKlAndIsNonnegative) {
    std::mt19937_64 gen(13);
    for (int rep = 0; rep < 200; ++rep) {
        const auto t = random_table(gen, {"x", "y"}, {3, 3});
        for (std::size_t y = 0; y < 3; ++y) {
            const double s = surprise(t, "y", y);
            EXPECT_GE(s, 0.0);
            const auto px = t.marginal({"x"}).probs();
            const auto post = t.condition(t.axis("y"), y).probs();
            double kl = 0.0;
            for (std::size_t i = 0; i < 3; ++i) kl += post[i] * std::log(post[i] / px[i]);
            EXPECT_NEAR(s, kl, 1e-12);
        }
    }
    const JointTable indep({"x", "y"}, {2, 2}, {0.25, 0.25, 0.25, 0.25});
    EXPECT_NEAR(surprise(indep, "y", 1), 0.0, 1e-15);
}

TEST(Surprise, ExpectedPointwiseEntropyCounterexample) {
    // Mass 1/3 on (0,0), (0,1), (1,0).
    const JointTable t({"x", "y"}, {2, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
    const auto px = t.marginal({"x"}).probs();
    const auto post = t.condition(t.axis("y"), 1).probs();
    double expected_pointwise = 0.0;
    for (std::size_t x = 0; x < 2; ++x)
        if (post[x] > 0) expected_pointwise -= post[x] * std::log(px[x]);
    EXPECT_NEAR(expected_pointwise, std::log(1.5), 1e-12);
    const double hx = t.marginal({"x"}).entropy();
    EXPECT_NEAR(hx, std::log(3.0 * std::cbrt(2.0) / 2.0), 1e-12);
    EXPECT_GT(std::abs(expected_pointwise - hx), 0.1);
    EXPECT_NEAR(surprise(t, "y", 1), std::log(1.5), 1e-12);
    EXPECT_NEAR(information_gain(t, "y", 1), hx, 1e-12);
}

TEST(Surprise, DoesNotChain) {
    // Axes (y1, y2, x).
    const double e = 1.0 / 8;
    const JointTable t({"y1", "y2", "x"}, {2, 2, 2}, {e, e, e, e, e, e, 0.25, 0.0});
    const std::vector<Observation> first{{"y1", 1}};
    const std::vector<Observation> both{{"y1", 1}, {"y2", 1}};
    // Pointwise information ln p(y1=1|x)/p(y1=1) averaged under p(x | y1=1, y2=1).
    const auto joint_x_y1 = t.marginal({"x", "y1"});
    const auto px = t.marginal({"x"}).probs();
    const double py1 = t.marginal({"y1"}).probs()[1];
    const auto post = condition_on(t, both).probs();
    double averaged = 0.0;
    for (std::size_t x = 0; x < 2; ++x) {
        if (post[x] <= 0) continue;
        const std::size_t idx[] = {x, 1};
        averaged += post[x] * std::log(joint_x_y1.at(idx) / px[x] / py1);
    }
    EXPECT_NEAR(averaged, std::log(6.0 / 5.0), 1e-12);
    const double s = surprise(t, "x", first);
    EXPECT_NEAR(s, 0.75 * std::log(6.0 / 5.0) + 0.25 * std::log(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(s, std::log(2.0 * std::sqrt(3.0) * std::pow(5.0, 0.25) / 5.0), 1e-12);
    EXPECT_GT(std::abs(averaged - s), 0.1);
    // Information gain on the same table still chains.
    const std::vector<Observation> second{{"y2", 1}};
    EXPECT_NEAR(information_gain(t, "x", both),
                information_gain(t, "x", first) + information_gain(t, "x", second, first), 1e-12);
}

TEST(TripleInformation, MatchesDefinition) {
    std::mt19937_64 gen(14);
    const auto t = random_table(gen, {"x", "y", "z"}, {2, 3, 2});
    const Observation z{"z", 1};
    const double expected = mutual_information(t, "x", "y") - mutual_information(t.condition(2, 1), "x", "y");
    EXPECT_NEAR(triple_information(t, "x", "y", z), expected, 1e-12);
}

TEST(Nonnegativity, RandomDistributions) {
    std::mt19937_64 gen(15);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 1 + rep % 7;
        const auto p = random_simplex(gen, n);
        const auto q = random_simplex(gen, n);
        const Categorical cp(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(n)));
        const Categorical cq(Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(n)));
        EXPECT_GE(entropy(cp), 0.0);
        EXPECT_LE(entropy(cp), std::log(static_cast<double>(n)) + 1e-12);
        EXPECT_GE(kl_divergence(cp, cq), 0.0);
    }
}

TEST(Dirichlet, ExpectedEntropyExamples) {
    EXPECT_NEAR(dirichlet_expected_entropy({1.0, 1.0}), 0.5, 1e-12);
    EXPECT_NEAR(dirichlet_expected_entropy({1e8, 1e8}), std::numbers::ln2, 1e-7);
    for (const Vector& alpha : {Vector{{1.0, 1.0}}, Vector{{2.0, 1.0, 1.0}}}) {
        const auto mc = dirichlet_entropy_mc(alpha, 1'000'000, 21);
        EXPECT_NEAR(dirichlet_expected_entropy(DirichletParams(alpha)), mc.mean, 3 * mc.mean_se);
    }
}

TEST(Dirichlet, EntropyVarianceExamples) {
    EXPECT_NEAR(dirichlet_entropy_variance({1e8, 1e8}), 0.0, 1e-7);
    for (const Vector& alpha : {Vector{{1.0, 1.0}}, Vector{{5.0, 2.0, 1.0}}}) {
        const auto mc = dirichlet_entropy_mc(alpha, 1'000'000, 22);
        EXPECT_NEAR(dirichlet_entropy_variance(DirichletParams(alpha)), mc.var, 3 * mc.var_se);
    }
}

TEST(Dirichlet, AgreesWithMonteCarloOnRandomAlpha) {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> conc(0.2, 10.0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto k = 2 + rep % 4;
        Vector alpha(k);
        for (auto& a : alpha) a = conc(gen);
        const auto mc = dirichlet_entropy_mc(alpha, 200'000, 100 + static_cast<std::uint64_t>(rep));
        const DirichletParams d(alpha);
        EXPECT_NEAR(dirichlet_expected_entropy(d), mc.mean, 3 * mc.mean_se) << "rep " << rep;
        EXPECT_NEAR(dirichlet_entropy_variance(d), mc.var, 3 * mc.var_se) << "rep " << rep;
        EXPECT_GE(dirichlet_expected_entropy(d), 0.0);
        EXPECT_LE(dirichlet_expected_entropy(d), std::log(static_cast<double>(k)));
    }
}

TEST(Dirichlet, MomentMatch) {
    const auto d = dirichlet_moment_match({0.5, 0.5}, 0.5);
    EXPECT_NEAR(d.alpha()(0), 1.0, 1e-8);
    EXPECT_NEAR(d.alpha()(1), 1.0, 1e-8);

    std::mt19937_64 gen(24);
    std::uniform_real_distribution<double> conc(0.2, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
        Vector alpha(3);
        for (auto& a : alpha) a = conc(gen);
        const DirichletParams src(alpha);
        const Categorical mean(alpha / src.alpha0());
        const double h = dirichlet_expected_entropy(src);
        const auto back = dirichlet_moment_match(mean, h);
        EXPECT_NEAR(back.alpha0() / src.alpha0(), 1.0, 1e-6);
        EXPECT_NEAR(dirichlet_expected_entropy(back), h, 1e-8);
        EXPECT_LT((back.alpha() / back.alpha0() - mean.probs()).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(dirichlet_moment_match({0.5, 0.5}, std::numbers::ln2 - 1e-15), overflow_error);
    EXPECT_THROW(dirichlet_moment_match({0.5, 0.5}, 0.7), domain_error);
    EXPECT_THROW(dirichlet_moment_match({0.5, 0.5}, 0.0), domain_error);
}

TEST(Stirling, Examples) {
    const auto zero = stirling_binomial_bound(4, 0);
    EXPECT_EQ(zero.bound, 0.0);
    EXPECT_EQ(zero.exact, 0.0);
    const auto half = stirling_binomial_bound(4, 2);
    EXPECT_NEAR(half.bound, 4 * std::numbers::ln2, 1e-12);
    EXPECT_NEAR(half.exact, std::log(6.0), 1e-12);
    EXPECT_THROW(stirling_binomial_bound(3, 4), domain_error);
}

TEST(Stirling, ExhaustiveBounds) {
    for (std::size_t n = 1; n <= 64; ++n) {
        double binom = 1.0;
        for (std::size_t r = 0; r <= n; ++r) {
            const auto s = stirling_binomial_bound(n, r);
            EXPECT_NEAR(s.exact, std::log(binom), 1e-9 * std::max(1.0, std::log(binom)));
            EXPECT_GE(s.bound, s.exact - 1e-12);
            EXPECT_LE(s.gap, std::log(static_cast<double>(n)) + 1e-12);
            binom = binom * static_cast<double>(n - r) / static_cast<double>(r + 1);
        }
    }
}
