#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "infoacq/acq/batchbald.hpp"
#include "infoacq/acq/epig.hpp"
#include "infoacq/acq/scores.hpp"
#include "infoacq/acq/stochastic.hpp"

using namespace infoacq;

namespace {

PredictionCube random_cube(std::mt19937_64& gen, std::size_t n, std::size_t k, std::size_t c, double sharpness = 1.0,
                           std::uint64_t seed = 0) {
    std::gamma_distribution<double> g(sharpness, 1.0);
    std::vector<double> v(n * k * c);
    for (std::size_t s = 0; s < n * k; ++s) {
        double total = 0;
        for (std::size_t j = 0; j < c; ++j) total += (v[s * c + j] = g(gen) + 1e-12);
        for (std::size_t j = 0; j < c; ++j) v[s * c + j] /= total;
    }
    return PredictionCube(n, k, c, std::move(v), seed);
}

double h(std::initializer_list<double> p) {
    double out = 0;
    for (double x : p)
        if (x > 0) out -= x * std::log(x);
    return out;
}

// Joint entropy by explicit enumeration of every label configuration.
double brute_joint_entropy(const PredictionCube& cube, const std::vector<std::size_t>& batch) {
    const std::size_t c = cube.classes();
    std::size_t configs = 1;
    for (std::size_t i = 0; i < batch.size(); ++i) configs *= c;
    double out = 0;
    for (std::size_t cfg = 0; cfg < configs; ++cfg) {
        double p = 0;
        for (std::size_t k = 0; k < cube.members(); ++k) {
            double prod = 1;
            std::size_t rest = cfg;
            for (auto i : batch) {
                prod *= cube(i, k, rest % c);
                rest /= c;
            }
            p += prod / static_cast<double>(cube.members());
        }
        if (p > 0) out -= p * std::log(p);
    }
    return out;
}

double brute_batchbald(const PredictionCube& cube, const std::vector<std::size_t>& batch) {
    double cond = 0;
    for (auto i : batch)
        for (std::size_t k = 0; k < cube.members(); ++k) {
            double hk = 0;
            for (std::size_t y = 0; y < cube.classes(); ++y) {
                const double p = cube(i, k, y);
                if (p > 0) hk -= p * std::log(p);
            }
            cond += hk / static_cast<double>(cube.members());
        }
    return brute_joint_entropy(cube, batch) - cond;
}

ConfigSampler exact_sampler() {
    ConfigSampler s;
    s.mode = ConfigMode::exact;
    return s;
}

std::vector<std::vector<std::size_t>> subsets_of(std::size_t n, std::size_t size) {
    std::vector<std::vector<std::size_t>> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(i);
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(Bald, Examples) {
    const PredictionCube same(2, 3, 2, {0.3, 0.7, 0.3, 0.7, 0.3, 0.7, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
    EXPECT_EQ(bald_scores(same).scores.maxCoeff(), 0.0);
    const PredictionCube split(1, 2, 2, {1.0, 0.0, 0.0, 1.0});
    EXPECT_NEAR(bald_scores(split)[0], std::numbers::ln2, 1e-12);
    const PredictionCube pair(1, 2, 2, {0.9, 0.1, 0.6, 0.4});
    const double oracle = h({0.75, 0.25}) - 0.5 * (h({0.9, 0.1}) + h({0.6, 0.4}));
    EXPECT_NEAR(bald_scores(pair)[0], oracle, 1e-12);
    EXPECT_NEAR(bald_scores(pair)[0], 0.063288, 1e-6);
}

TEST(ConsensusScores, OneHotAndUniform) {
    const PredictionCube onehot(1, 3, 3, {0, 1, 0, 0, 1, 0, 0, 1, 0});
    EXPECT_EQ(entropy_scores(onehot)[0], 0.0);
    EXPECT_EQ(variation_ratio_scores(onehot)[0], 0.0);
    EXPECT_EQ(mean_std_scores(onehot)[0], 0.0);
    const double t = 1.0 / 3;
    const PredictionCube uniform(1, 2, 3, {t, t, t, t, t, t});
    EXPECT_NEAR(entropy_scores(uniform)[0], std::log(3.0), 1e-12);
    EXPECT_NEAR(variation_ratio_scores(uniform)[0], 1.0 - t, 1e-12);
    EXPECT_NEAR(mean_std_scores(uniform)[0], 0.0, 1e-12);
}

TEST(ConsensusScores, VarianceEqualsLinearizedMi) {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 50; ++rep) {
        const auto cube = random_cube(gen, 20, 1 + rep % 7, 2 + rep % 4, 0.5);
        const auto var = prediction_variance_scores(cube);
        const auto lin = linearized_mi_scores(cube);
        for (std::size_t i = 0; i < cube.points(); ++i) {
            // Independent evaluation of Σ_y Var_k p.
            double manual = 0;
            for (std::size_t y = 0; y < cube.classes(); ++y) {
                double m = 0, m2 = 0;
                for (std::size_t k = 0; k < cube.members(); ++k) {
                    m += cube(i, k, y);
                    m2 += cube(i, k, y) * cube(i, k, y);
                }
                m /= static_cast<double>(cube.members());
                manual += m2 / static_cast<double>(cube.members()) - m * m;
            }
            EXPECT_NEAR(var[i], lin[i], 1e-12);
            EXPECT_NEAR(var[i], manual, 1e-12);
        }
    }
}

TEST(BatchBaldJointEntropy, SinglePointAndSingleMember) {
    std::mt19937_64 gen(32);
    const auto cube = random_cube(gen, 5, 4, 3);
    EXPECT_NEAR(batchbald_joint_entropy(cube, {2}, {}), entropy_scores(cube)[2], 1e-12);
    const auto one = random_cube(gen, 5, 1, 3);
    const auto ent = entropy_scores(one);
    EXPECT_NEAR(batchbald_joint_entropy(one, {0, 1, 3}, {}), ent[0] + ent[1] + ent[3], 1e-12);
}

TEST(BatchBaldJointEntropy, MatchesEnumeration) {
    std::mt19937_64 gen(33);
    for (int rep = 0; rep < 50; ++rep) {
        const auto cube = random_cube(gen, 2, 2, 2);
        const double brute = brute_joint_entropy(cube, {0, 1});
        EXPECT_NEAR(batchbald_joint_entropy(cube, {0, 1}, exact_sampler()), brute, 1e-12);
        ConfigSampler sampled;
        sampled.mode = ConfigMode::sampled;
        sampled.samples = 10'000;
        sampled.seed = static_cast<std::uint64_t>(rep);
        const auto est = batchbald_joint_entropy_estimate(cube, {0, 1}, sampled);
        EXPECT_NEAR(est.value, brute, 3 * est.std_error + 1e-12);
    }
}

TEST(BatchBaldJointEntropy, ExactModeRespectsCap) {
    std::mt19937_64 gen(34);
    const auto cube = random_cube(gen, 13, 2, 2);
    std::vector<std::size_t> batch(13);
    std::iota(batch.begin(), batch.end(), 0);
    EXPECT_THROW(batchbald_joint_entropy(cube, batch, exact_sampler()), config_error);
    EXPECT_NO_THROW(batchbald_joint_entropy(cube, batch, {}));
}

TEST(BatchBaldSelect, SizeOneMatchesBald) {
    std::mt19937_64 gen(35);
    for (int rep = 0; rep < 20; ++rep) {
        const auto cube = random_cube(gen, 15, 5, 3, 0.5);
        const auto bald = bald_scores(cube);
        EXPECT_EQ(batchbald_select(cube, 1, {}).indices.front(), top_k(bald, 1).indices.front());
    }
}

TEST(BatchBaldSelect, AvoidsDuplicates) {
    // Member k predicts bit i of k for point i with confidence q, so fresh points carry more
    // information than a second look at an already selected one.
    std::mt19937_64 gen(36);
    std::uniform_real_distribution<double> conf(0.85, 0.99);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::size_t> perm(16);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        std::vector<double> v;
        for (std::size_t i = 0; i < 4; ++i) {
            const double q = conf(gen);
            for (std::size_t k = 0; k < 16; ++k) {
                const bool bit = (perm[k] >> i) & 1u;
                v.push_back(bit ? 1 - q : q);
                v.push_back(bit ? q : 1 - q);
            }
        }
        const PredictionCube base(4, 16, 2, v);
        const auto doubled = base.rows({0, 1, 2, 3, 0, 1, 2, 3});
        const auto batch = batchbald_select(doubled, 4, exact_sampler());
        std::set<std::size_t> unique;
        for (auto i : batch.indices) unique.insert(i % 4);
        EXPECT_EQ(unique.size(), 4u);
        // Top-k BALD, by contrast, takes both copies of the best points.
        const auto naive = top_k(bald_scores(doubled), 4);
        std::set<std::size_t> naive_unique;
        for (auto i : naive.indices) naive_unique.insert(i % 4);
        EXPECT_EQ(naive_unique.size(), 2u);
    }
}

TEST(BatchBaldSelect, GreedyWithinGuarantee) {
    std::mt19937_64 gen(37);
    for (int rep = 0; rep < 30; ++rep) {
        const auto cube = random_cube(gen, 6, 3, 2, 0.5);
        const auto greedy = batchbald_select(cube, 3, exact_sampler());
        double best = 0;
        for (const auto& s : subsets_of(6, 3)) best = std::max(best, brute_batchbald(cube, s));
        EXPECT_GE(brute_batchbald(cube, greedy.indices), (1 - 1 / std::numbers::e) * best - 1e-12);
        EXPECT_NEAR(greedy.scores_at_selection.back(), brute_batchbald(cube, greedy.indices), 1e-12);
    }
}

TEST(BatchBaldSelect, SampledModeIsDeterministic) {
    std::mt19937_64 gen(38);
    const auto cube = random_cube(gen, 30, 4, 4, 0.5);
    ConfigSampler s;
    s.cap = 16;
    s.samples = 500;
    s.seed = 3;
    const auto a = batchbald_select(cube, 5, s);
    const auto b = batchbald_select(cube, 5, s);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(std::set<std::size_t>(a.indices.begin(), a.indices.end()).size(), 5u);
}

TEST(BatchBaldProperties, SubmodularAndBoundedByBald) {
    std::mt19937_64 gen(39);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rep % 4;
        const std::size_t k = 1 + rep % 3;
        const auto cube = random_cube(gen, n, k, 2, 0.5);
        const auto bald = bald_scores(cube);
        auto f = [&](const std::vector<std::size_t>& s) { return batchbald_value(cube, s, exact_sampler()); };
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            std::vector<std::size_t> a;
            double bald_sum = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) {
                    a.push_back(i);
                    bald_sum += bald[i];
                }
            EXPECT_GE(bald_sum + 1e-12, f(a));
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = x + 1; y < n; ++y) {
                    if ((mask & (1u << x)) || (mask & (1u << y))) continue;
                    auto ax = a, ay = a, axy = a;
                    ax.push_back(x);
                    ay.push_back(y);
                    axy.push_back(x);
                    axy.push_back(y);
                    EXPECT_GE(f(ax) + f(ay), f(axy) + f(a) - 1e-9);
                }
        }
    }
}

TEST(Stochastic, ColdLimitIsTopK) {
    const ScoreVector s(Vector{{0.3, 0.9, 0.1, 0.5, 0.7}}, "x");
    for (auto mode : {StochasticMode::softmax, StochasticMode::power, StochasticMode::softrank})
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            EXPECT_EQ(stochastic_select(s, 3, mode, 1e9, seed).indices, top_k(s, 3).indices);
}

TEST(Stochastic, SoftmaxFirstPickFrequencies) {
    const ScoreVector s(Vector{{std::log(1.0), std::log(2.0), std::log(3.0)}}, "x");
    const int draws = 100'000;
    std::vector<int> counts(3, 0);
    for (int seed = 0; seed < draws; ++seed)
        ++counts[stochastic_select(s, 1, StochasticMode::softmax, 1.0, static_cast<std::uint64_t>(seed)).indices[0]];
    const double expected[] = {1.0 / 6, 1.0 / 3, 0.5};
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::sqrt(expected[i] * (1 - expected[i]) / draws);
        EXPECT_NEAR(counts[i] / static_cast<double>(draws), expected[i], 3 * sigma);
    }
}

TEST(Stochastic, PowerFrequenciesProportionalToScore) {
    const ScoreVector s(Vector{{0.5, 0.0, 1.5, 2.0}}, "x");
    const int draws = 100'000;
    std::vector<int> counts(4, 0);
    for (int seed = 0; seed < draws; ++seed)
        ++counts[stochastic_select(s, 1, StochasticMode::power, 1.0, static_cast<std::uint64_t>(seed)).indices[0]];
    EXPECT_EQ(counts[1], 0);
    for (int i : {0, 2, 3}) {
        const double p = s[static_cast<std::size_t>(i)] / 4.0;
        EXPECT_NEAR(counts[static_cast<std::size_t>(i)] / static_cast<double>(draws), p, 3 * std::sqrt(p * (1 - p) / draws));
    }
    EXPECT_THROW(stochastic_select(ScoreVector(Vector{{1.0, -0.1}}, "x"), 1, StochasticMode::power, 1.0, 0), domain_error);
}

TEST(Stochastic, OrderedPairsMatchWithoutReplacementProduct) {
    const ScoreVector s(Vector{{0.2, 1.0, -0.4, 0.6}}, "x");
    for (double beta : {0.5, 1.0, 2.0}) {
        Vector w = (beta * s.scores).array().exp();
        w /= w.sum();
        std::map<std::pair<std::size_t, std::size_t>, int> counts;
        const int draws = 100'000;
        for (int seed = 0; seed < draws; ++seed) {
            const auto b = stochastic_select(s, 2, StochasticMode::softmax, beta, static_cast<std::uint64_t>(seed) + 7777);
            ++counts[{b.indices[0], b.indices[1]}];
        }
        double tv = 0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                if (i == j) continue;
                const double p = w(static_cast<Eigen::Index>(i)) * w(static_cast<Eigen::Index>(j)) / (1 - w(static_cast<Eigen::Index>(i)));
                tv += std::abs(p - counts[{i, j}] / static_cast<double>(draws));
            }
        EXPECT_LT(0.5 * tv, 0.01) << "beta " << beta;
    }
}

TEST(Stochastic, MaskedNeverSelectedAndDeterministic) {
    ScoreVector s(Vector{{1.0, 5.0, 2.0, std::nan("")}}, "x");
    s.mask(1);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto b = stochastic_select(s, 2, StochasticMode::softrank, 0.0, seed);
        for (auto i : b.indices) EXPECT_TRUE(i == 0 || i == 2);
        EXPECT_EQ(b.indices, stochastic_select(s, 2, StochasticMode::softrank, 0.0, seed).indices);
    }
}

TEST(Epig, Examples) {
    std::mt19937_64 gen(40);
    const auto single = random_cube(gen, 6, 1, 3);
    EXPECT_EQ(epig_scores(single, single.rows({0, 1})).scores.maxCoeff(), 0.0);
    const PredictionCube x(1, 2, 2, {1, 0, 0, 1});
    const PredictionCube t(1, 2, 2, {0, 1, 1, 0});
    EXPECT_NEAR(epig_scores(x, t)[0], std::numbers::ln2, 1e-12);
    const PredictionCube other(1, 2, 2, {0, 1, 1, 0}, 99);
    EXPECT_THROW(epig_scores(x, other), contract_error);
}

TEST(Epig, BoundedByBald) {
    std::mt19937_64 gen(41);
    for (int rep = 0; rep < 100; ++rep) {
        const auto cube = random_cube(gen, 12, 2 + rep % 9, 2 + rep % 3, 0.4);
        const auto epig = epig_scores(cube, cube.rows({8, 9, 10, 11}));
        const auto bald = bald_scores(cube);
        for (std::size_t i = 0; i < cube.points(); ++i) {
            EXPECT_GE(epig[i], 0.0);
            EXPECT_LE(epig[i], bald[i] + 1e-12);
            EXPECT_LE(epig[i], std::log(static_cast<double>(cube.classes())));
        }
    }
}

namespace {

// Finite parameter set with uniform prior; inputs are table rows.
struct TableModel {
    using Parameter = std::size_t;
    using Input = std::size_t;
    using Label = std::size_t;
    std::vector<std::vector<std::vector<double>>> probs;  // [input][parameter][class]
    std::size_t draw_parameter(Rng& rng) const { return uniform_index(rng, probs[0].size()); }
    double log_likelihood(std::size_t theta, std::size_t x, std::size_t y) const { return std::log(probs[x][theta][y]); }
    std::size_t sample_label(std::size_t theta, std::size_t x, Rng& rng) const { return categorical_draw(rng, probs[x][theta]); }

    PredictionCube cube(const std::vector<std::size_t>& inputs) const {
        std::vector<double> v;
        for (auto x : inputs)
            for (const auto& row : probs[x]) v.insert(v.end(), row.begin(), row.end());
        return PredictionCube(inputs.size(), probs[0].size(), probs[0][0].size(), v);
    }
};

TableModel make_table_model(std::mt19937_64& gen, std::size_t inputs, std::size_t params, std::size_t classes) {
    TableModel m;
    std::gamma_distribution<double> g(0.7, 1.0);
    m.probs.assign(inputs, std::vector<std::vector<double>>(params, std::vector<double>(classes)));
    for (auto& a : m.probs)
        for (auto& b : a) {
            double total = 0;
            for (auto& v : b) total += (v = g(gen) + 0.02);
            for (auto& v : b) v /= total;
        }
    return m;
}

} // namespace

TEST(EpigNestedMc, DeterministicModelGivesZero) {
    TableModel m;
    m.probs = {{{0.3, 0.7}}, {{0.9, 0.1}}};
    const auto est = epig_nested_mc(m, std::size_t{0}, [](Rng&) { return std::size_t{1}; }, 10, 50, 1);
    EXPECT_NEAR(est.value, 0.0, 1e-12);
}

TEST(EpigNestedMc, AgreesWithCategoricalEstimator) {
    std::mt19937_64 gen(42);
    const auto model = make_table_model(gen, 4, 5, 3);
    const std::vector<std::size_t> targets{1, 2, 3};
    const double exact = epig_scores(model.cube({0}), model.cube(targets))[0];
    std::vector<double> reps;
    for (std::uint64_t r = 0; r < 20; ++r)
        reps.push_back(epig_nested_mc(model, std::size_t{0}, [&](Rng& rng) { return targets[uniform_index(rng, 3)]; },
                                      4000, 400, 1000 + r)
                           .value);
    double mean = 0, var = 0;
    for (double v : reps) mean += v / 20;
    for (double v : reps) var += (v - mean) * (v - mean) / 19;
    EXPECT_NEAR(mean, exact, 3 * std::sqrt(var / 20));
}

TEST(EpigNestedMc, VarianceScalesInverselyWithOuterSamples) {
    std::mt19937_64 gen(43);
    const auto model = make_table_model(gen, 3, 4, 2);
    std::vector<double> log_m, log_var;
    for (std::size_t m : {16, 32, 64, 128, 256}) {
        std::vector<double> reps;
        for (std::uint64_t r = 0; r < 60; ++r)
            reps.push_back(epig_nested_mc(model, std::size_t{0}, [](Rng& rng) { return 1 + uniform_index(rng, 2); },
                                          2000, m, 50'000 + 1000 * m + r)
                               .value);
        double mean = 0, var = 0;
        for (double v : reps) mean += v / static_cast<double>(reps.size());
        for (double v : reps) var += (v - mean) * (v - mean) / static_cast<double>(reps.size() - 1);
        log_m.push_back(std::log(static_cast<double>(m)));
        log_var.push_back(std::log(var));
    }
    const double mx = std::accumulate(log_m.begin(), log_m.end(), 0.0) / 5;
    const double my = std::accumulate(log_var.begin(), log_var.end(), 0.0) / 5;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        sxy += (log_m[i] - mx) * (log_var[i] - my);
        sxx += (log_m[i] - mx) * (log_m[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -1.0, 0.2);
}

TEST(TargetWeights, Properties) {
    std::mt19937_64 gen(44);
    const auto cube = random_cube(gen, 40, 6, 3, 0.6);
    Vector marginal = Vector::Zero(3);
    for (std::size_t i = 0; i < 40; ++i) marginal += cube.mean(i) / 40.0;
    const auto calibrated = target_resample_weights(cube, Categorical(marginal));
    EXPECT_LT((calibrated.scores.array() - 1.0).abs().maxCoeff(), 1e-9);

    const auto focused = target_resample_weights(cube, {0.0, 1.0, 0.0});
    EXPECT_NEAR(focused.scores.sum(), 40.0, 1e-6);
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_GE(focused[i], 0.0);
        EXPECT_NEAR(focused[i], 40.0 * cube.mean(i)(1) / (40.0 * marginal(1)), 1e-9);
    }
    const PredictionCube never(2, 1, 2, {1, 0, 1, 0});
    EXPECT_THROW(target_resample_weights(never, {0.5, 0.5}), domain_error);
}

TEST(Jepig, ConjugateProperties) {
    std::mt19937_64 gen(45);
    std::normal_distribution<double> n(0, 1);
    Matrix phi(8, 3);
    for (auto& v : phi.reshaped()) v = n(gen);
    Vector y(8);
    for (auto& v : y) v = n(gen);
    const auto post = fit_bayes_linear(phi, y, 1.0, 0.2);
    Matrix pool(25, 3);
    for (Eigen::Index i = 0; i < 25; ++i) pool.row(i) << 1.0, -3.0 + 0.25 * static_cast<double>(i), std::pow(-3.0 + 0.25 * static_cast<double>(i), 2) / 3;
    const Vector x = pool.row(3).transpose();
    const double bald = gaussian_bald_variance(x.dot(post.covariance * x), 0.2);

    EXPECT_EQ(jepig_conjugate(post, x, Matrix(0, 3), 64, 1).value, 0.0);
    const Matrix replicated = x.transpose().replicate(2000, 1);
    EXPECT_NEAR(jepig_conjugate(post, x, replicated, 64, 1).value, bald, 1e-3);

    const Matrix eval = pool.topRows(10);
    for (Eigen::Index i = 0; i < 25; ++i) {
        const Vector c = pool.row(i).transpose();
        const auto j = jepig_conjugate(post, c, eval, 64, 2);
        EXPECT_GE(j.value, -3 * j.std_error - 1e-12);
        EXPECT_LE(j.value, gaussian_bald_variance(c.dot(post.covariance * c), 0.2) + 1e-12);
    }
    WeightPosterior laplace = post;
    laplace.conjugate = false;
    EXPECT_THROW(jepig_conjugate(laplace, x, eval, 64, 1), unsupported_error);
}

TEST(Jepig, AveragedGapIsConditionalTotalCorrelation) {
    std::mt19937_64 gen(46);
    const auto sampler = exact_sampler();
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 2 + rep % 3;
        const auto cube = random_cube(gen, m + 1, 2 + rep % 4, 2, 0.5);
        std::vector<std::size_t> eval(m);
        std::iota(eval.begin(), eval.end(), 1);
        auto joint = [&](std::vector<std::size_t> b) { return batchbald_joint_entropy(cube, b, sampler); };
        std::vector<std::size_t> all{0};
        all.insert(all.end(), eval.begin(), eval.end());
        const double ha = joint({0});
        const double he = joint(eval);
        const double jepig = ha + he - joint(all);
        const double epig = epig_scores(cube.rows({0}), cube.rows(eval))[0];
        double sum_hi = 0, tc_given = 0;
        for (auto i : eval) {
            sum_hi += joint({i});
            tc_given += joint({0, i}) - ha;
        }
        tc_given -= joint(all) - ha;
        const double md = static_cast<double>(m);
        const double c_eval = (sum_hi - he) / md;
        EXPECT_NEAR(jepig / md + c_eval - epig, tc_given / md, 1e-10);
        EXPECT_GE(tc_given, -1e-12);
    }
}

TEST(RhoLoss, Examples) {
    EXPECT_EQ(rho_loss_scores(Vector{{1.0, 2.0}}, Vector{{1.0, 2.0}}).scores.cwiseAbs().maxCoeff(), 0.0);
    const auto s = rho_loss_scores(Vector{{2.0, 1.5}}, Vector{{1.9, 0.1}});
    EXPECT_NEAR(s[0], 0.1, 1e-12);
    EXPECT_NEAR(s[1], 1.4, 1e-12);
    EXPECT_EQ(top_k(s, 1).indices.front(), 1u);
    EXPECT_THROW(rho_loss_scores(Vector{{1.0}}, Vector{{1.0, 2.0}}), contract_error);
}
