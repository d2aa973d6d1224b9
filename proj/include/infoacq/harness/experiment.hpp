#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "../acq/batchbald.hpp"
#include "../acq/epig.hpp"
#include "../acq/scores.hpp"
#include "../acq/stochastic.hpp"
#include "../kernel/causal.hpp"
#include "../kernel/fisher.hpp"
#include "../kernel/gaussian.hpp"
#include "../kernel/kernels.hpp"
#include "../models/features.hpp"
#include "../models/posterior.hpp"
#include "../models/predictive.hpp"
#include "../models/synthetic.hpp"
#include "config.hpp"
#include "stats.hpp"

namespace infoacq {

struct RoundRecord {
    std::size_t round = 0;
    std::size_t labeled = 0;
    double metric = 0.0;
    double wall_ms = 0.0;
    std::vector<std::size_t> indices;  // labeled this round (the initial set for round 0)
    std::size_t corrupted_selected = 0;
};

struct RunRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string scorer;
    std::string config_hash;
    std::vector<RoundRecord> rounds;

    [[nodiscard]] double final_metric() const { return rounds.empty() ? 0.0 : rounds.back().metric; }
    [[nodiscard]] std::size_t corrupted_total(bool include_initial = false) const {
        std::size_t total = 0;
        for (const auto& r : rounds)
            if (include_initial || r.round > 0) total += r.corrupted_selected;
        return total;
    }
};

struct RunOptions {
    std::size_t jobs = 1;
    bool timing = false;
};

inline std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t trial) { return derive_seed(cfg.loop.seed, trial); }

namespace detail {

struct TrialData {
    TaskFamily family = TaskFamily::classification;
    Dataset pool;
    Dataset test;
    Matrix target_inputs;
    FeatureMap features;
    Matrix pool_phi;
    Matrix test_phi;
    Matrix target_phi;

    [[nodiscard]] Matrix featurize(const Matrix& inputs) const {
        if (family != TaskFamily::causal) return features(inputs);
        const Matrix psi = features(inputs.leftCols(1));
        Matrix out(inputs.rows(), 2 * psi.cols());
        for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
            const double t = inputs(i, 1);
            out.row(i) << (1.0 - t) * psi.row(i), t * psi.row(i);
        }
        return out;
    }
};

inline TrialData prepare_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrialData td;
    td.family = cfg.task();
    if (cfg.dataset.kind == "file") {
        td.pool = load_dataset(cfg.dataset.path);
        td.test = load_dataset(cfg.dataset.test_path);
        if (td.pool.kind != td.test.kind || td.pool.dim() != td.test.dim())
            throw config_error("field 'dataset.test_path': test set does not match the training set schema");
    } else {
        auto data = make_synthetic(cfg.dataset.kind, cfg.dataset.params, derive_seed(seed, 11));
        td.pool = std::move(data.train);
        td.test = std::move(data.test);
        td.target_inputs = std::move(data.target_inputs);
    }
    const std::size_t input_dim = td.family == TaskFamily::causal ? 1 : td.pool.dim();
    td.features = cfg.model.features == "rff"
                      ? FeatureMap::random_fourier(input_dim, cfg.model.rff_features, cfg.model.lengthscale,
                                                   cfg.model.amplitude, derive_seed(seed, 12))
                      : FeatureMap::identity(input_dim, true);
    td.pool_phi = td.featurize(td.pool.inputs);
    td.test_phi = td.featurize(td.test.inputs);
    if (td.target_inputs.rows() > 0) td.target_phi = td.featurize(td.target_inputs);
    return td;
}

inline std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed);
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    idx.resize(k);
    return idx;
}

inline Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(idx[r]));
    return out;
}

inline std::vector<std::size_t> labels_of(const Dataset& d, const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(d.label(i));
    return out;
}

inline Vector targets_of(const Dataset& d, const std::vector<std::size_t>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = d.targets(static_cast<Eigen::Index>(idx[r]));
    return out;
}

inline WeightPosterior fit_model(const ExperimentConfig& cfg, const TrialData& td, const std::vector<std::size_t>& labeled,
                                 const WeightPosterior* warm) {
    const Matrix phi = rows_of(td.pool_phi, labeled);
    if (td.family == TaskFamily::classification) {
        NewtonOptions opts;
        if (warm && cfg.loop.retrain == "warm") opts.initial_weights = warm->mean;
        return fit_logistic_glm_laplace(phi, labels_of(td.pool, labeled), td.pool.num_classes, cfg.model.prior_precision, opts);
    }
    return fit_bayes_linear(phi, targets_of(td.pool, labeled), cfg.model.prior_precision, cfg.model.noise_variance);
}

inline double accuracy(const WeightPosterior& post, const Matrix& phi, const Dataset& data,
                       const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    const Matrix logits = rows_of(phi, rows) * glm_weight_matrix(post.mean, post.num_outputs).transpose();
    std::size_t correct = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index best;
        logits.row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
        correct += static_cast<std::size_t>(best) == data.label(rows[r]);
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

// Accuracy, RMSE, or PEHE of the treatment effect, depending on the task.
inline double evaluate(const TrialData& td, const WeightPosterior& post) {
    switch (td.family) {
    case TaskFamily::classification: return accuracy(post, td.test_phi, td.test, all_rows(td.test.size()));
    case TaskFamily::regression: {
        const Vector pred = td.test_phi * post.mean;
        return std::sqrt((pred - td.test.targets).squaredNorm() / static_cast<double>(td.test.size()));
    }
    case TaskFamily::causal: {
        const Matrix x = td.test.inputs.leftCols(1);
        Matrix control(x.rows(), 2), treated(x.rows(), 2);
        control << x, Vector::Zero(x.rows());
        treated << x, Vector::Ones(x.rows());
        const Vector effect = (td.featurize(treated) - td.featurize(control)) * post.mean;
        double sq = 0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double truth = two_arm_mean(x(i, 0), 1.0) - two_arm_mean(x(i, 0), 0.0);
            sq += (effect(i) - truth) * (effect(i) - truth);
        }
        return std::sqrt(sq / static_cast<double>(x.rows()));
    }
    }
    return 0.0;
}

// Target inputs for EPIG-style scorers: the dataset's target sample, or a label-free pool subsample.
inline Matrix target_features(const ExperimentConfig& cfg, const TrialData& td, std::uint64_t seed) {
    const bool dataset = cfg.scorer.target_source == "dataset" ||
                         (cfg.scorer.target_source == "auto" && td.target_phi.rows() > 0);
    if (dataset) {
        if (td.target_phi.rows() == 0) throw config_error("field 'scorer.target_source': dataset has no target inputs");
        return td.target_phi;
    }
    return rows_of(td.pool_phi, uniform_subset(td.pool.size(), cfg.scorer.targets, seed));
}

struct RoundState {
    const ExperimentConfig& cfg;
    const TrialData& td;
    const WeightPosterior& post;
    const std::vector<std::size_t>& candidates;  // pool indices
    std::uint64_t seed;
    Matrix phi;  // features of the candidates

    RoundState(const ExperimentConfig& c, const TrialData& t, const WeightPosterior& p, const std::vector<std::size_t>& cand,
               std::uint64_t s)
        : cfg(c), td(t), post(p), candidates(cand), seed(s), phi(rows_of(t.pool_phi, cand)) {}

    [[nodiscard]] std::size_t classes() const { return post.num_outputs; }
    [[nodiscard]] ParameterSamples samples() const { return sample_parameters(post, cfg.model.members, derive_seed(seed, 1)); }
    [[nodiscard]] PredictionCube cube(const ParameterSamples& s) const { return predict_cube(s, phi, classes()); }
    [[nodiscard]] Matrix map_probs() const { return glm_probabilities(post.mean, phi, classes()); }
};

inline StochasticMode stochastic_mode_of(const std::string& id) {
    if (id == "powerbald") return StochasticMode::power;
    if (id == "softmaxbald") return StochasticMode::softmax;
    return StochasticMode::softrank;
}

inline bool is_stochastic(const std::string& id) { return id == "powerbald" || id == "softmaxbald" || id == "softrankbald"; }

// Per-candidate scores (higher is better) for any per-point classification scorer.
inline ScoreVector classification_point_scores(const std::string& id, const RoundState& st) {
    if (id == "bald" || id == "entropy" || id == "varratio" || id == "meanstd" || is_stochastic(id) || id == "epig") {
        const auto samples = st.samples();
        const auto cube = st.cube(samples);
        if (id == "entropy") return entropy_scores(cube);
        if (id == "varratio") return variation_ratio_scores(cube);
        if (id == "meanstd") return mean_std_scores(cube);
        if (id == "epig") {
            const Matrix targets = target_features(st.cfg, st.td, derive_seed(st.seed, 5));
            return epig_scores(cube, predict_cube(samples, targets, st.classes()));
        }
        auto bald = bald_scores(cube);
        if (!is_stochastic(id)) return bald;
        Vector base = st.cfg.scorer.beta * stochastic_base(bald, stochastic_mode_of(id)).array();
        return {std::move(base), id};
    }
    if (id == "egl") return egl_scores(st.map_probs(), st.phi);
    if (id == "sim-logdet") {
        const Matrix jac = glm_sampled_jacobians(st.map_probs(), st.phi, derive_seed(st.seed, 6));
        const auto chol = cholesky(st.post.precision, "GLM precision");
        const Matrix solved = chol.solve(jac.transpose());
        Vector out(jac.rows());
        for (Eigen::Index i = 0; i < jac.rows(); ++i) out(i) = 0.5 * std::log1p(std::max(0.0, jac.row(i).dot(solved.col(i))));
        return {std::move(out), id};
    }
    if (id == "fisher-eig-logdet" || id == "fisher-eig-trace") {
        const auto objective = id == "fisher-eig-logdet" ? GlmFisherObjective::eig_logdet : GlmFisherObjective::eig_trace;
        return {glm_fisher_point_scores(st.post.precision, st.map_probs(), st.phi, objective), id};
    }
    if (id == "fisher-epig-trace") {
        const Matrix targets = target_features(st.cfg, st.td, derive_seed(st.seed, 5));
        const Matrix fbar = glm_average_fisher(st.post, targets);
        const Vector v = glm_fisher_point_scores(st.post.precision, st.map_probs(), st.phi, GlmFisherObjective::epig_trace, fbar);
        return {-v, id};
    }
    throw config_error("field 'scorer.id': '" + id + "' has no per-point classification score");
}

inline std::vector<std::size_t> to_pool(const AcquisitionBatch& batch, const std::vector<std::size_t>& candidates) {
    std::vector<std::size_t> out;
    for (auto i : batch.indices) out.push_back(candidates[i]);
    return out;
}

inline std::vector<std::size_t> select_classification(const RoundState& st, std::size_t b) {
    const std::string& id = st.cfg.scorer.id;
    if (id == "batchbald") {
        const auto cube = st.cube(st.samples());
        ConfigSampler sampler;
        sampler.samples = st.cfg.scorer.configurations;
        sampler.cap = st.cfg.scorer.exact_cap;
        sampler.seed = derive_seed(st.seed, 2);
        return to_pool(batchbald_select(cube, b, sampler), st.candidates);
    }
    if (is_stochastic(id)) {
        const auto bald = bald_scores(st.cube(st.samples()));
        return to_pool(stochastic_select(bald, b, stochastic_mode_of(id), st.cfg.scorer.beta, derive_seed(st.seed, 3)),
                       st.candidates);
    }
    if (id == "fisher-eig-logdet" || id == "fisher-epig-trace") {
        Matrix fbar;
        if (id == "fisher-epig-trace") fbar = glm_average_fisher(st.post, target_features(st.cfg, st.td, derive_seed(st.seed, 5)));
        const auto objective = id == "fisher-eig-logdet" ? GlmFisherObjective::eig_logdet : GlmFisherObjective::epig_trace;
        return to_pool(glm_fisher_greedy(st.post.precision, st.map_probs(), st.phi, b, objective, fbar), st.candidates);
    }
    if (id == "sim-logdet") {
        const Matrix jac = glm_sampled_jacobians(st.map_probs(), st.phi, derive_seed(st.seed, 6));
        const auto bundle = FisherBundle::dense(st.post.precision, {});
        return to_pool(logdet_batch_select(similarity_kernel(bundle, jac), 1.0, b), st.candidates);
    }
    return to_pool(top_k(classification_point_scores(id, st), b), st.candidates);
}

inline std::vector<std::size_t> select_regression(const RoundState& st, std::size_t b) {
    const std::string& id = st.cfg.scorer.id;
    const double noise = st.post.noise_variance;
    if (id == "gjoint-logdet") {
        const auto pred = predict_bayes_linear(st.post, st.phi);
        return to_pool(logdet_batch_select(make_kernel_matrix(pred.cov), noise, b), st.candidates);
    }
    const Vector var = (st.phi * st.post.covariance).cwiseProduct(st.phi).rowwise().sum();
    Vector scores(st.phi.rows());
    if (id == "gbald") {
        for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = gaussian_bald(var(i), noise);
    } else if (id == "gepig") {
        const Matrix targets = target_features(st.cfg, st.td, derive_seed(st.seed, 5));
        const Matrix cross = st.phi * st.post.covariance * targets.transpose();
        const Vector tvar = (targets * st.post.covariance).cwiseProduct(targets).rowwise().sum();
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
            double total = 0;
            for (Eigen::Index j = 0; j < targets.rows(); ++j) {
                const double cxx = var(i) + noise, ctt = tvar(j) + noise, cxt = cross(i, j);
                total += 0.5 * std::log(cxx * ctt / std::max(cxx * ctt - cxt * cxt, 1e-300));
            }
            scores(i) = total / static_cast<double>(targets.rows());
        }
    } else if (id == "jepig") {
        const Matrix targets = target_features(st.cfg, st.td, derive_seed(st.seed, 5));
        for (Eigen::Index i = 0; i < scores.size(); ++i)
            scores(i) = jepig_conjugate(st.post, st.phi.row(i).transpose(), targets, st.cfg.scorer.pseudo_draws,
                                        derive_seed(st.seed, 7, static_cast<std::uint64_t>(i)))
                            .value;
    } else {
        throw config_error("field 'scorer.id': '" + id + "' is not a regression scorer");
    }
    return to_pool(top_k(ScoreVector(std::move(scores), id), b), st.candidates);
}

inline std::vector<std::size_t> select_causal(const RoundState& st, std::size_t b) {
    const auto samples = st.samples();
    const Matrix x = rows_of(st.td.pool.inputs, st.candidates).leftCols(1);
    Matrix control(x.rows(), 2), treated(x.rows(), 2);
    control << x, Vector::Zero(x.rows());
    treated << x, Vector::Ones(x.rows());
    const Matrix m0 = st.td.featurize(control) * samples.samples.transpose();
    const Matrix m1 = st.td.featurize(treated) * samples.samples.transpose();
    std::vector<int> arms;
    for (auto i : st.candidates) arms.push_back(st.td.pool.inputs(static_cast<Eigen::Index>(i), 1) > 0.5 ? 1 : 0);
    const auto scores = causal_score_vectors(m0, m1, arms);
    const std::string& id = st.cfg.scorer.id;
    const ScoreVector& chosen = id == "mu-bald" ? scores.mu : id == "rho-bald" ? scores.rho : scores.murho;
    return to_pool(top_k(chosen, b), st.candidates);
}

inline std::vector<std::size_t> select_batch(const ExperimentConfig& cfg, const TrialData& td, const WeightPosterior& post,
                                             const std::vector<std::size_t>& unlabeled, std::size_t b, std::uint64_t seed) {
    if (cfg.scorer.id == "random") {
        auto pick = uniform_subset(unlabeled.size(), b, seed);
        for (auto& i : pick) i = unlabeled[i];
        return pick;
    }
    const RoundState st(cfg, td, post, unlabeled, seed);
    switch (td.family) {
    case TaskFamily::classification: return select_classification(st, b);
    case TaskFamily::regression: return select_regression(st, b);
    case TaskFamily::causal: return select_causal(st, b);
    }
    return {};
}

inline std::size_t count_corrupted(const Dataset& d, const std::vector<std::size_t>& idx) {
    if (d.corrupted.empty()) return 0;
    std::size_t n = 0;
    for (auto i : idx) n += d.corrupted[i];
    return n;
}

class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double lap() {
        if (!enabled_) return 0.0;
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
        start_ = now;
        return ms;
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

template <class Result, class Fn>
std::vector<Result> run_parallel(std::size_t trials, std::size_t jobs, Fn&& fn) {
    std::vector<Result> out(trials);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            try {
                out[t] = fn(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, trials));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace detail

// One active-learning trial: fit, evaluate, acquire, repeat until the label budget is spent.
inline RunRecord run_active_learning_trial(const ExperimentConfig& cfg, std::size_t trial, const RunOptions& options = {}) {
    const std::uint64_t seed = trial_seed(cfg, trial);
    detail::Stopwatch clock(options.timing);
    const auto td = detail::prepare_trial(cfg, seed);
    const std::size_t n = td.pool.size();
    if (cfg.loop.initial > n) throw config_error("field 'loop.initial': larger than the pool");
    RunRecord rec{trial, seed, cfg.scorer.id, cfg.hash_hex(), {}};
    std::vector<std::size_t> labeled = detail::uniform_subset(n, cfg.loop.initial, derive_seed(seed, 21));
    std::vector<std::uint8_t> in_train(n, 0);
    for (auto i : labeled) in_train[i] = 1;
    std::vector<std::size_t> selected = labeled;
    WeightPosterior post;
    bool fitted = false;
    const std::size_t budget = std::min(cfg.loop.budget, n);
    for (std::size_t round = 0;; ++round) {
        post = detail::fit_model(cfg, td, labeled, fitted ? &post : nullptr);
        fitted = true;
        RoundRecord r;
        r.round = round;
        r.labeled = labeled.size();
        r.metric = detail::evaluate(td, post);
        r.indices = selected;
        r.corrupted_selected = detail::count_corrupted(td.pool, selected);
        r.wall_ms = clock.lap();
        rec.rounds.push_back(std::move(r));
        if (labeled.size() >= budget) break;
        std::vector<std::size_t> unlabeled;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_train[i]) unlabeled.push_back(i);
        const std::size_t b = std::min({cfg.loop.acquisition_size, budget - labeled.size(), unlabeled.size()});
        selected = detail::select_batch(cfg, td, post, unlabeled, b, derive_seed(seed, 31, round));
        if (selected.size() != b) throw numeric_error("acquisition returned " + std::to_string(selected.size()) + " of " + std::to_string(b) + " points");
        for (auto i : selected) {
            if (in_train[i]) throw contract_error("acquisition selected an already labeled index");
            in_train[i] = 1;
            labeled.push_back(i);
        }
    }
    return rec;
}

// Online batch selection: each step scores a uniform candidate batch and trains on the top fraction.
inline RunRecord run_active_sampling_trial(const ExperimentConfig& cfg, std::size_t trial, const RunOptions& options = {}) {
    const std::uint64_t seed = trial_seed(cfg, trial);
    detail::Stopwatch clock(options.timing);
    const auto td = detail::prepare_trial(cfg, seed);
    const std::size_t n = td.pool.size();
    if (cfg.loop.holdout < 1) throw config_error("field 'loop.holdout': holdout split is empty");
    if (cfg.loop.holdout >= td.test.size()) throw config_error("field 'loop.holdout': leaves no evaluation points");
    std::vector<std::size_t> holdout(cfg.loop.holdout), eval(td.test.size() - cfg.loop.holdout);
    std::iota(holdout.begin(), holdout.end(), 0);
    std::iota(eval.begin(), eval.end(), cfg.loop.holdout);
    const std::size_t classes = td.pool.num_classes;
    const auto irreducible = fit_logistic_glm_laplace(detail::rows_of(td.test_phi, holdout), detail::labels_of(td.test, holdout),
                                                      classes, cfg.model.prior_precision);
    const Matrix hold_probs = glm_probabilities(irreducible.mean, td.pool_phi, classes);
    Vector hold_loss(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) hold_loss(static_cast<Eigen::Index>(i)) = -safe_log(hold_probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(td.pool.label(i))));

    RunRecord rec{trial, seed, cfg.scorer.id, cfg.hash_hex(), {}};
    std::vector<std::size_t> trained = detail::uniform_subset(n, cfg.loop.initial, derive_seed(seed, 21));
    std::vector<std::uint8_t> used(n, 0);
    for (auto i : trained) used[i] = 1;
    std::vector<std::size_t> selected = trained;
    const std::size_t b = cfg.sampling_batch();
    const std::size_t budget = std::min(cfg.loop.budget, n);
    WeightPosterior post;
    bool fitted = false;
    for (std::size_t step = 0;; ++step) {
        NewtonOptions opts;
        if (fitted) opts.initial_weights = post.mean;
        post = fit_logistic_glm_laplace(detail::rows_of(td.pool_phi, trained), detail::labels_of(td.pool, trained), classes,
                                        cfg.model.prior_precision, opts);
        fitted = true;
        RoundRecord r;
        r.round = step;
        r.labeled = trained.size();
        r.metric = detail::accuracy(post, td.test_phi, td.test, eval);
        r.indices = selected;
        r.corrupted_selected = detail::count_corrupted(td.pool, selected);
        r.wall_ms = clock.lap();
        rec.rounds.push_back(std::move(r));
        std::vector<std::size_t> unused;
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i]) unused.push_back(i);
        if (trained.size() >= budget || unused.empty()) break;
        auto pick = detail::uniform_subset(unused.size(), cfg.loop.candidates, derive_seed(seed, 41, step));
        for (auto& i : pick) i = unused[i];
        const Matrix phi = detail::rows_of(td.pool_phi, pick);
        const Matrix probs = glm_probabilities(post.mean, phi, classes);
        const auto labels = detail::labels_of(td.pool, pick);
        Vector loss(static_cast<Eigen::Index>(pick.size())), hold(static_cast<Eigen::Index>(pick.size()));
        for (std::size_t j = 0; j < pick.size(); ++j) {
            loss(static_cast<Eigen::Index>(j)) = -safe_log(probs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(labels[j])));
            hold(static_cast<Eigen::Index>(j)) = hold_loss(static_cast<Eigen::Index>(pick[j]));
        }
        ScoreVector scores;
        const std::string& id = cfg.scorer.id;
        if (id == "rholoss") scores = rho_loss_scores(loss, hold);
        else if (id == "loss") scores = ScoreVector(loss, "loss");
        else if (id == "grand") scores = grand_scores(probs, phi, labels);
        else if (id == "egl") scores = egl_scores(probs, phi);
        else scores = ScoreVector(Vector::Zero(static_cast<Eigen::Index>(pick.size())), "random");
        const std::size_t take = std::min({b, pick.size(), budget - trained.size()});
        selected = detail::to_pool(top_k(scores, take), pick);
        for (auto i : selected) {
            used[i] = 1;
            trained.push_back(i);
        }
    }
    return rec;
}

inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {}) {
    if (cfg.loop.mode == LoopMode::rank_correlation)
        throw contract_error("run_experiment: use rank_correlation_report for rank-correlation configs");
    return detail::run_parallel<RunRecord>(cfg.loop.trials, options.jobs, [&](std::size_t t) {
        return cfg.loop.mode == LoopMode::active_sampling ? run_active_sampling_trial(cfg, t, options)
                                                          : run_active_learning_trial(cfg, t, options);
    });
}

struct CorrelationEntry {
    std::size_t trial = 0;
    std::string first;
    std::string second;
    double spearman = 0.0;
};

struct RankReport {
    std::vector<std::string> scorers;
    std::vector<Matrix> per_trial;  // Spearman matrix per trial
    std::vector<CorrelationEntry> entries;

    [[nodiscard]] double mean(const std::string& a, const std::string& b) const {
        const auto ia = std::find(scorers.begin(), scorers.end(), a) - scorers.begin();
        const auto ib = std::find(scorers.begin(), scorers.end(), b) - scorers.begin();
        if (ia == static_cast<long>(scorers.size()) || ib == static_cast<long>(scorers.size()))
            throw contract_error("RankReport: unknown scorer");
        double s = 0;
        for (const auto& m : per_trial) s += m(ia, ib);
        return s / static_cast<double>(per_trial.size());
    }
};

// Pool scores of every listed scorer on one fitted model per trial, compared by Spearman correlation.
// The EPIG trace proxy is negated so that larger always means more informative.
inline RankReport rank_correlation_report(const ExperimentConfig& cfg, const RunOptions& options = {}) {
    RankReport report;
    report.scorers = cfg.scorer.compare;
    const std::size_t s = report.scorers.size();
    report.per_trial = detail::run_parallel<Matrix>(cfg.loop.trials, options.jobs, [&](std::size_t t) {
        const std::uint64_t seed = trial_seed(cfg, t);
        const auto td = detail::prepare_trial(cfg, seed);
        const std::size_t n = td.pool.size();
        const auto labeled = detail::uniform_subset(n, cfg.loop.initial, derive_seed(seed, 21));
        std::vector<std::uint8_t> in_train(n, 0);
        for (auto i : labeled) in_train[i] = 1;
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_train[i]) pool.push_back(i);
        const auto post = detail::fit_model(cfg, td, labeled, nullptr);
        const detail::RoundState st(cfg, td, post, pool, derive_seed(seed, 31));
        std::vector<std::vector<double>> scores;
        for (const auto& id : report.scorers) {
            const auto v = detail::classification_point_scores(id, st);
            std::vector<double> col(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) col[i] = v.valid(i) ? v[i] : std::nan("");
            scores.push_back(std::move(col));
        }
        Matrix m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t b = 0; b < s; ++b)
                m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = a == b ? 1.0 : spearman(scores[a], scores[b]);
        return m;
    });
    for (std::size_t t = 0; t < report.per_trial.size(); ++t)
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t b = 0; b < s; ++b)
                report.entries.push_back({t, report.scorers[a], report.scorers[b],
                                          report.per_trial[t](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
    return report;
}

} // namespace infoacq
