#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <toml.hpp>
#include <vector>

#include "../errors.hpp"
#include "../models/dataset.hpp"
#include "../models/synthetic.hpp"

namespace infoacq {

enum class TaskFamily { classification, regression, causal };

inline std::string to_string(TaskFamily f) {
    switch (f) {
    case TaskFamily::classification: return "classification";
    case TaskFamily::regression: return "regression";
    case TaskFamily::causal: return "causal";
    }
    return "?";
}

enum class LoopMode { active_learning, active_sampling, rank_correlation };

inline std::string to_string(LoopMode m) {
    switch (m) {
    case LoopMode::active_learning: return "active-learning";
    case LoopMode::active_sampling: return "active-sampling";
    case LoopMode::rank_correlation: return "rank-correlation";
    }
    return "?";
}

struct DatasetSpec {
    std::string kind;  // synthetic generator id, or "file"
    SyntheticParams params;
    std::string path;
    std::string test_path;
};

struct ModelSpec {
    std::string kind = "auto";  // glm-laplace | blr | blr-arms
    std::string features = "identity";
    std::size_t rff_features = 64;
    double lengthscale = 1.0;
    double amplitude = 1.0;
    double prior_precision = 1.0;
    double noise_variance = 0.1;
    std::size_t members = 8;
};

struct ScorerSpec {
    std::string id;
    double beta = 1.0;
    std::string target_source = "auto";  // auto | dataset | pool
    std::size_t targets = 100;
    std::size_t configurations = 10'000;
    std::size_t exact_cap = 4096;
    std::size_t pseudo_draws = 1;
    std::vector<std::string> compare;
};

struct LoopSpec {
    LoopMode mode = LoopMode::active_learning;
    std::size_t acquisition_size = 10;
    std::size_t initial = 20;
    std::size_t budget = 100;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string retrain = "scratch";  // scratch | warm
    std::size_t holdout = 200;
    std::size_t candidates = 100;
    double select_fraction = 0.1;
};

inline const std::set<std::string>& classification_scorers() {
    static const std::set<std::string> s{"random",   "bald",       "batchbald",         "entropy",          "varratio",
                                         "meanstd",  "powerbald",  "softmaxbald",       "softrankbald",     "epig",
                                         "egl",      "sim-logdet", "fisher-eig-logdet", "fisher-eig-trace", "fisher-epig-trace"};
    return s;
}
inline const std::set<std::string>& regression_scorers() {
    static const std::set<std::string> s{"random", "gbald", "gjoint-logdet", "gepig", "jepig"};
    return s;
}
inline const std::set<std::string>& causal_scorers() {
    static const std::set<std::string> s{"random", "mu-bald", "rho-bald", "murho-bald"};
    return s;
}
inline const std::set<std::string>& sampling_scorers() {
    static const std::set<std::string> s{"rholoss", "loss", "grand", "egl", "random"};
    return s;
}
// Per-point scorers usable in a rank-correlation report.
inline const std::set<std::string>& ranking_scorers() {
    static const std::set<std::string> s{"bald", "entropy", "varratio", "meanstd", "powerbald", "softmaxbald",
                                         "softrankbald", "epig", "egl", "sim-logdet", "fisher-eig-logdet",
                                         "fisher-eig-trace", "fisher-epig-trace"};
    return s;
}

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelSpec model;
    ScorerSpec scorer;
    LoopSpec loop;

    [[nodiscard]] TaskFamily task() const {
        if (dataset.kind == "file") {
            const auto meta = load_dataset(dataset.path);
            return meta.kind == TaskKind::classification ? TaskFamily::classification : TaskFamily::regression;
        }
        if (dataset.kind == "two-arm-causal") return TaskFamily::causal;
        return synthetic_task(dataset.kind) == TaskKind::classification ? TaskFamily::classification
                                                                        : TaskFamily::regression;
    }

    [[nodiscard]] std::string model_kind() const {
        if (model.kind != "auto") return model.kind;
        switch (task()) {
        case TaskFamily::classification: return "glm-laplace";
        case TaskFamily::regression: return "blr";
        case TaskFamily::causal: return "blr-arms";
        }
        return "?";
    }

    // Batch size per active-sampling step.
    [[nodiscard]] std::size_t sampling_batch() const {
        const auto b = static_cast<std::size_t>(std::llround(static_cast<double>(loop.candidates) * loop.select_fraction));
        return std::max<std::size_t>(1, std::min(b, loop.candidates));
    }

    void validate() const {
        const auto fail = [](const std::string& field, const std::string& why) {
            throw config_error("field '" + field + "': " + why);
        };
        if (dataset.kind.empty()) fail("dataset.kind", "missing required field");
        if (dataset.kind == "file") {
            if (dataset.path.empty()) fail("dataset.path", "required when dataset.kind = \"file\"");
            if (dataset.test_path.empty()) fail("dataset.test_path", "required when dataset.kind = \"file\"");
        } else {
            check_synthetic_params(dataset.kind, dataset.params);
        }
        if (scorer.id.empty() && loop.mode != LoopMode::rank_correlation) fail("scorer.id", "missing required field");
        if (loop.trials < 1) fail("loop.trials", "must be at least 1");
        if (model.members < 1) fail("model.members", "must be at least 1");
        if (!(model.prior_precision > 0)) fail("model.prior_precision", "must be positive");
        if (!(model.noise_variance > 0)) fail("model.noise_variance", "must be positive");
        if (model.features != "identity" && model.features != "rff") fail("model.features", "must be \"identity\" or \"rff\"");
        if (model.features == "rff" && (model.rff_features < 1 || !(model.lengthscale > 0) || !(model.amplitude > 0)))
            fail("model.rff_features", "random Fourier features need a positive count, lengthscale and amplitude");
        if (!(scorer.beta >= 0)) fail("scorer.beta", "must be non-negative");
        if (scorer.target_source != "auto" && scorer.target_source != "dataset" && scorer.target_source != "pool")
            fail("scorer.target_source", "must be \"auto\", \"dataset\" or \"pool\"");
        if (loop.retrain != "scratch" && loop.retrain != "warm") fail("loop.retrain", "must be \"scratch\" or \"warm\"");
        const TaskFamily family = task();
        const std::string kind = model_kind();
        const std::map<TaskFamily, std::string> expected{{TaskFamily::classification, "glm-laplace"},
                                                         {TaskFamily::regression, "blr"},
                                                         {TaskFamily::causal, "blr-arms"}};
        if (kind != expected.at(family))
            fail("model.kind", "'" + kind + "' does not fit a " + to_string(family) + " dataset (expected '" +
                                   expected.at(family) + "')");
        switch (loop.mode) {
        case LoopMode::active_learning: {
            if (loop.acquisition_size < 1) fail("loop.acquisition_size", "must be at least 1");
            if (loop.budget < loop.initial) fail("loop.budget", "must be at least loop.initial");
            const auto& allowed = family == TaskFamily::classification ? classification_scorers()
                                  : family == TaskFamily::regression   ? regression_scorers()
                                                                       : causal_scorers();
            if (!allowed.contains(scorer.id))
                fail("scorer.id", "'" + scorer.id + "' is not available for " + to_string(family) + " active learning");
            if (family == TaskFamily::classification && model.members < 1) fail("model.members", "must be at least 1");
            if ((family == TaskFamily::causal) && model.members < 2) fail("model.members", "causal scores need at least 2");
            break;
        }
        case LoopMode::active_sampling:
            if (family != TaskFamily::classification) fail("loop.mode", "active sampling needs a classification dataset");
            if (!sampling_scorers().contains(scorer.id))
                fail("scorer.id", "'" + scorer.id + "' is not an active-sampling scorer");
            if (loop.holdout < 1) fail("loop.holdout", "holdout split is empty");
            if (loop.candidates < 1) fail("loop.candidates", "must be at least 1");
            if (!(loop.select_fraction > 0 && loop.select_fraction <= 1)) fail("loop.select_fraction", "must lie in (0, 1]");
            if (loop.budget < loop.initial) fail("loop.budget", "must be at least loop.initial");
            break;
        case LoopMode::rank_correlation:
            if (family != TaskFamily::classification) fail("loop.mode", "rank correlation needs a classification dataset");
            if (scorer.compare.size() < 1) fail("scorer.compare", "needs at least one scorer id");
            for (const auto& id : scorer.compare)
                if (!ranking_scorers().contains(id)) fail("scorer.compare", "'" + id + "' has no per-point score");
            break;
        }
    }

    // Stable text form: one `section.key=value` line per field, sorted.
    [[nodiscard]] std::string canonical() const {
        std::map<std::string, std::string> kv;
        const auto num = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        kv["dataset.kind"] = dataset.kind;
        kv["dataset.path"] = dataset.path;
        kv["dataset.test_path"] = dataset.test_path;
        for (const auto& [k, v] : dataset.params.values()) kv["dataset." + k] = num(v);
        kv["model.kind"] = model.kind;
        kv["model.features"] = model.features;
        kv["model.rff_features"] = std::to_string(model.rff_features);
        kv["model.lengthscale"] = num(model.lengthscale);
        kv["model.amplitude"] = num(model.amplitude);
        kv["model.prior_precision"] = num(model.prior_precision);
        kv["model.noise_variance"] = num(model.noise_variance);
        kv["model.members"] = std::to_string(model.members);
        kv["scorer.id"] = scorer.id;
        kv["scorer.beta"] = num(scorer.beta);
        kv["scorer.target_source"] = scorer.target_source;
        kv["scorer.targets"] = std::to_string(scorer.targets);
        kv["scorer.configurations"] = std::to_string(scorer.configurations);
        kv["scorer.exact_cap"] = std::to_string(scorer.exact_cap);
        kv["scorer.pseudo_draws"] = std::to_string(scorer.pseudo_draws);
        std::string compare;
        for (const auto& c : scorer.compare) compare += c + ";";
        kv["scorer.compare"] = compare;
        kv["loop.mode"] = to_string(loop.mode);
        kv["loop.acquisition_size"] = std::to_string(loop.acquisition_size);
        kv["loop.initial"] = std::to_string(loop.initial);
        kv["loop.budget"] = std::to_string(loop.budget);
        kv["loop.trials"] = std::to_string(loop.trials);
        kv["loop.seed"] = std::to_string(loop.seed);
        kv["loop.retrain"] = loop.retrain;
        kv["loop.holdout"] = std::to_string(loop.holdout);
        kv["loop.candidates"] = std::to_string(loop.candidates);
        kv["loop.select_fraction"] = num(loop.select_fraction);
        std::string out;
        for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
        return out;
    }

    // FNV-1a over the canonical form.
    [[nodiscard]] std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    [[nodiscard]] std::string hash_hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
        return buf;
    }
};

namespace detail {

inline std::string where(std::string_view source, const toml::node& node) {
    const auto& region = node.source();
    return std::string(source) + ":" + std::to_string(region.begin.line);
}

class TableReader {
public:
    TableReader(const toml::table& table, std::string section, std::string_view source)
        : table_(table), section_(std::move(section)), source_(source) {}

    [[nodiscard]] std::string field(std::string_view key) const { return section_ + "." + std::string(key); }

    [[noreturn]] void fail(const toml::node& node, std::string_view key, const std::string& why) const {
        throw config_error(where(source_, node) + ": field '" + field(key) + "': " + why);
    }

    void string(std::string_view key, std::string& out) {
        seen_.insert(std::string(key));
        if (const auto* node = table_.get(key)) {
            const auto v = node->value<std::string>();
            if (!v) fail(*node, key, "expected a string");
            out = *v;
        }
    }
    void number(std::string_view key, double& out) {
        seen_.insert(std::string(key));
        if (const auto* node = table_.get(key)) {
            const auto v = node->value<double>();
            if (!v) fail(*node, key, "expected a number");
            out = *v;
        }
    }
    template <class Int>
    void count(std::string_view key, Int& out) {
        seen_.insert(std::string(key));
        if (const auto* node = table_.get(key)) {
            const auto v = node->value<std::int64_t>();
            if (!v || !node->is_integer() || *v < 0) fail(*node, key, "expected a non-negative integer");
            out = static_cast<Int>(*v);
        }
    }
    bool present(std::string_view key) const { return table_.contains(key); }
    void strings(std::string_view key, std::vector<std::string>& out) {
        seen_.insert(std::string(key));
        if (const auto* node = table_.get(key)) {
            const auto* arr = node->as_array();
            if (!arr) fail(*node, key, "expected an array of strings");
            out.clear();
            for (const auto& item : *arr) {
                const auto v = item.value<std::string>();
                if (!v) fail(item, key, "expected an array of strings");
                out.push_back(*v);
            }
        }
    }
    void reject_unknown() const {
        for (const auto& [k, node] : table_)
            if (!seen_.contains(std::string(k.str()))) fail(node, k.str(), "unknown key");
    }

    [[nodiscard]] const toml::table& table() const noexcept { return table_; }
    void mark(std::string_view key) { seen_.insert(std::string(key)); }

private:
    const toml::table& table_;
    std::string section_;
    std::string_view source_;
    std::set<std::string> seen_;
};

} // namespace detail

// Parses `[dataset] [model] [scorer] [loop]`; unknown tables or keys are errors.
inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ":" << e.source().begin.line << ": " << e.description();
        throw config_error(msg.str());
    }
    for (const auto& [k, node] : root) {
        const std::string key(k.str());
        if (key != "dataset" && key != "model" && key != "scorer" && key != "loop")
            throw config_error(detail::where(source, node) + ": unknown table '" + key + "'");
        if (!node.is_table()) throw config_error(detail::where(source, node) + ": '" + key + "' must be a table");
    }
    ExperimentConfig cfg;
    static const toml::table empty;
    const auto section = [&](const char* name) -> const toml::table& {
        const auto* t = root.get_as<toml::table>(name);
        return t ? *t : empty;
    };

    {
        detail::TableReader r(section("dataset"), "dataset", source);
        r.string("kind", cfg.dataset.kind);
        r.string("path", cfg.dataset.path);
        r.string("test_path", cfg.dataset.test_path);
        for (const auto& [k, node] : r.table()) {
            const std::string key(k.str());
            if (key == "kind" || key == "path" || key == "test_path") continue;
            const auto known = synthetic_kinds().find(cfg.dataset.kind);
            if (known == synthetic_kinds().end() || !known->second.contains(key))
                r.fail(node, key, "unknown key for dataset kind '" + cfg.dataset.kind + "'");
            double v = 0;
            r.number(key, v);
            cfg.dataset.params.set(key, v);
        }
    }
    {
        detail::TableReader r(section("model"), "model", source);
        r.string("kind", cfg.model.kind);
        r.string("features", cfg.model.features);
        r.count("rff_features", cfg.model.rff_features);
        r.number("lengthscale", cfg.model.lengthscale);
        r.number("amplitude", cfg.model.amplitude);
        r.number("prior_precision", cfg.model.prior_precision);
        r.number("noise_variance", cfg.model.noise_variance);
        r.count("members", cfg.model.members);
        r.reject_unknown();
    }
    {
        detail::TableReader r(section("scorer"), "scorer", source);
        r.string("id", cfg.scorer.id);
        r.number("beta", cfg.scorer.beta);
        r.string("target_source", cfg.scorer.target_source);
        r.count("targets", cfg.scorer.targets);
        r.count("configurations", cfg.scorer.configurations);
        r.count("exact_cap", cfg.scorer.exact_cap);
        r.count("pseudo_draws", cfg.scorer.pseudo_draws);
        r.strings("compare", cfg.scorer.compare);
        r.reject_unknown();
    }
    {
        detail::TableReader r(section("loop"), "loop", source);
        std::string mode = to_string(cfg.loop.mode);
        r.string("mode", mode);
        if (mode == "active-learning") cfg.loop.mode = LoopMode::active_learning;
        else if (mode == "active-sampling") cfg.loop.mode = LoopMode::active_sampling;
        else if (mode == "rank-correlation") cfg.loop.mode = LoopMode::rank_correlation;
        else r.fail(*r.table().get("mode"), "mode", "must be active-learning, active-sampling or rank-correlation");
        r.count("acquisition_size", cfg.loop.acquisition_size);
        r.count("initial", cfg.loop.initial);
        r.count("budget", cfg.loop.budget);
        r.count("trials", cfg.loop.trials);
        cfg.loop.seed_given = r.present("seed");
        r.count("seed", cfg.loop.seed);
        r.string("retrain", cfg.loop.retrain);
        r.count("holdout", cfg.loop.holdout);
        r.count("candidates", cfg.loop.candidates);
        r.number("select_fraction", cfg.loop.select_fraction);
        r.reject_unknown();
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

} // namespace infoacq
