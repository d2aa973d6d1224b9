#pragma once

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../harness/config.hpp"
#include "../harness/experiment.hpp"
#include "../harness/plot_svg.hpp"
#include "../harness/records.hpp"
#include "selfcheck.hpp"

namespace infoacq::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2 };

struct RunArgs {
    std::string config;
    std::string out = "results.csv";
    std::string index_log;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    bool timing = false;
};

struct PlotArgs {
    std::string results;
    std::string out = "curves.svg";
    std::string metric = "metric";
    std::string group_by = "scorer";
    std::string kind = "curves";
    std::size_t bins = 20;
};

inline std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("INFOACQ_SEED");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (errno || *end || raw[0] == '-') throw config_error("INFOACQ_SEED: expected a non-negative integer, got '" + std::string(raw) + "'");
    return v;
}

// Seed precedence: --seed, then [loop] seed, then INFOACQ_SEED, then 0.
inline std::uint64_t resolve_seed(const ExperimentConfig& cfg, const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (cfg.loop.seed_given) return cfg.loop.seed;
    if (const auto env = seed_from_env()) return *env;
    return 0;
}

inline int cmd_run(const RunArgs& args, std::ostream& out) {
    auto cfg = load_config(args.config);
    cfg.loop.seed = resolve_seed(cfg, args.seed);
    cfg.loop.seed_given = true;
    const RunOptions options{std::max<std::size_t>(1, args.jobs), args.timing};
    if (cfg.loop.mode == LoopMode::rank_correlation) {
        const auto report = rank_correlation_report(cfg, options);
        atomic_write(args.out, rank_correlation_csv(report));
        out << "wrote " << report.entries.size() << " correlations to " << args.out << "\n";
        return ok;
    }
    const auto runs = run_experiment(cfg, options);
    std::filesystem::path log = args.index_log;
    if (log.empty()) log = std::filesystem::path(args.out).replace_extension(".jsonl");
    atomic_write(args.out, results_csv(runs));
    atomic_write(log, index_log_jsonl(runs));
    std::size_t rows = 0;
    for (const auto& r : runs) rows += r.rounds.size();
    out << "config " << cfg.hash_hex() << ": " << runs.size() << " trials, " << rows << " rows -> " << args.out << ", "
        << log.string() << "\n";
    return ok;
}

inline int cmd_plot(const PlotArgs& args, std::ostream& out) {
    const auto rows = load_results_csv(args.results);
    PlotOptions opts;
    opts.metric = args.metric;
    opts.group_by = args.group_by;
    opts.bins = args.bins;
    std::string svg;
    if (args.kind == "curves") svg = learning_curve_svg(rows, opts);
    else if (args.kind == "histogram") svg = final_metric_histogram_svg(rows, opts);
    else throw config_error("plot: --kind must be 'curves' or 'histogram'");
    atomic_write(args.out, svg);
    out << "wrote " << args.out << "\n";
    return ok;
}

inline int cmd_selfcheck(bool inject_fault, std::ostream& out) {
    const auto results = run_selfcheck(inject_fault ? CheckTolerances::faulty() : CheckTolerances{});
    std::size_t failed = 0;
    for (const auto& r : results) {
        char line[200];
        std::snprintf(line, sizeof line, "%-4s  %-38s  %11.3e  %9.1e  %8.1f ms\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                      r.discrepancy, r.tolerance, r.millis);
        out << line;
        failed += !r.passed;
    }
    out << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed ? failure : ok;
}

// Parses and dispatches one invocation; never throws.
inline int run_cli(std::vector<std::string> argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information-theoretic acquisition experiments"};
    app.name(argv.empty() ? "infoacq" : argv.front());
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a TOML config");
    run_cmd->add_option("config", run.config, "Config file")->required();
    run_cmd->add_option("--out", run.out, "Results CSV path");
    run_cmd->add_option("--index-log", run.index_log, "Selected-index JSON-lines path (default: --out with .jsonl)");
    run_cmd->add_option("--seed", run.seed, "Base seed (overrides the config and INFOACQ_SEED)");
    run_cmd->add_option("--jobs", run.jobs, "Trials run in parallel")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--timing", run.timing, "Record wall_ms per round (otherwise 0)");

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "Render an SVG from a results CSV");
    plot_cmd->add_option("results", plot.results, "Results CSV")->required();
    plot_cmd->add_option("--out", plot.out, "SVG path");
    plot_cmd->add_option("--metric", plot.metric, "metric | wall_ms");
    plot_cmd->add_option("--group-by", plot.group_by, "scorer | trial");
    plot_cmd->add_option("--kind", plot.kind, "curves | histogram");
    plot_cmd->add_option("--bins", plot.bins, "Histogram bins")->check(CLI::PositiveNumber);

    bool inject_fault = false;
    auto* check_cmd = app.add_subcommand("selfcheck", "Run the fast invariant suite");
    check_cmd->add_flag("--inject-fault", inject_fault)->group("");

    std::vector<std::string> rest(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    }
    try {
        if (*run_cmd) return cmd_run(run, out);
        if (*plot_cmd) return cmd_plot(plot, out);
        return cmd_selfcheck(inject_fault, out);
    } catch (const config_error& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

} // namespace infoacq::cli
