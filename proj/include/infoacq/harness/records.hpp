#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "experiment.hpp"

namespace infoacq {

inline constexpr const char* results_header = "trial,round,labeled,metric,scorer,seed,wall_ms";

struct ResultRow {
    std::size_t trial = 0;
    std::size_t round = 0;
    std::size_t labeled = 0;
    double metric = 0.0;
    std::string scorer;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Rows ordered by (trial, round) so the text does not depend on scheduling.
inline std::string results_csv(std::vector<RunRecord> runs) {
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.trial < b.trial; });
    std::string out = std::string(results_header) + "\n";
    for (const auto& run : runs)
        for (const auto& r : run.rounds)
            out += std::to_string(run.trial) + "," + std::to_string(r.round) + "," + std::to_string(r.labeled) + "," +
                   format_double(r.metric) + "," + run.scorer + "," + std::to_string(run.seed) + "," +
                   format_double(r.wall_ms) + "\n";
    return out;
}

inline std::string index_log_jsonl(std::vector<RunRecord> runs) {
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.trial < b.trial; });
    std::string out;
    for (const auto& run : runs)
        for (const auto& r : run.rounds) {
            nlohmann::ordered_json line;
            line["trial"] = run.trial;
            line["round"] = r.round;
            line["indices"] = r.indices;
            out += line.dump() + "\n";
        }
    return out;
}

inline std::string rank_correlation_csv(const RankReport& report) {
    std::string out = "trial,scorer_a,scorer_b,spearman\n";
    for (const auto& e : report.entries)
        out += std::to_string(e.trial) + "," + e.first + "," + e.second + "," + format_double(e.spearman) + "\n";
    return out;
}

// Writes through a sibling temporary file and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw config_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw config_error("cannot move results into " + path.string());
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

template <class T>
T parse_cell(const std::string& cell, const std::string& where) {
    std::istringstream in(cell);
    T v{};
    in >> v;
    if (cell.empty() || in.fail() || !in.eof()) throw config_error(where + ": cannot parse '" + cell + "'");
    return v;
}

} // namespace detail

// Strict reader for the results schema; any mismatch is a config error.
inline std::vector<ResultRow> parse_results_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw config_error(source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != results_header) throw config_error(source + ":1: header must be '" + std::string(results_header) + "'");
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno);
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 7) throw config_error(where + ": expected 7 columns, found " + std::to_string(cells.size()));
        ResultRow r;
        r.trial = detail::parse_cell<std::size_t>(cells[0], where);
        r.round = detail::parse_cell<std::size_t>(cells[1], where);
        r.labeled = detail::parse_cell<std::size_t>(cells[2], where);
        r.metric = detail::parse_cell<double>(cells[3], where);
        r.scorer = cells[4];
        if (r.scorer.empty()) throw config_error(where + ": empty scorer");
        r.seed = detail::parse_cell<std::uint64_t>(cells[5], where);
        r.wall_ms = detail::parse_cell<double>(cells[6], where);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw config_error(source + ": no data rows");
    return rows;
}

inline std::vector<ResultRow> load_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path.string());
    return parse_results_csv(in, path.string());
}

} // namespace infoacq
