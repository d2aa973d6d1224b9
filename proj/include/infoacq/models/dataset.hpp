#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../linalg.hpp"

namespace infoacq {

enum class TaskKind { classification, regression };

inline std::string to_string(TaskKind k) { return k == TaskKind::classification ? "classification" : "regression"; }

inline TaskKind parse_task_kind(const std::string& s) {
    if (s == "classification") return TaskKind::classification;
    if (s == "regression") return TaskKind::regression;
    throw config_error("unknown task kind '" + s + "'");
}

struct Dataset {
    Matrix inputs;   // n × d
    Vector targets;  // class index (as double) or real target
    TaskKind kind = TaskKind::classification;
    std::size_t num_classes = 0;
    std::size_t duplication_factor = 1;
    std::vector<std::uint8_t> corrupted;  // optional per-row flag for injected label noise

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
    [[nodiscard]] std::size_t label(std::size_t i) const {
        return static_cast<std::size_t>(targets(static_cast<Eigen::Index>(i)));
    }

    void validate() const {
        if (targets.size() != inputs.rows()) throw contract_error("Dataset: inputs/targets row mismatch");
        if (!inputs.allFinite() || !targets.allFinite()) throw contract_error("Dataset: non-finite entries");
        if (!corrupted.empty() && corrupted.size() != size()) throw contract_error("Dataset: corruption flags length");
        if (kind == TaskKind::classification) {
            if (num_classes < 2) throw contract_error("Dataset: classification needs at least 2 classes");
            for (double t : targets)
                if (t < 0 || t != std::floor(t) || t >= static_cast<double>(num_classes))
                    throw contract_error("Dataset: class index out of range");
        }
    }

    [[nodiscard]] Dataset subset(const std::vector<std::size_t>& rows) const {
        Dataset out;
        out.kind = kind;
        out.num_classes = num_classes;
        out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
        out.targets.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(rows[r]));
            out.targets(static_cast<Eigen::Index>(r)) = targets(static_cast<Eigen::Index>(rows[r]));
        }
        if (!corrupted.empty())
            for (auto r : rows) out.corrupted.push_back(corrupted[r]);
        return out;
    }

    [[nodiscard]] std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(num_classes, 0);
        for (std::size_t i = 0; i < size(); ++i) ++counts[label(i)];
        return counts;
    }
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    return p.replace_extension(".json");
}

inline void save_dataset(const Dataset& data, const std::filesystem::path& csv) {
    data.validate();
    std::ofstream out(csv);
    if (!out) throw config_error("cannot write " + csv.string());
    out.precision(17);
    for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
    out << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j)
            out << data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ',';
        if (data.kind == TaskKind::classification) out << data.label(i) << '\n';
        else out << data.targets(static_cast<Eigen::Index>(i)) << '\n';
    }
    nlohmann::json meta{{"kind", to_string(data.kind)}};
    if (data.kind == TaskKind::classification) meta["classes"] = data.num_classes;
    std::ofstream(sidecar_path(csv)) << meta.dump() << '\n';
}

inline Dataset load_dataset(const std::filesystem::path& csv) {
    std::ifstream meta_in(sidecar_path(csv));
    if (!meta_in) throw config_error("missing metadata sidecar " + sidecar_path(csv).string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("bad metadata sidecar: " + std::string(e.what()));
    }
    Dataset data;
    data.kind = parse_task_kind(meta.value("kind", std::string{}));
    if (data.kind == TaskKind::classification) data.num_classes = meta.at("classes").get<std::size_t>();

    std::ifstream in(csv);
    if (!in) throw config_error("cannot read " + csv.string());
    std::string line;
    if (!std::getline(in, line)) throw config_error(csv.string() + ": empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.empty() || header.back() != "y") throw config_error(csv.string() + ": last column must be y");
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j)
        if (header[j] != "x" + std::to_string(j)) throw config_error(csv.string() + ": bad header column " + header[j]);
    std::vector<double> values;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw config_error(csv.string() + ":" + std::to_string(lineno) + ": not a number '" + cell + "'");
            }
            ++cols;
        }
        if (cols != d + 1) throw config_error(csv.string() + ":" + std::to_string(lineno) + ": wrong column count");
        ++rows;
    }
    data.inputs.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    data.targets.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (d + 1) + j];
        data.targets(static_cast<Eigen::Index>(i)) = values[i * (d + 1) + d];
    }
    data.validate();
    return data;
}

} // namespace infoacq
