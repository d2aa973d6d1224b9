#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "../errors.hpp"

namespace infoacq {

// 1-based ranks; tied values share their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw contract_error("pearson: need two equally long samples of size ≥ 2");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) return saa == sbb ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Spearman correlation over the entries finite in both samples.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw contract_error("spearman: length mismatch");
    std::vector<double> fa, fb;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::isfinite(a[i]) && std::isfinite(b[i])) fa.push_back(a[i]), fb.push_back(b[i]);
    return pearson(average_ranks(fa), average_ranks(fb));
}

struct SignTest {
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t ties = 0;
    double p_value = 1.0;  // one-sided, P(wins ≥ observed) under a fair coin; ties dropped
};

inline SignTest sign_test(const std::vector<double>& better, const std::vector<double>& worse) {
    if (better.size() != worse.size()) throw contract_error("sign_test: length mismatch");
    SignTest t;
    for (std::size_t i = 0; i < better.size(); ++i) {
        if (better[i] > worse[i]) ++t.wins;
        else if (better[i] < worse[i]) ++t.losses;
        else ++t.ties;
    }
    const std::size_t n = t.wins + t.losses;
    double tail = 0;
    for (std::size_t k = t.wins; k <= n; ++k) {
        double c = 1;
        for (std::size_t j = 0; j < k; ++j) c = c * static_cast<double>(n - j) / static_cast<double>(j + 1);
        tail += c;
    }
    t.p_value = n == 0 ? 1.0 : tail / std::pow(2.0, static_cast<double>(n));
    return t;
}

// Linear-interpolated quantile of a sample (q in [0, 1]).
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw contract_error("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

} // namespace infoacq
