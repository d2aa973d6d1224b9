#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "records.hpp"
#include "stats.hpp"

namespace infoacq {

enum class PlotKind { curves, histogram };

struct PlotOptions {
    std::string metric = "metric";     // metric | wall_ms
    std::string group_by = "scorer";   // scorer | trial
    PlotKind kind = PlotKind::curves;
    std::size_t bins = 20;
    double width = 640;
    double height = 420;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline const char* palette(std::size_t i) {
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colours[i % 10];
}

struct Frame {
    double x0, x1, y0, y1, width, height;
    static constexpr double left = 60, right = 150, top = 20, bottom = 40;

    [[nodiscard]] double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    [[nodiscard]] double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

inline std::string svg_open(const PlotOptions& o) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(o.width) + "\" height=\"" + fmt(o.height) +
           "\" font-family=\"DejaVu Sans, sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    std::string s;
    s += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s += "<line x1=\"" + fmt(f.px(f.x0)) + "\" y1=\"" + fmt(f.py(f.y0)) + "\" x2=\"" + fmt(f.px(f.x1)) + "\" y2=\"" + fmt(f.py(f.y0)) + "\"/>\n";
    s += "<line x1=\"" + fmt(f.px(f.x0)) + "\" y1=\"" + fmt(f.py(f.y0)) + "\" x2=\"" + fmt(f.px(f.x0)) + "\" y2=\"" + fmt(f.py(f.y1)) + "\"/>\n";
    s += "</g>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0, yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
        s += "<text x=\"" + fmt(f.px(xv)) + "\" y=\"" + fmt(f.py(f.y0) + 15) + "\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
        s += "<text x=\"" + fmt(f.px(f.x0) - 5) + "\" y=\"" + fmt(f.py(yv) + 4) + "\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
    }
    s += "<text x=\"" + fmt((f.px(f.x0) + f.px(f.x1)) / 2) + "\" y=\"" + fmt(f.height - 5) + "\" text-anchor=\"middle\">" +
         escape_xml(xlabel) + "</text>\n";
    s += "<text x=\"12\" y=\"" + fmt((f.py(f.y0) + f.py(f.y1)) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 12 " +
         fmt((f.py(f.y0) + f.py(f.y1)) / 2) + ")\">" + escape_xml(ylabel) + "</text>\n";
    return s;
}

inline std::string legend_entry(const Frame& f, std::size_t i, const std::string& name) {
    const double y = f.top + 15.0 * static_cast<double>(i);
    const double x = f.width - f.right + 10;
    return "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"12\" height=\"3\" fill=\"" + palette(i) + "\"/>\n<text x=\"" +
           fmt(x + 16) + "\" y=\"" + fmt(y + 5) + "\">" + escape_xml(name) + "</text>\n";
}

inline double value_of(const ResultRow& r, const std::string& metric) { return metric == "wall_ms" ? r.wall_ms : r.metric; }

inline std::string group_of(const ResultRow& r, const std::string& group_by) {
    return group_by == "trial" ? "trial " + std::to_string(r.trial) : r.scorer;
}

} // namespace detail

// Median curve with a 25-75% band per group, x = labeled count.
inline std::string learning_curve_svg(const std::vector<ResultRow>& rows, const PlotOptions& opts = {}) {
    if (rows.empty()) throw config_error("plot: no data rows");
    if (opts.metric != "metric" && opts.metric != "wall_ms") throw config_error("plot: --metric must be 'metric' or 'wall_ms'");
    if (opts.group_by != "scorer" && opts.group_by != "trial") throw config_error("plot: --group-by must be 'scorer' or 'trial'");
    std::map<std::string, std::map<std::size_t, std::vector<double>>> groups;
    for (const auto& r : rows) groups[detail::group_of(r, opts.group_by)][r.labeled].push_back(detail::value_of(r, opts.metric));

    struct Series {
        std::vector<double> x, lo, mid, hi;
    };
    std::map<std::string, Series> series;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& [name, by_x] : groups) {
        Series s;
        for (const auto& [x, values] : by_x) {
            s.x.push_back(static_cast<double>(x));
            s.lo.push_back(quantile(values, 0.25));
            s.mid.push_back(median(values));
            s.hi.push_back(quantile(values, 0.75));
            x0 = std::min(x0, s.x.back());
            x1 = std::max(x1, s.x.back());
            y0 = std::min(y0, s.lo.back());
            y1 = std::max(y1, s.hi.back());
        }
        series.emplace(name, std::move(s));
    }
    detail::widen(x0, x1);
    detail::widen(y0, y1);
    const detail::Frame f{x0, x1, y0, y1, opts.width, opts.height};
    std::string svg = detail::svg_open(opts) + detail::axes(f, "labeled", opts.metric);
    std::size_t i = 0;
    for (const auto& [name, s] : series) {
        std::string band, line;
        for (std::size_t k = 0; k < s.x.size(); ++k) band += detail::fmt(f.px(s.x[k])) + "," + detail::fmt(f.py(s.hi[k])) + " ";
        for (std::size_t k = s.x.size(); k-- > 0;) band += detail::fmt(f.px(s.x[k])) + "," + detail::fmt(f.py(s.lo[k])) + " ";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            line += (k ? " " : "") + detail::fmt(f.px(s.x[k])) + "," + detail::fmt(f.py(s.mid[k]));
        band.pop_back();
        svg += "<polygon class=\"band\" points=\"" + band + "\" fill=\"" + detail::palette(i) + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        svg += "<polyline class=\"median\" points=\"" + line + "\" fill=\"none\" stroke=\"" + detail::palette(i) + "\" stroke-width=\"2\"/>\n";
        svg += detail::legend_entry(f, i, name);
        ++i;
    }
    return svg + "</svg>\n";
}

// Histogram of the final-round value of each trial, one bar set per group.
inline std::string final_metric_histogram_svg(const std::vector<ResultRow>& rows, const PlotOptions& opts = {}) {
    if (rows.empty()) throw config_error("plot: no data rows");
    if (opts.bins < 1) throw config_error("plot: bins must be at least 1");
    std::map<std::string, std::map<std::size_t, const ResultRow*>> last;
    for (const auto& r : rows) {
        auto& slot = last[detail::group_of(r, opts.group_by)][r.trial];
        if (!slot || r.round > slot->round) slot = &r;
    }
    double lo = 1e300, hi = -1e300;
    for (const auto& [name, trials] : last)
        for (const auto& [t, r] : trials) {
            lo = std::min(lo, detail::value_of(*r, opts.metric));
            hi = std::max(hi, detail::value_of(*r, opts.metric));
        }
    detail::widen(lo, hi);
    const double width = (hi - lo) / static_cast<double>(opts.bins);
    std::map<std::string, std::vector<double>> counts;
    double top = 1;
    for (const auto& [name, trials] : last) {
        auto& c = counts[name];
        c.assign(opts.bins, 0.0);
        for (const auto& [t, r] : trials) {
            const auto b = std::min(opts.bins - 1, static_cast<std::size_t>((detail::value_of(*r, opts.metric) - lo) / width));
            top = std::max(top, ++c[b]);
        }
    }
    const detail::Frame f{lo, hi, 0.0, top, opts.width, opts.height};
    std::string svg = detail::svg_open(opts) + detail::axes(f, "final " + opts.metric, "count");
    const double groups = static_cast<double>(counts.size());
    std::size_t i = 0;
    for (const auto& [name, c] : counts) {
        for (std::size_t b = 0; b < c.size(); ++b) {
            if (c[b] == 0) continue;
            const double left = f.px(lo + width * static_cast<double>(b)) +
                                (f.px(lo + width) - f.px(lo)) * static_cast<double>(i) / groups;
            const double w = (f.px(lo + width) - f.px(lo)) / groups;
            svg += "<rect class=\"bar\" x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(f.py(c[b])) + "\" width=\"" +
                   detail::fmt(w) + "\" height=\"" + detail::fmt(f.py(0) - f.py(c[b])) + "\" fill=\"" + detail::palette(i) + "\"/>\n";
        }
        svg += detail::legend_entry(f, i, name);
        ++i;
    }
    return svg + "</svg>\n";
}

} // namespace infoacq
