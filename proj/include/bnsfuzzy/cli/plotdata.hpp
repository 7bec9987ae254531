#pragma once

/// Plot-ready series derived from the daily fuzzy price. Every table is a CSV
/// with a header row:
///
///   moving_averages.csv      date,price,ma<w>...   (empty cell until w values exist)
///   yearly_box.csv           year,min,q1,median,q3,max,count   (fuzzy price)
///   histogram_price.csv      lo,hi,count
///   histogram_change.csv     lo,hi,count   (daily change)
///   histogram_change_pct.csv lo,hi,count   (daily change percentage)
///   monthly.csv              year,month,mean_price,change,trading_days
///   realized_volatility.csv  date,volatility,volatility_return
///   heatmap_volatility.csv   year,month,value  (monthly mean, one row per month present)
///   heatmap_volatility_return.csv  year,month,value
///
/// Quartiles interpolate linearly between order statistics. Histogram bins
/// split [min, max] evenly; the last bin is closed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnsfuzzy/date.hpp"
#include "bnsfuzzy/error.hpp"
#include "bnsfuzzy/features.hpp"

namespace bnsfuzzy::cli {

inline std::string fmt_num(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Trailing mean over `window` values; nullopt until the window is full.
inline std::vector<std::optional<double>> moving_average(std::span<const double> v, int window) {
    if (window < 1) {
        throw DomainError("moving average window must be >= 1");
    }
    std::vector<std::optional<double>> out(v.size());
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t k = w - 1; k < v.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = k + 1 - w; j <= k; ++j) {
            acc += v[j];
        }
        out[k] = acc / static_cast<double>(w);
    }
    return out;
}

/// Quantile q of sorted data, linear interpolation between closest ranks.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw DomainError("quantile of an empty list");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct BoxStats {
    double min, q1, median, q3, max;
    std::size_t count;
};

inline BoxStats box_stats(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {v.front(), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5),
            quantile_sorted(v, 0.75), v.back(), v.size()};
}

struct Bin {
    double lo, hi;
    std::size_t count;
};

inline std::vector<Bin> histogram(std::span<const double> v, int bins) {
    if (v.empty() || bins < 1) {
        throw DomainError("histogram needs data and at least one bin");
    }
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const double lo = *mn;
    const double hi = *mx;
    if (lo == hi) {
        return {{lo, hi, v.size()}};
    }
    const double width = (hi - lo) / bins;
    std::vector<Bin> out;
    for (int b = 0; b < bins; ++b) {
        out.push_back({lo + b * width, b + 1 == bins ? hi : lo + (b + 1) * width, 0});
    }
    for (double x : v) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        out[std::min(b, out.size() - 1)].count++;
    }
    return out;
}

/// Mean of `values` per (year, month) of `dates`, skipping NaN.
inline std::map<std::pair<int, unsigned>, double> monthly_mean(std::span<const Date> dates,
                                                              std::span<const double> values) {
    std::map<std::pair<int, unsigned>, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (std::isnan(values[i])) {
            continue;
        }
        auto& a = acc[{dates[i].year(), dates[i].month()}];
        a.first += values[i];
        ++a.second;
    }
    std::map<std::pair<int, unsigned>, double> out;
    for (const auto& [key, a] : acc) {
        out[key] = a.first / static_cast<double>(a.second);
    }
    return out;
}

/// Minimal line chart of one dated series.
inline void write_svg_line(std::ostream& out, const std::string& title, std::span<const Date> dates,
                           std::span<const double> values) {
    const double w = 900.0;
    const double h = 360.0;
    const double pad = 40.0;
    double lo = INFINITY;
    double hi = -INFINITY;
    for (double v : values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo < hi)) {
        lo -= 1.0;
        hi += 1.0;
    }
    char buf[128];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"360\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << pad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
    const double n = std::max<double>(1.0, static_cast<double>(values.size() - 1));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            continue;
        }
        const double x = pad + (w - 2 * pad) * static_cast<double>(i) / n;
        const double y = h - pad - (h - 2 * pad) * (values[i] - lo) / (hi - lo);
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
        out << buf;
    }
    out << "\"/>\n";
    if (!dates.empty()) {
        out << "<text x=\"" << pad << "\" y=\"" << h - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << dates.front().str() << "</text>\n"
            << "<text x=\"" << w - pad - 70 << "\" y=\"" << h - 12
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << dates.back().str() << "</text>\n";
    }
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    out << "<text x=\"4\" y=\"" << pad << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    out << "<text x=\"4\" y=\"" << h - pad << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf
        << "</text>\n</svg>\n";
}

inline void write_histogram_csv(std::ostream& out, const std::vector<Bin>& bins) {
    out << "lo,hi,count\n";
    for (const auto& b : bins) {
        out << fmt_num(b.lo) << ',' << fmt_num(b.hi) << ',' << b.count << '\n';
    }
}

inline void write_heatmap_csv(std::ostream& out, const std::map<std::pair<int, unsigned>, double>& grid) {
    out << "year,month,value\n";
    for (const auto& [key, v] : grid) {
        out << key.first << ',' << key.second << ',' << fmt_num(v) << '\n';
    }
}

}  // namespace bnsfuzzy::cli
