#pragma once

/// Daily OHLC price data: CSV loading (Yahoo-Finance export schema), cleaning
/// and the descriptive statistics of the raw series.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnsfuzzy/date.hpp"
#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::ingest {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct OhlcBar {
    Date date;
    double open = kMissing;
    double high = kMissing;
    double low = kMissing;
    double close = kMissing;
    double adj_close = kMissing;
    std::int64_t volume = 0;

    bool has_missing() const {
        return !(std::isfinite(open) && std::isfinite(high) && std::isfinite(low) &&
                 std::isfinite(close) && std::isfinite(adj_close));
    }
    friend bool operator==(const OhlcBar& a, const OhlcBar& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.date == b.date && same(a.open, b.open) && same(a.high, b.high) &&
               same(a.low, b.low) && same(a.close, b.close) &&
               same(a.adj_close, b.adj_close) && a.volume == b.volume;
    }
};

struct PriceSeries {
    std::vector<OhlcBar> bars;
    /// Aligned with `bars` when populated by the pipeline.
    std::optional<std::vector<double>> fuzzy_expectations;

    std::size_t size() const { return bars.size(); }
    bool empty() const { return bars.empty(); }

    /// Dates strictly increasing and expectations aligned.
    bool is_valid() const {
        for (std::size_t i = 1; i < bars.size(); ++i) {
            if (!(bars[i - 1].date < bars[i].date)) {
                return false;
            }
        }
        return !fuzzy_expectations || fuzzy_expectations->size() == bars.size();
    }
    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

struct RowError {
    std::size_t line;  // 1-based, header is line 1
    std::string message;
};

struct LoadResult {
    PriceSeries series;
    std::vector<RowError> errors;  // rows skipped entirely
    std::size_t rows_read = 0;     // data rows seen
    std::size_t flagged = 0;       // rows kept with missing values, dropped by clean()
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == ',' && !quoted) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(line.substr(start));
    for (auto& f : out) {
        f = trim(f);
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') {
            f = f.substr(1, f.size() - 2);
        }
    }
    return out;
}

/// Empty or "null" fields are missing (NaN); anything else must parse fully.
inline std::optional<double> parse_price(std::string_view s) {
    if (s.empty() || lower(s) == "null" || lower(s) == "nan") {
        return kMissing;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

}  // namespace detail

/// Parses a CSV stream with header `Date, Open, High, Low, Close, Adj Close, Volume`
/// (any order, case-insensitive, whitespace-trimmed). Unparseable rows are
/// collected in `errors`; rows with missing prices are kept and counted in `flagged`.
inline LoadResult load_ohlc_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty CSV input: no header row");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    static constexpr std::array<std::string_view, 7> kColumns{
        "date", "open", "high", "low", "close", "adj close", "volume"};
    std::array<std::optional<std::size_t>, 7> index{};
    const auto header = detail::split_csv(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = detail::lower(header[i]);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            if (name == kColumns[c] && !index[c]) {
                index[c] = i;
            }
        }
    }
    std::string missing;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (!index[c]) {
            missing += (missing.empty() ? "" : ", ") + std::string(kColumns[c]);
        }
    }
    if (!missing.empty()) {
        throw SchemaError("CSV header is missing required column(s): " + missing);
    }

    LoadResult result;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        ++result.rows_read;
        const auto fields = detail::split_csv(line);
        auto field = [&](std::size_t c) -> std::string_view {
            const std::size_t i = *index[c];
            return i < fields.size() ? fields[i] : std::string_view{};
        };
        const auto date = Date::parse(field(0));
        if (!date) {
            result.errors.push_back({lineno, "invalid date '" + std::string(field(0)) + "'"});
            continue;
        }
        OhlcBar bar;
        bar.date = *date;
        double* targets[5] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.adj_close};
        bool ok = true;
        for (std::size_t c = 1; c <= 5 && ok; ++c) {
            const auto v = detail::parse_price(field(c));
            if (!v) {
                result.errors.push_back({lineno, "unparseable " + std::string(kColumns[c]) +
                                                     " '" + std::string(field(c)) + "'"});
                ok = false;
            } else {
                *targets[c - 1] = *v;
            }
        }
        if (!ok) {
            continue;
        }
        const auto vol = field(6);
        if (!vol.empty() && detail::lower(vol) != "null") {
            double v = 0.0;
            auto [p, ec] = std::from_chars(vol.data(), vol.data() + vol.size(), v);
            if (ec != std::errc{} || p != vol.data() + vol.size() || v < 0.0) {
                result.errors.push_back({lineno, "invalid volume '" + std::string(vol) + "'"});
                continue;
            }
            bar.volume = static_cast<std::int64_t>(v);
        }
        if (bar.has_missing()) {
            ++result.flagged;
        }
        result.series.bars.push_back(bar);
    }
    if (result.rows_read == 0) {
        throw DataError("CSV contains a header but no data rows");
    }
    if (result.series.bars.empty()) {
        throw DataError("all " + std::to_string(result.rows_read) +
                        " data rows failed to parse; first error at line " +
                        std::to_string(result.errors.front().line) + ": " +
                        result.errors.front().message);
    }
    std::stable_sort(result.series.bars.begin(), result.series.bars.end(),
                     [](const OhlcBar& a, const OhlcBar& b) { return a.date < b.date; });
    return result;
}

inline LoadResult load_ohlc_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open data file '" + path + "'");
    }
    try {
        return load_ohlc_csv(in);
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

struct CleanOptions {
    bool clamp_close = false;     // clamp open/close into [low, high] instead of dropping
    bool use_adj_close = false;   // replace Close by Adj Close before validation
};

struct CleanSummary {
    std::size_t dropped_missing = 0;
    std::size_t dropped_nonpositive = 0;
    std::size_t duplicates_removed = 0;
    std::size_t dropped_malformed = 0;
    std::size_t clamped = 0;

    std::size_t total_dropped() const {
        return dropped_missing + dropped_nonpositive + duplicates_removed + dropped_malformed;
    }
};

struct CleanResult {
    PriceSeries series;
    CleanSummary summary;
};

/// Drops missing/nonpositive rows, keeps the last of duplicated dates and
/// resolves close/open outside [low, high] by dropping or clamping.
inline CleanResult clean(const PriceSeries& input, CleanOptions opts = {}) {
    CleanResult out;
    auto& s = out.summary;
    std::vector<OhlcBar> bars = input.bars;
    std::stable_sort(bars.begin(), bars.end(),
                     [](const OhlcBar& a, const OhlcBar& b) { return a.date < b.date; });

    std::vector<OhlcBar> kept;
    kept.reserve(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        if (i + 1 < bars.size() && bars[i + 1].date == bars[i].date) {
            ++s.duplicates_removed;
            continue;
        }
        OhlcBar bar = bars[i];
        if (opts.use_adj_close) {
            bar.close = bar.adj_close;
        }
        if (bar.has_missing()) {
            ++s.dropped_missing;
            continue;
        }
        if (bar.open <= 0.0 || bar.high <= 0.0 || bar.low <= 0.0 || bar.close <= 0.0 ||
            bar.adj_close <= 0.0) {
            ++s.dropped_nonpositive;
            continue;
        }
        if (bar.low > bar.high) {
            ++s.dropped_malformed;
            continue;
        }
        const bool bad = bar.close < bar.low || bar.close > bar.high || bar.open < bar.low ||
                         bar.open > bar.high;
        if (bad) {
            if (!opts.clamp_close) {
                ++s.dropped_malformed;
                continue;
            }
            bar.close = std::clamp(bar.close, bar.low, bar.high);
            bar.open = std::clamp(bar.open, bar.low, bar.high);
            ++s.clamped;
        }
        kept.push_back(bar);
    }
    if (kept.empty()) {
        throw DataError("no bars survive cleaning (" + std::to_string(input.bars.size()) +
                        " rows in input)");
    }
    out.series.bars = std::move(kept);
    return out;
}

struct SummaryStats {
    double mean;
    double median;
    double min;
    double max;
};

/// Mean, median (midpoint average for even counts), min and max.
inline SummaryStats summary_stats(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("summary statistics of an empty list");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    return {mean, median, v.front(), v.back()};
}

/// close[k+1] - close[k].
inline std::vector<double> close_changes(const PriceSeries& s) {
    std::vector<double> out;
    for (std::size_t k = 1; k < s.bars.size(); ++k) {
        out.push_back(s.bars[k].close - s.bars[k - 1].close);
    }
    return out;
}

/// 100 * (close[k+1] - close[k]) / close[k].
inline std::vector<double> close_change_pcts(const PriceSeries& s) {
    std::vector<double> out;
    for (std::size_t k = 1; k < s.bars.size(); ++k) {
        out.push_back(100.0 * (s.bars[k].close - s.bars[k - 1].close) / s.bars[k - 1].close);
    }
    return out;
}

/// Daily volatility range, high - low.
inline std::vector<double> volatility_ranges(const PriceSeries& s) {
    std::vector<double> out;
    out.reserve(s.bars.size());
    for (const auto& b : s.bars) {
        out.push_back(b.high - b.low);
    }
    return out;
}

}  // namespace bnsfuzzy::ingest
