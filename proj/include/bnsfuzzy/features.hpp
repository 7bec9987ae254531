#pragma once

/// Feature construction over the daily fuzzy price: changes, realized volatility,
/// big-jump flags and the sliding-window classification dataset.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bnsfuzzy/date.hpp"
#include "bnsfuzzy/error.hpp"
#include "bnsfuzzy/fuzzy.hpp"
#include "bnsfuzzy/ingest.hpp"

namespace bnsfuzzy::features {

struct FuzzySeries {
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Daily fuzzy price E(S) of every bar at weight lambda_f.
inline FuzzySeries build_fuzzy_series(const ingest::PriceSeries& series,
                                      fuzzy::OptimismWeight w,
                                      fuzzy::BarPolicy policy = fuzzy::BarPolicy::reject) {
    FuzzySeries out;
    out.dates.reserve(series.size());
    out.values.reserve(series.size());
    for (const auto& bar : series.bars) {
        if (!out.dates.empty() && !(out.dates.back() < bar.date)) {
            throw DataError("price series dates must be strictly increasing at " +
                            bar.date.str());
        }
        const auto a = fuzzy::fuzzify_bar(bar.low, bar.close, bar.high, policy);
        out.dates.push_back(bar.date);
        out.values.push_back(fuzzy::fuzzy_expectation(a, w));
    }
    return out;
}

struct Changes {
    std::vector<double> changes;      // v[k+1] - v[k]
    std::vector<double> change_pcts;  // 100 (v[k+1] - v[k]) / v[k]
};

inline Changes daily_changes(std::span<const double> v) {
    if (v.size() < 2) {
        throw DomainError("daily changes need at least two observations");
    }
    Changes out;
    out.changes.reserve(v.size() - 1);
    out.change_pcts.reserve(v.size() - 1);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        if (v[k] == 0.0) {
            throw DomainError("percentage change undefined: zero price at index " +
                              std::to_string(k));
        }
        out.changes.push_back(v[k + 1] - v[k]);
        out.change_pcts.push_back(100.0 * (v[k + 1] - v[k]) / v[k]);
    }
    return out;
}

inline constexpr double kTradingDays = 252.0;

/// Rolling sample standard deviation over trailing `window` observations,
/// multiplied by sqrt(252) when `annualize`. Element i covers [i, i+window).
inline std::vector<double> realized_volatility(std::span<const double> change_pcts,
                                               std::size_t window, bool annualize = true) {
    if (window < 2) {
        throw DomainError("realized volatility window must be >= 2");
    }
    if (change_pcts.size() < window) {
        throw DomainError("realized volatility window " + std::to_string(window) +
                          " exceeds series length " + std::to_string(change_pcts.size()));
    }
    const double scale = annualize ? std::sqrt(kTradingDays) : 1.0;
    std::vector<double> out;
    out.reserve(change_pcts.size() - window + 1);
    for (std::size_t i = 0; i + window <= change_pcts.size(); ++i) {
        // Shifted by the first value so a constant window is exactly zero.
        const double shift = change_pcts[i];
        double mean = 0.0;
        for (std::size_t j = i; j < i + window; ++j) {
            mean += change_pcts[j] - shift;
        }
        mean /= static_cast<double>(window);
        double ss = 0.0;
        for (std::size_t j = i; j < i + window; ++j) {
            const double d = change_pcts[j] - shift - mean;
            ss += d * d;
        }
        out.push_back(std::sqrt(ss / static_cast<double>(window - 1)) * scale);
    }
    return out;
}

/// Day-over-day percentage change of the realized volatility. A zero previous
/// value yields 0 when the current value is also zero, NaN otherwise.
inline std::vector<double> realized_volatility_return(std::span<const double> vol) {
    std::vector<double> out;
    for (std::size_t k = 1; k < vol.size(); ++k) {
        if (vol[k - 1] == 0.0) {
            out.push_back(vol[k] == 0.0 ? 0.0 : std::nan(""));
        } else {
            out.push_back(100.0 * (vol[k] - vol[k - 1]) / vol[k - 1]);
        }
    }
    return out;
}

/// Flags days whose fuzzy price fell by at least c percent: change_pct <= -c.
inline std::vector<bool> detect_big_jumps(std::span<const double> change_pcts, double c) {
    if (!(c > 0.0)) {
        throw DomainError("jump threshold C must be > 0");
    }
    std::vector<bool> out(change_pcts.size());
    for (std::size_t k = 0; k < change_pcts.size(); ++k) {
        out[k] = change_pcts[k] <= -c;
    }
    return out;
}

struct WindowParams {
    int window = 10;
    int lookahead = 10;
    int min_jumps = 2;

    void validate() const {
        if (window < 1 || lookahead < 1 || min_jumps < 1 || min_jumps > lookahead) {
            throw ConfigError("window parameters require window >= 1, lookahead >= 1, "
                              "1 <= min_jumps <= lookahead");
        }
    }
};

/// N x window matrix of change percentages with a binary label per row.
struct WindowDataset {
    WindowParams params{};
    Eigen::MatrixXd rows;
    std::vector<int> labels;
    std::vector<Date> row_dates;  // date of each row's last element

    std::size_t size() const { return labels.size(); }
    std::size_t positives() const {
        std::size_t n = 0;
        for (int l : labels) {
            n += l == 1;
        }
        return n;
    }

    /// Subset of rows by index, in the given order.
    WindowDataset select(std::span<const std::size_t> idx) const {
        WindowDataset out;
        out.params = params;
        out.rows.resize(static_cast<Eigen::Index>(idx.size()), rows.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(idx[i]));
            out.labels.push_back(labels[idx[i]]);
            if (!row_dates.empty()) {
                out.row_dates.push_back(row_dates[idx[i]]);
            }
        }
        return out;
    }
};

/// Row r holds change_pcts[r, r+window); its label is 1 iff at least `min_jumps`
/// of jumps[r+window, r+window+lookahead) are set. Rows whose lookahead runs past
/// the data are not emitted. `change_dates[k]` dates change k (optional).
inline WindowDataset build_window_dataset(std::span<const double> change_pcts,
                                          const std::vector<bool>& jumps,
                                          WindowParams params = {},
                                          std::span<const Date> change_dates = {}) {
    params.validate();
    if (jumps.size() != change_pcts.size()) {
        throw ShapeError("jump flags and change percentages differ in length");
    }
    if (!change_dates.empty() && change_dates.size() != change_pcts.size()) {
        throw ShapeError("change dates and change percentages differ in length");
    }
    const auto n = static_cast<long>(change_pcts.size());
    const long count = n - params.window - params.lookahead + 1;
    if (count <= 0) {
        throw DomainError("series of " + std::to_string(n) +
                          " changes is too short for one labeled window (need " +
                          std::to_string(params.window + params.lookahead) + ")");
    }
    WindowDataset ds;
    ds.params = params;
    ds.rows.resize(count, params.window);
    ds.labels.resize(static_cast<std::size_t>(count));
    for (long r = 0; r < count; ++r) {
        for (int j = 0; j < params.window; ++j) {
            ds.rows(r, j) = change_pcts[static_cast<std::size_t>(r + j)];
        }
        int hits = 0;
        for (int j = 0; j < params.lookahead; ++j) {
            hits += jumps[static_cast<std::size_t>(r + params.window + j)] ? 1 : 0;
        }
        ds.labels[static_cast<std::size_t>(r)] = hits >= params.min_jumps ? 1 : 0;
        if (!change_dates.empty()) {
            ds.row_dates.push_back(change_dates[static_cast<std::size_t>(r + params.window - 1)]);
        }
    }
    return ds;
}

/// Date range of a train/test split, inclusive on both ends.
struct SplitSpec {
    std::string name;
    Date train_start;
    Date train_end;
    Date test_start;
    Date test_end;

    void validate() const {
        if (!(train_start <= train_end && train_end < test_start && test_start <= test_end)) {
            throw ConfigError("split '" + name +
                              "' requires train_start <= train_end < test_start <= test_end");
        }
    }
    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitResult {
    WindowDataset train;
    WindowDataset test;
};

inline SplitResult split_by_date(const WindowDataset& ds, const SplitSpec& spec) {
    spec.validate();
    if (ds.row_dates.size() != ds.size()) {
        throw DataError("dataset rows carry no dates; cannot split by date");
    }
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Date d = ds.row_dates[i];
        if (spec.train_start <= d && d <= spec.train_end) {
            train.push_back(i);
        } else if (spec.test_start <= d && d <= spec.test_end) {
            test.push_back(i);
        }
    }
    if (train.empty() || test.empty()) {
        throw SplitError("split '" + spec.name + "' leaves the " +
                         std::string(train.empty() ? "train" : "test") + " side empty");
    }
    return {ds.select(train), ds.select(test)};
}

/// Everything derived from a fuzzy series for classification.
struct FeatureSet {
    FuzzySeries fuzzy;
    Changes changes;
    std::vector<Date> change_dates;  // date of the later day of each change
    std::vector<bool> jumps;
    WindowDataset dataset;
};

inline FeatureSet build_features(FuzzySeries fz, double jump_threshold, WindowParams params) {
    FeatureSet fs;
    fs.changes = daily_changes(fz.values);
    fs.change_dates.assign(fz.dates.begin() + 1, fz.dates.end());
    fs.jumps = detect_big_jumps(fs.changes.change_pcts, jump_threshold);
    fs.dataset = build_window_dataset(fs.changes.change_pcts, fs.jumps, params, fs.change_dates);
    fs.fuzzy = std::move(fz);
    return fs;
}

/// CSV with header `row_date,a1..aW,label`.
inline void write_window_csv(std::ostream& out, const WindowDataset& ds) {
    out << "row_date";
    for (Eigen::Index j = 0; j < ds.rows.cols(); ++j) {
        out << ",a" << (j + 1);
    }
    out << ",label\n";
    char buf[40];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << (ds.row_dates.empty() ? std::string{} : ds.row_dates[i].str());
        for (Eigen::Index j = 0; j < ds.rows.cols(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", ds.rows(static_cast<Eigen::Index>(i), j));
            out << buf;
        }
        out << ',' << ds.labels[i] << '\n';
    }
}

/// Reads the format written by write_window_csv.
inline WindowDataset read_window_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty window dataset file");
    }
    auto header = ingest::detail::split_csv(line);
    if (header.size() < 3 || header.front() != "row_date" || header.back() != "label") {
        throw SchemaError("window dataset header must be row_date,a1..aW,label");
    }
    const auto width = static_cast<Eigen::Index>(header.size() - 2);
    std::vector<std::vector<double>> values;
    WindowDataset ds;
    ds.params.window = static_cast<int>(width);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (ingest::detail::trim(line).empty()) {
            continue;
        }
        auto f = ingest::detail::split_csv(line);
        if (f.size() != header.size()) {
            throw DataError("window dataset line " + std::to_string(lineno) +
                            ": wrong number of fields");
        }
        const auto d = Date::parse(f[0]);
        if (!d) {
            throw DataError("window dataset line " + std::to_string(lineno) + ": bad date");
        }
        ds.row_dates.push_back(*d);
        std::vector<double> row;
        for (Eigen::Index j = 0; j < width; ++j) {
            const auto v = ingest::detail::parse_price(f[static_cast<std::size_t>(j) + 1]);
            if (!v || std::isnan(*v)) {
                throw DataError("window dataset line " + std::to_string(lineno) +
                                ": bad value");
            }
            row.push_back(*v);
        }
        values.push_back(std::move(row));
        if (f.back() != "0" && f.back() != "1") {
            throw DataError("window dataset line " + std::to_string(lineno) + ": label not 0/1");
        }
        ds.labels.push_back(f.back() == "1" ? 1 : 0);
    }
    ds.rows.resize(static_cast<Eigen::Index>(values.size()), width);
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (Eigen::Index j = 0; j < width; ++j) {
            ds.rows(static_cast<Eigen::Index>(i), j) = values[i][static_cast<std::size_t>(j)];
        }
    }
    return ds;
}

}  // namespace bnsfuzzy::features
