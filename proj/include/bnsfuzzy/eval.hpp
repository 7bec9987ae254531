#pragma once

/// Classification metrics, θ estimates and the dated split experiment suite.

#include <array>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnsfuzzy/date.hpp"
#include "bnsfuzzy/error.hpp"
#include "bnsfuzzy/features.hpp"
#include "bnsfuzzy/fuzzy.hpp"
#include "bnsfuzzy/ingest.hpp"
#include "bnsfuzzy/ml.hpp"

namespace bnsfuzzy::eval {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool precision_undefined = false;  // no predictions of this class
    bool recall_undefined = false;     // no true samples of this class
};

struct ClassificationReport {
    std::array<ClassMetrics, 2> classes{};  // indexed by label

    const ClassMetrics& operator[](int label) const { return classes[static_cast<std::size_t>(label)]; }
    std::size_t total() const { return classes[0].support + classes[1].support; }
    bool any_undefined() const {
        for (const auto& c : classes) {
            if (c.precision_undefined || c.recall_undefined) {
                return true;
            }
        }
        return false;
    }
};

/// Per-class precision, recall, f1 and support. Zero denominators give 0 and
/// set the matching `*_undefined` flag.
inline ClassificationReport classification_report(std::span<const int> y_true,
                                                  std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                         std::to_string(y_pred.size()));
    }
    if (y_true.empty()) {
        throw DomainError("classification report of an empty label list");
    }
    std::array<std::array<std::size_t, 2>, 2> cm{};  // cm[true][pred]
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
            throw DataError("labels must be 0 or 1");
        }
        ++cm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    ClassificationReport r;
    for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t o = 1 - c;
        const auto tp = static_cast<double>(cm[c][c]);
        const auto predicted = static_cast<double>(cm[c][c] + cm[o][c]);
        const auto actual = static_cast<double>(cm[c][c] + cm[c][o]);
        auto& m = r.classes[c];
        m.support = cm[c][c] + cm[c][o];
        m.precision_undefined = predicted == 0.0;
        m.recall_undefined = actual == 0.0;
        m.precision = m.precision_undefined ? 0.0 : tp / predicted;
        m.recall = m.recall_undefined ? 0.0 : tp / actual;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return r;
}

enum class ThetaMethod { mean_proba, positive_fraction };

inline const char* to_string(ThetaMethod m) {
    return m == ThetaMethod::mean_proba ? "mean_proba" : "positive_fraction";
}

inline ThetaMethod parse_theta_method(const std::string& s) {
    if (s == "mean_proba") {
        return ThetaMethod::mean_proba;
    }
    if (s == "positive_fraction") {
        return ThetaMethod::positive_fraction;
    }
    throw ConfigError("unknown theta method '" + s + "' (mean_proba, positive_fraction)");
}

struct ThetaEstimate {
    double value = 0.0;
    std::vector<double> per_window;
    ThetaMethod method = ThetaMethod::mean_proba;
};

inline ThetaEstimate estimate_theta(std::span<const double> probas, ThetaMethod method) {
    if (probas.empty()) {
        throw DomainError("theta estimate needs at least one window");
    }
    double acc = 0.0;
    for (double p : probas) {
        acc += method == ThetaMethod::mean_proba ? p : (p >= 0.5 ? 1.0 : 0.0);
    }
    ThetaEstimate t;
    t.value = std::clamp(acc / static_cast<double>(probas.size()), 0.0, 1.0);
    t.per_window.assign(probas.begin(), probas.end());
    t.method = method;
    return t;
}

/// The ten train/test windows of the published tables, 1 to 10 years.
inline std::vector<features::SplitSpec> default_splits() {
    struct Row {
        const char* name;
        const char* a;
        const char* b;
        const char* c;
        const char* d;
    };
    static constexpr Row rows[] = {
        {"1y", "2019-11-01", "2020-05-13", "2020-05-14", "2020-10-30"},
        {"2y", "2018-11-01", "2020-05-13", "2020-05-14", "2020-10-30"},
        {"3y", "2017-11-01", "2019-07-29", "2019-07-30", "2020-10-30"},
        {"4y", "2016-11-01", "2019-07-29", "2019-07-30", "2020-10-30"},
        {"5y", "2015-11-01", "2018-10-09", "2018-10-10", "2020-10-30"},
        {"6y", "2014-11-01", "2018-10-09", "2018-10-10", "2020-10-30"},
        {"7y", "2013-11-01", "2017-12-21", "2017-12-22", "2020-10-30"},
        {"8y", "2012-11-01", "2017-12-21", "2017-12-22", "2020-10-30"},
        {"9y", "2011-11-01", "2016-10-13", "2016-10-14", "2020-10-30"},
        {"10y", "2010-11-01", "2016-10-13", "2016-10-14", "2020-10-30"},
    };
    std::vector<features::SplitSpec> out;
    for (const auto& r : rows) {
        out.push_back({r.name, *Date::parse(r.a), *Date::parse(r.b), *Date::parse(r.c),
                       *Date::parse(r.d)});
    }
    return out;
}

struct SuiteConfig {
    double lambda_f = 0.5;
    double jump_threshold = 1.0;
    features::WindowParams window{};
    fuzzy::BarPolicy bar_policy = fuzzy::BarPolicy::reject;
    std::vector<features::SplitSpec> splits = default_splits();
    std::vector<ml::ClassifierSpec> algorithms = default_algorithms(0);
    ThetaMethod theta_method = ThetaMethod::mean_proba;
    double threshold = 0.5;

    static std::vector<ml::ClassifierSpec> default_algorithms(std::uint64_t seed) {
        std::vector<ml::ClassifierSpec> out;
        for (ml::Kind k : ml::kAllKinds) {
            out.push_back(ml::ClassifierSpec::with_defaults(k, seed));
        }
        return out;
    }

    void validate() const {
        (void)fuzzy::OptimismWeight{lambda_f};
        if (!(jump_threshold > 0.0)) {
            throw ConfigError("jump threshold must be > 0");
        }
        window.validate();
        if (splits.empty()) {
            throw ConfigError("no splits configured");
        }
        for (const auto& s : splits) {
            s.validate();
        }
        if (algorithms.empty()) {
            throw ConfigError("no algorithms configured");
        }
        for (const auto& a : algorithms) {
            a.validate();
        }
        if (!(threshold >= 0.0 && threshold <= 1.0)) {
            throw ConfigError("decision threshold must lie in [0,1]");
        }
    }
};

struct AlgorithmResult {
    ml::ClassifierSpec spec;
    ClassificationReport report;
    ThetaEstimate theta;
};

struct SplitOutcome {
    features::SplitSpec split;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<AlgorithmResult> results;  // in configured algorithm order

    /// Unweighted mean of the per-algorithm θ values.
    double headline_theta() const {
        double acc = 0.0;
        for (const auto& r : results) {
            acc += r.theta.value;
        }
        return results.empty() ? 0.0 : acc / static_cast<double>(results.size());
    }
};

/// Trains and scores every configured algorithm on every split of `ds`.
inline std::vector<SplitOutcome> run_on_dataset(const features::WindowDataset& ds,
                                                const SuiteConfig& cfg) {
    std::vector<SplitOutcome> out;
    for (const auto& split : cfg.splits) {
        const auto parts = with_context("split " + split.name,
                                        [&] { return features::split_by_date(ds, split); });
        SplitOutcome so;
        so.split = split;
        so.train_size = parts.train.size();
        so.test_size = parts.test.size();
        for (const auto& spec : cfg.algorithms) {
            const std::string ctx = "split " + split.name + ", " + ml::to_string(spec.kind);
            so.results.push_back(with_context(ctx, [&] {
                const auto model = ml::fit(spec, parts.train.rows, parts.train.labels);
                const auto proba = model.predict_proba(parts.test.rows);
                std::vector<int> pred(proba.size());
                for (std::size_t i = 0; i < proba.size(); ++i) {
                    pred[i] = proba[i] >= cfg.threshold ? 1 : 0;
                }
                return AlgorithmResult{spec, classification_report(parts.test.labels, pred),
                                       estimate_theta(proba, cfg.theta_method)};
            }));
        }
        out.push_back(std::move(so));
    }
    return out;
}

/// Fuzzify, build windows and run every split and algorithm.
inline std::vector<SplitOutcome> run_experiment_suite(const ingest::PriceSeries& series,
                                                      const SuiteConfig& cfg) {
    cfg.validate();
    const auto fz = features::build_fuzzy_series(series, fuzzy::OptimismWeight{cfg.lambda_f},
                                                 cfg.bar_policy);
    const auto fs = features::build_features(fz, cfg.jump_threshold, cfg.window);
    return run_on_dataset(fs.dataset, cfg);
}

// ---- output ----------------------------------------------------------------

namespace detail {
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
}  // namespace detail

/// One row per metric in the published table order; one column per algorithm
/// letter (A = logistic ... F = lstm_bn).
inline void write_report_csv(std::ostream& out, const SplitOutcome& so) {
    out << "metric";
    for (const auto& r : so.results) {
        out << ',' << ml::column_letter(r.spec.kind);
    }
    out << '\n';
    for (int c = 0; c < 2; ++c) {
        const std::string suffix = "_" + std::to_string(c);
        const auto row = [&](const std::string& name, auto get) {
            out << name << suffix;
            for (const auto& r : so.results) {
                out << ',' << get(r.report[c]);
            }
            out << '\n';
        };
        row("precision", [](const ClassMetrics& m) { return detail::fmt(m.precision); });
        row("recall", [](const ClassMetrics& m) { return detail::fmt(m.recall); });
        row("f1", [](const ClassMetrics& m) { return detail::fmt(m.f1); });
        row("support", [](const ClassMetrics& m) { return std::to_string(m.support); });
    }
}

inline nlohmann::json summary_json(const std::vector<SplitOutcome>& outcomes) {
    using nlohmann::json;
    json splits = json::array();
    double total = 0.0;
    for (const auto& so : outcomes) {
        json algs = json::array();
        for (const auto& r : so.results) {
            json undefined = json::array();
            for (int c = 0; c < 2; ++c) {
                if (r.report[c].precision_undefined) {
                    undefined.push_back("precision_" + std::to_string(c));
                }
                if (r.report[c].recall_undefined) {
                    undefined.push_back("recall_" + std::to_string(c));
                }
            }
            algs.push_back({{"algorithm", ml::to_string(r.spec.kind)},
                            {"column", std::string(1, ml::column_letter(r.spec.kind))},
                            {"theta", r.theta.value},
                            {"theta_method", to_string(r.theta.method)},
                            {"undefined_metrics", undefined}});
        }
        const double headline = so.headline_theta();
        total += headline;
        splits.push_back({{"split", so.split.name},
                          {"train", so.split.train_start.str() + ".." + so.split.train_end.str()},
                          {"test", so.split.test_start.str() + ".." + so.split.test_end.str()},
                          {"train_size", so.train_size},
                          {"test_size", so.test_size},
                          {"theta", headline},
                          {"algorithms", algs}});
    }
    return {{"theta", outcomes.empty() ? 0.0 : total / static_cast<double>(outcomes.size())},
            {"splits", splits}};
}

}  // namespace bnsfuzzy::eval
