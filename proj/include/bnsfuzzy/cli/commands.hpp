#pragma once

/// The seven commands. Each reads a validated RunConfig and writes under an
/// OutputDir; none touches its inputs.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bnsfuzzy/bns.hpp"
#include "bnsfuzzy/cli/config.hpp"
#include "bnsfuzzy/cli/fetch.hpp"
#include "bnsfuzzy/cli/output.hpp"
#include "bnsfuzzy/cli/plotdata.hpp"
#include "bnsfuzzy/eval.hpp"
#include "bnsfuzzy/features.hpp"
#include "bnsfuzzy/fuzzy.hpp"
#include "bnsfuzzy/ingest.hpp"
#include "bnsfuzzy/ml.hpp"

namespace bnsfuzzy::cli {

struct Context {
    const RunConfig& cfg;
    OutputDir& out;
    std::ostream& log;
    std::string models_dir;  // evaluate: where trained models are read from
};

/// Loads and cleans the configured OHLC source. A URL source is saved as
/// `input.csv` in the output directory.
inline ingest::PriceSeries load_series(Context& ctx) {
    const auto& src = ctx.cfg.data;
    if (src.empty()) {
        throw ConfigError("no data source: set data.source in the config or pass --data");
    }
    ingest::LoadResult lr;
    if (is_url(src)) {
        const std::string body = fetch_url(src);
        ctx.out.write("input.csv", body);
        std::istringstream in(body);
        lr = ingest::load_ohlc_csv(in);
    } else {
        lr = ingest::load_ohlc_file(src);
    }
    for (const auto& e : lr.errors) {
        ctx.log << "warning: " << src << ":" << e.line << ": " << e.message << '\n';
    }
    const auto cleaned = ingest::clean(lr.series, {ctx.cfg.clamp_close, ctx.cfg.use_adj_close});
    const auto& s = cleaned.summary;
    ctx.log << "loaded " << lr.rows_read << " rows, kept " << cleaned.series.size() << " (missing "
            << s.dropped_missing << ", nonpositive " << s.dropped_nonpositive << ", duplicate "
            << s.duplicates_removed << ", malformed " << s.dropped_malformed << ", clamped "
            << s.clamped << ")\n";
    return cleaned.series;
}

inline fuzzy::BarPolicy bar_policy(const RunConfig& cfg) {
    return cfg.clamp_close ? fuzzy::BarPolicy::clamp_close : fuzzy::BarPolicy::reject;
}

inline features::FuzzySeries fuzzy_series(const RunConfig& cfg, const ingest::PriceSeries& s) {
    return features::build_fuzzy_series(s, fuzzy::OptimismWeight{cfg.lambda_f}, bar_policy(cfg));
}

inline void write_fuzzy_csv(Context& ctx, const ingest::PriceSeries& series) {
    const fuzzy::OptimismWeight w{ctx.cfg.lambda_f};
    ctx.out.write("fuzzy.csv", [&](std::ostream& o) {
        o << "date,s_l,s_m,s_u,expectation\n";
        for (const auto& bar : series.bars) {
            const auto a = fuzzy::fuzzify_bar(bar.low, bar.close, bar.high, bar_policy(ctx.cfg));
            o << bar.date.str() << ',' << fmt_num(a.left()) << ',' << fmt_num(a.kernel()) << ','
              << fmt_num(a.right()) << ',' << fmt_num(fuzzy::fuzzy_expectation(a, w)) << '\n';
        }
    });
}

inline void cmd_fuzzify(Context& ctx) {
    const auto series = load_series(ctx);
    write_fuzzy_csv(ctx, series);
}

inline void cmd_plotdata(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(ctx);
    const auto fz = fuzzy_series(cfg, series);
    auto& out = ctx.out;

    std::vector<int> windows;
    std::vector<std::vector<std::optional<double>>> mas;
    for (int w : cfg.plot.ma_windows) {
        if (static_cast<std::size_t>(w) > fz.size()) {
            ctx.log << "warning: " << w << "-day moving average omitted (only " << fz.size()
                    << " observations)\n";
            continue;
        }
        windows.push_back(w);
        mas.push_back(moving_average(fz.values, w));
    }
    out.write("plotdata/moving_averages.csv", [&](std::ostream& o) {
        o << "date,price";
        for (int w : windows) {
            o << ",ma" << w;
        }
        o << '\n';
        for (std::size_t k = 0; k < fz.size(); ++k) {
            o << fz.dates[k].str() << ',' << fmt_num(fz.values[k]);
            for (const auto& ma : mas) {
                o << ',' << (ma[k] ? fmt_num(*ma[k]) : "");
            }
            o << '\n';
        }
    });

    std::map<int, std::vector<double>> by_year;
    for (std::size_t k = 0; k < fz.size(); ++k) {
        by_year[fz.dates[k].year()].push_back(fz.values[k]);
    }
    out.write("plotdata/yearly_box.csv", [&](std::ostream& o) {
        o << "year,min,q1,median,q3,max,count\n";
        for (const auto& [year, v] : by_year) {
            const auto b = box_stats(v);
            o << year << ',' << fmt_num(b.min) << ',' << fmt_num(b.q1) << ',' << fmt_num(b.median)
              << ',' << fmt_num(b.q3) << ',' << fmt_num(b.max) << ',' << b.count << '\n';
        }
    });
    out.write("plotdata/histogram_price.csv",
              [&](std::ostream& o) { write_histogram_csv(o, histogram(fz.values, cfg.plot.bins)); });

    if (fz.size() < 2) {
        ctx.log << "warning: fewer than two observations; change, monthly and volatility series omitted\n";
        return;
    }
    const auto ch = features::daily_changes(fz.values);
    const std::vector<Date> change_dates(fz.dates.begin() + 1, fz.dates.end());
    out.write("plotdata/histogram_change.csv",
              [&](std::ostream& o) { write_histogram_csv(o, histogram(ch.changes, cfg.plot.bins)); });
    out.write("plotdata/histogram_change_pct.csv", [&](std::ostream& o) {
        write_histogram_csv(o, histogram(ch.change_pcts, cfg.plot.bins));
    });

    // monthly: mean price, first-to-last price change, trading days
    struct Month {
        double sum = 0.0;
        double first = 0.0;
        double last = 0.0;
        std::size_t n = 0;
    };
    std::map<std::pair<int, unsigned>, Month> months;
    for (std::size_t k = 0; k < fz.size(); ++k) {
        auto& m = months[{fz.dates[k].year(), fz.dates[k].month()}];
        if (m.n == 0) {
            m.first = fz.values[k];
        }
        m.last = fz.values[k];
        m.sum += fz.values[k];
        ++m.n;
    }
    out.write("plotdata/monthly.csv", [&](std::ostream& o) {
        o << "year,month,mean_price,change,trading_days\n";
        for (const auto& [key, m] : months) {
            o << key.first << ',' << key.second << ',' << fmt_num(m.sum / static_cast<double>(m.n))
              << ',' << fmt_num(m.last - m.first) << ',' << m.n << '\n';
        }
    });

    const auto w = static_cast<std::size_t>(cfg.vol_window);
    if (ch.change_pcts.size() < w + 1) {
        ctx.log << "warning: realized volatility omitted (window " << w << " exceeds "
                << ch.change_pcts.size() << " changes)\n";
        return;
    }
    const auto vol = features::realized_volatility(ch.change_pcts, w);
    const auto ret = features::realized_volatility_return(vol);
    std::vector<Date> vol_dates(change_dates.begin() + static_cast<long>(w - 1), change_dates.end());
    std::vector<double> ret_padded{std::nan("")};
    ret_padded.insert(ret_padded.end(), ret.begin(), ret.end());
    out.write("plotdata/realized_volatility.csv", [&](std::ostream& o) {
        o << "date,volatility,volatility_return\n";
        for (std::size_t k = 0; k < vol.size(); ++k) {
            o << vol_dates[k].str() << ',' << fmt_num(vol[k]) << ',' << fmt_num(ret_padded[k]) << '\n';
        }
    });
    out.write("plotdata/heatmap_volatility.csv",
              [&](std::ostream& o) { write_heatmap_csv(o, monthly_mean(vol_dates, vol)); });
    out.write("plotdata/heatmap_volatility_return.csv",
              [&](std::ostream& o) { write_heatmap_csv(o, monthly_mean(vol_dates, ret_padded)); });
    if (cfg.plot.svg) {
        out.write("plotdata/realized_volatility.svg", [&](std::ostream& o) {
            write_svg_line(o, "Realized volatility (annualized, %)", vol_dates, vol);
        });
        out.write("plotdata/realized_volatility_return.svg", [&](std::ostream& o) {
            write_svg_line(o, "Realized volatility return (%)", vol_dates, ret_padded);
        });
    }
}

/// Matched-seed classical, generalized and refined paths plus Corr(X_t, X_s)
/// for fixed s on a grid of t under both formulas.
inline void cmd_simulate(Context& ctx) {
    const auto& sc = ctx.cfg.simulate;
    const auto& p = sc.params;
    std::vector<bns::SimPath> paths;
    for (auto m : {bns::Model::classical, bns::Model::generalized, bns::Model::refined}) {
        const double v0 = sc.sigma2_0 > 0.0 ? sc.sigma2_0 : bns::stationary_variance(m, p);
        paths.push_back(bns::simulate(m, p, sc.s0, v0, sc.horizon, sc.dt, ctx.cfg.seed));
        ctx.out.write(std::string("simulate/") + bns::to_string(m) + ".csv",
                      [&](std::ostream& o) { bns::write_path_csv(o, paths.back()); });
    }
    const auto& classical = paths[0];
    const auto& refined = paths[2];
    const std::size_t is = classical.index_of(sc.corr_s);
    const std::size_t n = classical.steps();
    ctx.out.write("simulate/correlation.csv", [&](std::ostream& o) {
        o << "t,classical,refined\n";
        std::size_t prev = is;
        for (int k = 1; k <= sc.corr_points; ++k) {
            const std::size_t it =
                is + static_cast<std::size_t>(std::llround(static_cast<double>(k) *
                                                            static_cast<double>(n - is) /
                                                            sc.corr_points));
            if (it == prev) {
                continue;
            }
            prev = it;
            const double t = classical.times[it];
            char buf[96];
            std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g\n", t,
                          bns::correlation_classical(classical, t, sc.corr_s, p),
                          bns::correlation_refined(refined, t, sc.corr_s, p));
            o << buf;
        }
    });
}

inline features::FeatureSet build_feature_set(Context& ctx, const ingest::PriceSeries& series) {
    return features::build_features(fuzzy_series(ctx.cfg, series), ctx.cfg.jump_threshold,
                                    ctx.cfg.window);
}

inline void write_feature_csvs(Context& ctx, const features::FeatureSet& fs) {
    ctx.out.write("features/changes.csv", [&](std::ostream& o) {
        o << "date,price,change,change_pct,big_jump\n";
        for (std::size_t k = 0; k < fs.change_dates.size(); ++k) {
            o << fs.change_dates[k].str() << ',' << fmt_num(fs.fuzzy.values[k + 1]) << ','
              << fmt_num(fs.changes.changes[k]) << ',' << fmt_num(fs.changes.change_pcts[k]) << ','
              << (fs.jumps[k] ? 1 : 0) << '\n';
        }
    });
    ctx.out.write("features/windows.csv",
                  [&](std::ostream& o) { features::write_window_csv(o, fs.dataset); });
}

inline void cmd_features(Context& ctx) {
    const auto series = load_series(ctx);
    const auto fs = build_feature_set(ctx, series);
    write_feature_csvs(ctx, fs);
    ctx.log << fs.dataset.size() << " windows, " << fs.dataset.positives() << " labeled 1\n";
}

inline features::SplitResult training_split(Context& ctx) {
    const auto series = load_series(ctx);
    const auto fs = build_feature_set(ctx, series);
    const auto& split = ctx.cfg.find_split(ctx.cfg.train_split);
    return with_context("split " + split.name, [&] { return features::split_by_date(fs.dataset, split); });
}

/// Fits every configured algorithm on the train side of `eval.train_split`
/// and saves `models/<algorithm>.json`.
inline void cmd_train(Context& ctx) {
    const auto parts = training_split(ctx);
    for (ml::Kind k : ctx.cfg.algorithms) {
        const auto model = with_context(std::string("train ") + ml::to_string(k), [&] {
            return ml::fit(ctx.cfg.spec(k), parts.train.rows, parts.train.labels);
        });
        ctx.out.write(std::string("models/") + ml::to_string(k) + ".json",
                      [&](std::ostream& o) { ml::save_model(o, model); });
        ctx.log << "trained " << ml::to_string(k) << " on " << parts.train.size() << " windows\n";
    }
}

/// Scores saved models on the test side of `eval.train_split`.
inline void cmd_evaluate(Context& ctx) {
    const auto parts = training_split(ctx);
    eval::SplitOutcome so;
    so.split = ctx.cfg.find_split(ctx.cfg.train_split);
    so.train_size = parts.train.size();
    so.test_size = parts.test.size();
    for (ml::Kind k : ctx.cfg.algorithms) {
        const auto path = std::filesystem::path(ctx.models_dir) / (std::string(ml::to_string(k)) + ".json");
        std::ifstream in(path);
        if (!in) {
            throw DataError("cannot open model file '" + path.string() + "' (run `train` first)");
        }
        const auto model = with_context(path.string(), [&] { return ml::load_model(in); });
        if (model.spec.kind != k) {
            throw DataError(path.string() + " holds a " + ml::to_string(model.spec.kind) + " model");
        }
        const auto proba = model.predict_proba(parts.test.rows);
        const auto pred = model.predict(parts.test.rows, ctx.cfg.threshold);
        so.results.push_back({model.spec, eval::classification_report(parts.test.labels, pred),
                              eval::estimate_theta(proba, ctx.cfg.theta_method)});
    }
    ctx.out.write("reports/" + so.split.name + ".csv",
                  [&](std::ostream& o) { eval::write_report_csv(o, so); });
    ctx.out.write("theta_summary.json", eval::summary_json({so}).dump(1) + "\n");
}

/// ingest, fuzzify, features, train and evaluate over every split.
inline void cmd_pipeline(Context& ctx) {
    const auto series = with_context("ingest", [&] { return load_series(ctx); });
    with_context("fuzzify", [&] { write_fuzzy_csv(ctx, series); });
    const auto fs = with_context("features", [&] {
        auto f = build_feature_set(ctx, series);
        write_feature_csvs(ctx, f);
        return f;
    });
    const auto outcomes = with_context("train/evaluate", [&] {
        return eval::run_on_dataset(fs.dataset, ctx.cfg.suite());
    });
    for (const auto& so : outcomes) {
        ctx.out.write("reports/" + so.split.name + ".csv",
                      [&](std::ostream& o) { eval::write_report_csv(o, so); });
    }
    const auto summary = eval::summary_json(outcomes);
    ctx.out.write("theta_summary.json", summary.dump(1) + "\n");
    ctx.log << outcomes.size() * ctx.cfg.algorithms.size() << " reports, headline theta "
            << summary["theta"].get<double>() << '\n';
}

}  // namespace bnsfuzzy::cli
