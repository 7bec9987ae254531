#pragma once

/// Run configuration: flat `section.key = value` text.
///
/// Grammar, one entry per line:
///   - blank lines and lines starting with `#` are ignored;
///   - `key = value`, whitespace around key and value trimmed;
///   - keys are dotted, the first component names the section;
///   - a key may appear once; unknown keys are errors.
///
/// Lists are comma separated. `split.<name> = train_start,train_end,test_start,test_end`
/// entries replace the built-in split table when any is given, in file order.
/// `ml.<kind>.<param>` overrides a classifier hyperparameter.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bnsfuzzy/bns.hpp"
#include "bnsfuzzy/date.hpp"
#include "bnsfuzzy/error.hpp"
#include "bnsfuzzy/eval.hpp"
#include "bnsfuzzy/features.hpp"
#include "bnsfuzzy/ingest.hpp"
#include "bnsfuzzy/ml/spec.hpp"

namespace bnsfuzzy::cli {

struct SimulateConfig {
    bns::BnsParams params = default_params();
    double s0 = 100.0;
    double sigma2_0 = 0.0;  // 0 = each model's stationary mean
    double horizon = 20.0;
    double dt = 1.0 / 252.0;
    double corr_s = 5.0;
    int corr_points = 60;

    static bns::BnsParams default_params() {
        bns::BnsParams p;
        p.mu = 0.0;
        p.beta = 0.0;
        p.rho = -1.0;
        p.lam = 1.0;
        p.rho_prime = 1.0;
        p.theta = 0.5;
        p.theta_prime = 0.5;
        p.z = {20.0, 1.0};
        p.z_b = {200.0, 1.5};
        return p;
    }
};

struct PlotConfig {
    std::vector<int> ma_windows{5, 42, 252};
    int bins = 50;
    bool svg = true;
};

struct RunConfig {
    std::string data;  // CSV path or http(s) URL
    std::string out = "out";
    std::uint64_t seed = 42;
    bool clamp_close = false;
    bool use_adj_close = false;
    double lambda_f = 0.5;
    double jump_threshold = 1.0;
    features::WindowParams window{};
    int vol_window = 21;
    std::vector<features::SplitSpec> splits = eval::default_splits();
    std::vector<ml::Kind> algorithms{std::begin(ml::kAllKinds), std::end(ml::kAllKinds)};
    std::map<ml::Kind, ml::Hyper> hyper;  // overrides per kind
    eval::ThetaMethod theta_method = eval::ThetaMethod::mean_proba;
    double threshold = 0.5;
    std::string train_split = "10y";
    SimulateConfig simulate{};
    PlotConfig plot{};

    ml::ClassifierSpec spec(ml::Kind k) const {
        ml::ClassifierSpec s = ml::ClassifierSpec::with_defaults(k, seed);
        if (auto it = hyper.find(k); it != hyper.end()) {
            for (const auto& [key, v] : it->second) {
                s.hyper[key] = v;
            }
        }
        return s;
    }

    eval::SuiteConfig suite() const {
        eval::SuiteConfig s;
        s.lambda_f = lambda_f;
        s.jump_threshold = jump_threshold;
        s.window = window;
        s.bar_policy = clamp_close ? fuzzy::BarPolicy::clamp_close : fuzzy::BarPolicy::reject;
        s.splits = splits;
        s.algorithms.clear();
        for (ml::Kind k : algorithms) {
            s.algorithms.push_back(spec(k));
        }
        s.theta_method = theta_method;
        s.threshold = threshold;
        return s;
    }

    const features::SplitSpec& find_split(const std::string& name) const {
        for (const auto& s : splits) {
            if (s.name == name) {
                return s;
            }
        }
        throw ConfigError("no split named '" + name + "'");
    }

    /// Checks every field; returns simulator warnings.
    std::vector<std::string> validate() const {
        suite().validate();
        for (ml::Kind k : ml::kAllKinds) {
            spec(k).validate();
        }
        std::set<std::string> names;
        for (const auto& s : splits) {
            if (s.name.empty() || !names.insert(s.name).second) {
                throw ConfigError("split names must be nonempty and unique ('" + s.name + "')");
            }
        }
        std::set<ml::Kind> seen;
        for (ml::Kind k : algorithms) {
            if (!seen.insert(k).second) {
                throw ConfigError(std::string("algorithm listed twice: ") + ml::to_string(k));
            }
        }
        if (vol_window < 2) {
            throw ConfigError("features.vol_window must be >= 2");
        }
        if (plot.bins < 1) {
            throw ConfigError("plot.bins must be >= 1");
        }
        for (int w : plot.ma_windows) {
            if (w < 1) {
                throw ConfigError("plot.ma_windows entries must be >= 1");
            }
        }
        const auto& sim = simulate;
        auto warnings = sim.params.validate();
        if (!(sim.s0 > 0.0)) {
            throw ConfigError("simulate.s0 must be > 0");
        }
        if (!(sim.sigma2_0 >= 0.0)) {
            throw ConfigError("simulate.sigma2_0 must be >= 0 (0 = stationary mean)");
        }
        if (!(sim.dt > 0.0) || !(sim.horizon > 0.0)) {
            throw ConfigError("simulate.dt and simulate.horizon must be > 0");
        }
        if (!(sim.corr_s > 0.0 && sim.corr_s < sim.horizon)) {
            throw ConfigError("simulate.corr_s must lie in (0, horizon)");
        }
        if (sim.corr_points < 1) {
            throw ConfigError("simulate.corr_points must be >= 1");
        }
        if (sim.params.lam * sim.dt >= 1.0) {
            throw StabilityError("simulate.lam * simulate.dt must be < 1");
        }
        return warnings;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (trim(s).empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.emplace_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline double parse_double(const std::string& key, std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(key + ": expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

inline long long parse_int(const std::string& key, std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ConfigError(key + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& key, std::string_view s) {
    if (s == "1" || s == "true") {
        return true;
    }
    if (s == "0" || s == "false") {
        return false;
    }
    throw ConfigError(key + ": expected 0/1 or true/false, got '" + std::string(s) + "'");
}

inline Date parse_date(const std::string& key, std::string_view s) {
    auto d = Date::parse(s);
    if (!d) {
        throw ConfigError(key + ": expected YYYY-MM-DD, got '" + std::string(s) + "'");
    }
    return *d;
}

/// Scalar keys: name, writer, reader. Order is the order of the resolved file.
struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string& key, std::string_view)> set;
};

inline Field real(const char* key, double RunConfig::*m) {
    return {key, [m](const RunConfig& c) { return format_double(c.*m); },
            [m](RunConfig& c, const std::string& k, std::string_view v) { c.*m = parse_double(k, v); }};
}

template <class Get>
inline Field real_at(const char* key, Get ref) {
    return {key, [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
            [ref](RunConfig& c, const std::string& k, std::string_view v) { ref(c) = parse_double(k, v); }};
}

template <class Get>
inline Field integer_at(const char* key, Get ref) {
    return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
            [ref](RunConfig& c, const std::string& k, std::string_view v) {
                const auto n = parse_int(k, v);
                if (n < -1'000'000'000LL || n > 1'000'000'000LL) {
                    throw ConfigError(k + ": integer out of range");
                }
                ref(c) = static_cast<int>(n);
            }};
}

template <class Get>
inline Field flag_at(const char* key, Get ref) {
    return {key, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "1" : "0"); },
            [ref](RunConfig& c, const std::string& k, std::string_view v) { ref(c) = parse_bool(k, v); }};
}

inline const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"data.source", [](const RunConfig& c) { return c.data; },
                     [](RunConfig& c, const std::string&, std::string_view v) { c.data = v; }});
        f.push_back(flag_at("data.clamp_close", [](RunConfig& c) -> bool& { return c.clamp_close; }));
        f.push_back(flag_at("data.use_adj_close", [](RunConfig& c) -> bool& { return c.use_adj_close; }));
        f.push_back({"run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         std::uint64_t s = 0;
                         auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                         if (ec != std::errc{} || p != v.data() + v.size()) {
                             throw ConfigError(k + ": expected a nonnegative integer");
                         }
                         c.seed = s;
                     }});
        f.push_back(real("fuzzy.lambda_f", &RunConfig::lambda_f));
        f.push_back(real("features.jump_threshold", &RunConfig::jump_threshold));
        f.push_back(integer_at("features.window", [](RunConfig& c) -> int& { return c.window.window; }));
        f.push_back(integer_at("features.lookahead", [](RunConfig& c) -> int& { return c.window.lookahead; }));
        f.push_back(integer_at("features.min_jumps", [](RunConfig& c) -> int& { return c.window.min_jumps; }));
        f.push_back(integer_at("features.vol_window", [](RunConfig& c) -> int& { return c.vol_window; }));
        f.push_back({"eval.algorithms",
                     [](const RunConfig& c) {
                         std::string s;
                         for (ml::Kind k : c.algorithms) {
                             s += (s.empty() ? "" : ",") + std::string(ml::to_string(k));
                         }
                         return s;
                     },
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.algorithms.clear();
                         for (const auto& name : split_list(v)) {
                             auto kind = ml::parse_kind(name);
                             if (!kind) {
                                 throw ConfigError(k + ": unknown algorithm '" + name + "'");
                             }
                             c.algorithms.push_back(*kind);
                         }
                     }});
        f.push_back({"eval.theta_method",
                     [](const RunConfig& c) { return std::string(eval::to_string(c.theta_method)); },
                     [](RunConfig& c, const std::string&, std::string_view v) {
                         c.theta_method = eval::parse_theta_method(std::string(v));
                     }});
        f.push_back(real("eval.threshold", &RunConfig::threshold));
        f.push_back({"eval.train_split", [](const RunConfig& c) { return c.train_split; },
                     [](RunConfig& c, const std::string&, std::string_view v) { c.train_split = v; }});
        using P = bns::BnsParams;
        auto sim = [](double P::*m) {
            return [m](RunConfig& c) -> double& { return c.simulate.params.*m; };
        };
        f.push_back(real_at("simulate.mu", sim(&P::mu)));
        f.push_back(real_at("simulate.beta", sim(&P::beta)));
        f.push_back(real_at("simulate.rho", sim(&P::rho)));
        f.push_back(real_at("simulate.lam", sim(&P::lam)));
        f.push_back(real_at("simulate.rho_prime", sim(&P::rho_prime)));
        f.push_back(real_at("simulate.theta", sim(&P::theta)));
        f.push_back(real_at("simulate.theta_prime", sim(&P::theta_prime)));
        f.push_back(real_at("simulate.z_rate", [](RunConfig& c) -> double& { return c.simulate.params.z.jump_rate; }));
        f.push_back(real_at("simulate.z_scale", [](RunConfig& c) -> double& { return c.simulate.params.z.jump_scale; }));
        f.push_back(real_at("simulate.zb_rate", [](RunConfig& c) -> double& { return c.simulate.params.z_b.jump_rate; }));
        f.push_back(real_at("simulate.zb_scale", [](RunConfig& c) -> double& { return c.simulate.params.z_b.jump_scale; }));
        f.push_back(real_at("simulate.s0", [](RunConfig& c) -> double& { return c.simulate.s0; }));
        f.push_back(real_at("simulate.sigma2_0", [](RunConfig& c) -> double& { return c.simulate.sigma2_0; }));
        f.push_back(real_at("simulate.horizon", [](RunConfig& c) -> double& { return c.simulate.horizon; }));
        f.push_back(real_at("simulate.dt", [](RunConfig& c) -> double& { return c.simulate.dt; }));
        f.push_back(real_at("simulate.corr_s", [](RunConfig& c) -> double& { return c.simulate.corr_s; }));
        f.push_back(integer_at("simulate.corr_points", [](RunConfig& c) -> int& { return c.simulate.corr_points; }));
        f.push_back({"plot.ma_windows",
                     [](const RunConfig& c) {
                         std::string s;
                         for (int w : c.plot.ma_windows) {
                             s += (s.empty() ? "" : ",") + std::to_string(w);
                         }
                         return s;
                     },
                     [](RunConfig& c, const std::string& k, std::string_view v) {
                         c.plot.ma_windows.clear();
                         for (const auto& w : split_list(v)) {
                             c.plot.ma_windows.push_back(static_cast<int>(parse_int(k, w)));
                         }
                     }});
        f.push_back(integer_at("plot.bins", [](RunConfig& c) -> int& { return c.plot.bins; }));
        f.push_back(flag_at("plot.svg", [](RunConfig& c) -> bool& { return c.plot.svg; }));
        return f;
    }();
    return table;
}

}  // namespace detail

/// Applies one `key = value` entry.
inline void set_value(RunConfig& cfg, const std::string& key, std::string_view value,
                      bool& splits_replaced) {
    for (const auto& f : detail::fields()) {
        if (key == f.key) {
            f.set(cfg, key, value);
            return;
        }
    }
    if (key.starts_with("split.")) {
        const std::string name = key.substr(6);
        const auto parts = detail::split_list(value);
        if (name.empty() || parts.size() != 4) {
            throw ConfigError(key + ": expected train_start,train_end,test_start,test_end");
        }
        if (!splits_replaced) {
            cfg.splits.clear();
            splits_replaced = true;
        }
        cfg.splits.push_back({name, detail::parse_date(key, parts[0]), detail::parse_date(key, parts[1]),
                              detail::parse_date(key, parts[2]), detail::parse_date(key, parts[3])});
        return;
    }
    if (key.starts_with("ml.")) {
        const auto dot = key.find('.', 3);
        if (dot != std::string::npos) {
            const auto kind = ml::parse_kind(key.substr(3, dot - 3));
            const std::string param = key.substr(dot + 1);
            if (kind && ml::default_hyper(*kind).contains(param)) {
                cfg.hyper[*kind][param] = detail::parse_double(key, value);
                return;
            }
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

/// Reads config text on top of `base` (defaults when omitted).
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    bool splits_replaced = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key(detail::trim(t.substr(0, eq)));
        const auto value = detail::trim(t.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        try {
            set_value(base, key, value, splits_replaced);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_config(in, std::move(base));
}

/// Every setting, hyperparameters fully resolved. The output directory is not
/// written: it locates a run rather than defining it.
inline void write_config(std::ostream& out, const RunConfig& cfg) {
    std::string section;
    for (const auto& f : detail::fields()) {
        const std::string key = f.key;
        const std::string sec = key.substr(0, key.find('.'));
        if (sec != section) {
            out << (section.empty() ? "" : "\n") << "# " << sec << '\n';
            section = sec;
        }
        out << key << " = " << f.get(cfg) << '\n';
    }
    out << "\n# split\n";
    for (const auto& s : cfg.splits) {
        out << "split." << s.name << " = " << s.train_start.str() << ',' << s.train_end.str() << ','
            << s.test_start.str() << ',' << s.test_end.str() << '\n';
    }
    out << "\n# ml\n";
    for (ml::Kind k : ml::kAllKinds) {
        for (const auto& [key, v] : cfg.spec(k).resolved()) {
            out << "ml." << ml::to_string(k) << '.' << key << " = " << detail::format_double(v) << '\n';
        }
    }
}

inline std::string config_text(const RunConfig& cfg) {
    std::ostringstream s;
    write_config(s, cfg);
    return s.str();
}

}  // namespace bnsfuzzy::cli
