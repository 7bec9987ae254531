#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::ml {

enum class Kind { logistic, tree, forest, mlp, lstm, lstm_bn };

inline constexpr Kind kAllKinds[] = {Kind::logistic, Kind::tree, Kind::forest,
                                     Kind::mlp,      Kind::lstm, Kind::lstm_bn};

inline const char* to_string(Kind k) {
    switch (k) {
        case Kind::logistic: return "logistic";
        case Kind::tree: return "tree";
        case Kind::forest: return "forest";
        case Kind::mlp: return "mlp";
        case Kind::lstm: return "lstm";
        case Kind::lstm_bn: return "lstm_bn";
    }
    return "?";
}

/// Column letter used in the report tables: logistic=A ... lstm_bn=F.
inline char column_letter(Kind k) { return static_cast<char>('A' + static_cast<int>(k)); }

inline std::optional<Kind> parse_kind(std::string_view s) {
    for (Kind k : kAllKinds) {
        if (s == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

using Hyper = std::map<std::string, double>;

/// Defaults per kind. `standardize` and `class_weight` are 0/1 flags.
inline Hyper default_hyper(Kind k) {
    switch (k) {
        case Kind::logistic:
            return {{"step", 0.1}, {"epochs", 500}, {"l2", 1e-4},
                    {"standardize", 1}, {"class_weight", 0}};
        case Kind::tree:
            return {{"max_depth", 6}, {"min_leaf", 5}, {"standardize", 0}, {"class_weight", 0}};
        case Kind::forest:
            return {{"trees", 100},   {"max_depth", 0},   {"min_leaf", 1},
                    {"bootstrap", 1}, {"max_features", 3}, {"standardize", 1},
                    {"class_weight", 0}};
        case Kind::mlp:
            return {{"hidden1", 16}, {"hidden2", 8},     {"step", 0.01},
                    {"epochs", 300}, {"batch", 32},      {"standardize", 1},
                    {"class_weight", 0}};
        case Kind::lstm:
            return {{"hidden", 16}, {"step", 0.01},      {"epochs", 60},
                    {"batch", 32},  {"standardize", 1},  {"class_weight", 0}};
        case Kind::lstm_bn:
            return {{"hidden", 16},      {"step", 0.01},       {"epochs", 60},
                    {"batch", 32},       {"bn_eps", 1e-5},     {"bn_momentum", 0.9},
                    {"standardize", 1},  {"class_weight", 0}};
    }
    return {};
}

struct ClassifierSpec {
    Kind kind = Kind::logistic;
    Hyper hyper{};  // overrides on top of default_hyper(kind)
    std::uint64_t seed = 0;

    static ClassifierSpec with_defaults(Kind k, std::uint64_t seed = 0) {
        return {k, default_hyper(k), seed};
    }

    /// Value of `key`, falling back to the kind's default.
    double get(const std::string& key) const {
        if (auto it = hyper.find(key); it != hyper.end()) {
            return it->second;
        }
        const auto defaults = default_hyper(kind);
        if (auto it = defaults.find(key); it != defaults.end()) {
            return it->second;
        }
        throw ConfigError(std::string("hyperparameter '") + key + "' does not apply to " +
                          to_string(kind));
    }
    int get_int(const std::string& key) const { return static_cast<int>(std::lround(get(key))); }
    bool get_flag(const std::string& key) const { return get(key) != 0.0; }

    /// Full parameter map with defaults filled in.
    Hyper resolved() const {
        Hyper out = default_hyper(kind);
        for (const auto& [k, v] : hyper) {
            out[k] = v;
        }
        return out;
    }

    void validate() const {
        const auto defaults = default_hyper(kind);
        for (const auto& [key, value] : hyper) {
            if (!defaults.contains(key)) {
                throw ConfigError("unknown hyperparameter '" + key + "' for " + to_string(kind));
            }
            if (!std::isfinite(value)) {
                throw ConfigError("hyperparameter '" + key + "' must be finite");
            }
        }
        auto require = [&](const char* key, bool ok, const char* what) {
            if (!ok) {
                throw ConfigError(std::string(to_string(kind)) + "." + key + " " + what +
                                  ", got " + std::to_string(get(key)));
            }
        };
        auto integral = [&](const char* key) {
            return get(key) == std::floor(get(key));
        };
        for (const char* flag : {"standardize", "class_weight", "bootstrap"}) {
            if (defaults.contains(flag)) {
                require(flag, get(flag) == 0.0 || get(flag) == 1.0, "must be 0 or 1");
            }
        }
        switch (kind) {
            case Kind::logistic:
                require("step", get("step") > 0.0, "must be > 0");
                require("epochs", integral("epochs") && get("epochs") >= 1, "must be an integer >= 1");
                require("l2", get("l2") >= 0.0, "must be >= 0");
                break;
            case Kind::forest:
                require("trees", integral("trees") && get("trees") >= 1, "must be an integer >= 1");
                require("max_features", integral("max_features") && get("max_features") >= 1,
                        "must be an integer >= 1");
                [[fallthrough]];
            case Kind::tree:
                require("max_depth", integral("max_depth") && get("max_depth") >= 0,
                        "must be an integer >= 0 (0 = unlimited)");
                require("min_leaf", integral("min_leaf") && get("min_leaf") >= 1,
                        "must be an integer >= 1");
                break;
            case Kind::mlp:
                require("hidden1", integral("hidden1") && get("hidden1") >= 1, "must be an integer >= 1");
                require("hidden2", integral("hidden2") && get("hidden2") >= 1, "must be an integer >= 1");
                [[fallthrough]];
            case Kind::lstm:
            case Kind::lstm_bn:
                if (kind != Kind::mlp) {
                    require("hidden", integral("hidden") && get("hidden") >= 1, "must be an integer >= 1");
                }
                require("step", get("step") > 0.0, "must be > 0");
                require("epochs", integral("epochs") && get("epochs") >= 1, "must be an integer >= 1");
                require("batch", integral("batch") && get("batch") >= 1, "must be an integer >= 1");
                if (kind == Kind::lstm_bn) {
                    require("bn_eps", get("bn_eps") > 0.0, "must be > 0");
                    require("bn_momentum", get("bn_momentum") >= 0.0 && get("bn_momentum") < 1.0,
                            "must lie in [0,1)");
                }
                break;
        }
    }
};

}  // namespace bnsfuzzy::ml
