#pragma once

/// Common fit / predict contract over the six classifier kinds, and the JSON
/// model container.

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bnsfuzzy/ml/common.hpp"
#include "bnsfuzzy/ml/logistic.hpp"
#include "bnsfuzzy/ml/lstm.hpp"
#include "bnsfuzzy/ml/mlp.hpp"
#include "bnsfuzzy/ml/spec.hpp"
#include "bnsfuzzy/ml/tree.hpp"

namespace bnsfuzzy::ml {

using Params = std::variant<LogisticModel, DecisionTree, RandomForest, Mlp, Lstm>;

struct TrainedModel {
    ClassifierSpec spec;
    Index width = 0;
    Standardizer scaler;
    Params params;
    std::vector<double> training_log;  // per-epoch loss, iterative kinds only

    std::vector<double> predict_proba(const Matrix& x) const {
        if (x.cols() != width) {
            throw ShapeError("model expects " + std::to_string(width) + " features, got " +
                             std::to_string(x.cols()));
        }
        const Matrix z = scaler.apply(x);
        return std::visit([&](const auto& m) { return m.predict_proba(z); }, params);
    }

    /// Label 1 iff probability >= threshold.
    std::vector<int> predict(const Matrix& x, double threshold = 0.5) const {
        if (!(threshold >= 0.0 && threshold <= 1.0)) {
            throw ConfigError("threshold must lie in [0,1], got " + std::to_string(threshold));
        }
        const auto p = predict_proba(x);
        std::vector<int> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            out[i] = p[i] >= threshold ? 1 : 0;
        }
        return out;
    }
};

namespace detail {

inline bool iterative(Kind k) {
    return k == Kind::logistic || k == Kind::mlp || k == Kind::lstm || k == Kind::lstm_bn;
}

inline TreeParams tree_params(const ClassifierSpec& s) {
    TreeParams p;
    p.max_depth = s.get_int("max_depth");
    p.min_leaf = s.get_int("min_leaf");
    p.max_features = 0;
    return p;
}

inline ForestParams forest_params(const ClassifierSpec& s) {
    ForestParams p;
    p.trees = s.get_int("trees");
    p.bootstrap = s.get_flag("bootstrap");
    p.tree = tree_params(s);
    p.tree.max_features = s.get_int("max_features");
    return p;
}

/// Builds a network of the spec's architecture, ready for training.
inline Params init_net(const ClassifierSpec& s, Index width) {
    switch (s.kind) {
        case Kind::mlp:
            return Mlp::init(width, s.get_int("hidden1"), s.get_int("hidden2"), s.seed);
        case Kind::lstm:
            return Lstm::init(s.get_int("hidden"), width, false, s.seed);
        case Kind::lstm_bn:
            return Lstm::init(s.get_int("hidden"), width, true, s.seed, s.get("bn_eps"),
                              s.get("bn_momentum"));
        default:
            throw ConfigError(std::string(to_string(s.kind)) + " is not a network kind");
    }
}

}  // namespace detail

inline TrainedModel fit(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y) {
    spec.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeError("feature rows (" + std::to_string(x.rows()) + ") and labels (" +
                         std::to_string(y.size()) + ") differ");
    }
    if (x.rows() < 1 || x.cols() < 1) {
        throw DegenerateDataError("empty training matrix");
    }
    for (int v : y) {
        if (v != 0 && v != 1) {
            throw DataError("labels must be 0 or 1");
        }
    }
    check_finite(x, "training features");
    if (detail::iterative(spec.kind)) {
        if (x.rows() < 2) {
            throw DegenerateDataError(std::string(to_string(spec.kind)) +
                                      " needs at least 2 training rows");
        }
        require_both_classes(y, to_string(spec.kind));
    }

    TrainedModel m;
    m.spec = spec;
    m.width = x.cols();
    m.scaler = Standardizer::fit(x, spec.get_flag("standardize"));
    const Matrix z = m.scaler.apply(x);
    const auto w = sample_weights(y, spec.get_flag("class_weight"));
    const std::string name = to_string(spec.kind);

    switch (spec.kind) {
        case Kind::logistic:
            m.params = LogisticModel::fit(z, y, spec.get("step"), spec.get_int("epochs"),
                                          spec.get("l2"), spec.get_flag("class_weight"),
                                          m.training_log);
            break;
        case Kind::tree:
            m.params = DecisionTree::fit(z, y, w, detail::tree_params(spec));
            break;
        case Kind::forest:
            m.params = RandomForest::fit(z, y, w, detail::forest_params(spec), spec.seed);
            break;
        case Kind::mlp:
        case Kind::lstm:
        case Kind::lstm_bn: {
            Params net = detail::init_net(spec, m.width);
            std::visit(
                [&](auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, Mlp> || std::is_same_v<T, Lstm>) {
                        train_minibatch(n, z, y, w, spec.get_int("epochs"), spec.get_int("batch"),
                                        spec.get("step"), spec.seed, m.training_log, name);
                    }
                },
                net);
            m.params = std::move(net);
            break;
        }
    }
    return m;
}

// ---- serialization ---------------------------------------------------------

inline constexpr const char* kModelFormat = "bnsfuzzy-model";
inline constexpr int kModelVersion = 1;

namespace detail {

using nlohmann::json;

inline json to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data(m.data(), m.data() + m.size());
    j["data"] = data;
    return j;
}

inline Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw DataError("model file: matrix shape does not match its data");
    }
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

inline json tree_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    return nodes;
}

inline DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    for (const auto& n : j) {
        t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                           n.at(3).get<int>(), n.at(4).get<double>()});
    }
    const auto count = static_cast<int>(t.nodes.size());
    if (count == 0) {
        throw DataError("model file: empty tree");
    }
    for (const auto& n : t.nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count)) {
            throw DataError("model file: tree child index out of range");
        }
    }
    return t;
}

}  // namespace detail

inline void save_model(std::ostream& out, const TrainedModel& m) {
    using detail::json;
    using detail::to_json;
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["kind"] = to_string(m.spec.kind);
    j["seed"] = m.spec.seed;
    j["hyper"] = m.spec.resolved();
    j["width"] = m.width;
    j["standardize"] = m.scaler.enabled;
    j["scale_mean"] = to_json(m.scaler.mean);
    j["scale_std"] = to_json(m.scaler.scale);
    j["training_log"] = m.training_log;
    json p;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                p["weights"] = to_json(v.weights);
                p["bias"] = v.bias;
            } else if constexpr (std::is_same_v<T, DecisionTree>) {
                p["nodes"] = detail::tree_json(v);
            } else if constexpr (std::is_same_v<T, RandomForest>) {
                p["trees"] = json::array();
                for (const auto& t : v.trees) {
                    p["trees"].push_back(detail::tree_json(t));
                }
            } else if constexpr (std::is_same_v<T, Mlp>) {
                p["w1"] = to_json(v.w1);
                p["b1"] = to_json(v.b1);
                p["w2"] = to_json(v.w2);
                p["b2"] = to_json(v.b2);
                p["w3"] = to_json(v.w3);
                p["b3"] = to_json(v.b3);
            } else {
                p["hidden"] = v.hidden;
                p["batch_norm"] = v.batch_norm;
                p["bn_eps"] = v.bn_eps;
                p["bn_momentum"] = v.bn_momentum;
                p["wx"] = to_json(v.wx);
                p["wh"] = to_json(v.wh);
                p["b"] = to_json(v.b);
                p["wy"] = to_json(v.wy);
                p["by"] = to_json(v.by);
                if (v.batch_norm) {
                    p["gamma"] = to_json(v.gamma);
                    p["beta"] = to_json(v.beta);
                    p["running_mean"] = to_json(v.running_mean);
                    p["running_var"] = to_json(v.running_var);
                }
            }
        },
        m.params);
    j["params"] = p;
    out << j.dump(1) << '\n';
}

inline TrainedModel load_model(std::istream& in) {
    using detail::json;
    using detail::matrix_from_json;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kModelFormat) {
            throw DataError("not a bnsfuzzy model file");
        }
        if (j.at("version").get<int>() != kModelVersion) {
            throw DataError("unsupported model version " + std::to_string(j.at("version").get<int>()));
        }
        const auto kind = parse_kind(j.at("kind").get<std::string>());
        if (!kind) {
            throw DataError("unknown model kind '" + j.at("kind").get<std::string>() + "'");
        }
        TrainedModel m;
        m.spec.kind = *kind;
        m.spec.seed = j.at("seed").get<std::uint64_t>();
        m.spec.hyper = j.at("hyper").get<Hyper>();
        m.spec.validate();
        m.width = j.at("width").get<Index>();
        m.scaler.enabled = j.at("standardize").get<bool>();
        m.scaler.mean = matrix_from_json(j.at("scale_mean"));
        m.scaler.scale = matrix_from_json(j.at("scale_std"));
        m.training_log = j.at("training_log").get<std::vector<double>>();
        const json& p = j.at("params");
        switch (*kind) {
            case Kind::logistic: {
                LogisticModel lm;
                lm.weights = matrix_from_json(p.at("weights"));
                lm.bias = p.at("bias").get<double>();
                m.params = lm;
                break;
            }
            case Kind::tree:
                m.params = detail::tree_from_json(p.at("nodes"));
                break;
            case Kind::forest: {
                RandomForest f;
                for (const auto& t : p.at("trees")) {
                    f.trees.push_back(detail::tree_from_json(t));
                }
                m.params = std::move(f);
                break;
            }
            case Kind::mlp: {
                Mlp n;
                n.w1 = matrix_from_json(p.at("w1"));
                n.b1 = matrix_from_json(p.at("b1"));
                n.w2 = matrix_from_json(p.at("w2"));
                n.b2 = matrix_from_json(p.at("b2"));
                n.w3 = matrix_from_json(p.at("w3"));
                n.b3 = matrix_from_json(p.at("b3"));
                m.params = std::move(n);
                break;
            }
            case Kind::lstm:
            case Kind::lstm_bn: {
                Lstm n;
                n.hidden = p.at("hidden").get<Index>();
                n.batch_norm = p.at("batch_norm").get<bool>();
                n.bn_eps = p.at("bn_eps").get<double>();
                n.bn_momentum = p.at("bn_momentum").get<double>();
                n.wx = matrix_from_json(p.at("wx"));
                n.wh = matrix_from_json(p.at("wh"));
                n.b = matrix_from_json(p.at("b"));
                n.wy = matrix_from_json(p.at("wy"));
                n.by = matrix_from_json(p.at("by"));
                if (n.batch_norm) {
                    n.gamma = matrix_from_json(p.at("gamma"));
                    n.beta = matrix_from_json(p.at("beta"));
                    n.running_mean = matrix_from_json(p.at("running_mean"));
                    n.running_var = matrix_from_json(p.at("running_var"));
                }
                m.params = std::move(n);
                break;
            }
        }
        if (m.scaler.mean.size() != m.width || m.scaler.scale.size() != m.width) {
            throw DataError("model file: standardizer width mismatch");
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace bnsfuzzy::ml
