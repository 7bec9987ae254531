#pragma once

/// CART classification tree (Gini impurity) and a bagged random forest.
///
/// Split search visits features in ascending index order and thresholds in
/// ascending order, replacing the incumbent only on strictly lower impurity, so
/// ties resolve to the lowest feature index and then the lowest threshold. With
/// unit sample weights every impurity is computed from integer counts, which
/// makes the fitted tree independent of the order of the training rows.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "bnsfuzzy/ml/common.hpp"
#include "bnsfuzzy/rng.hpp"

namespace bnsfuzzy::ml {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // weighted class-1 fraction of the training samples reaching the node
};

struct TreeParams {
    int max_depth = 6;  // 0 = unlimited
    int min_leaf = 5;
    int max_features = 0;  // 0 = all features
};

class DecisionTree {
public:
    std::vector<TreeNode> nodes;

    /// `rows` selects (with repetition) the training samples; `features_rng` is
    /// only consulted when max_features < number of columns.
    static DecisionTree fit(const Matrix& x, std::span<const int> y, std::span<const double> w,
                            std::vector<std::size_t> rows, const TreeParams& params,
                            Engine* features_rng = nullptr) {
        DecisionTree t;
        Builder b{x, y, w, params, features_rng, t.nodes};
        b.grow(rows, 0);
        return t;
    }

    static DecisionTree fit(const Matrix& x, std::span<const int> y, std::span<const double> w,
                            const TreeParams& params) {
        std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        return fit(x, y, w, std::move(rows), params);
    }

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = row(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        std::vector<double> out(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i) {
            out[static_cast<std::size_t>(i)] = predict_row(x.row(i));
        }
        return out;
    }

    int depth() const { return depth_from(0); }

private:
    int depth_from(int i) const {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) {
            return 0;
        }
        return 1 + std::max(depth_from(n.left), depth_from(n.right));
    }

    struct Builder {
        const Matrix& x;
        std::span<const int> y;
        std::span<const double> w;
        const TreeParams& params;
        Engine* rng;
        std::vector<TreeNode>& nodes;

        static double gini(double w1, double wt) {
            if (wt <= 0.0) {
                return 0.0;
            }
            const double p = w1 / wt;
            return 2.0 * p * (1.0 - p);
        }

        std::vector<int> candidate_features() {
            const int d = static_cast<int>(x.cols());
            std::vector<int> f(static_cast<std::size_t>(d));
            std::iota(f.begin(), f.end(), 0);
            if (params.max_features > 0 && params.max_features < d && rng != nullptr) {
                // partial Fisher-Yates, then restore ascending order for tie-breaking
                for (int i = 0; i < params.max_features; ++i) {
                    std::uniform_int_distribution<int> pick(i, d - 1);
                    std::swap(f[static_cast<std::size_t>(i)],
                              f[static_cast<std::size_t>(pick(*rng))]);
                }
                f.resize(static_cast<std::size_t>(params.max_features));
                std::sort(f.begin(), f.end());
            }
            return f;
        }

        int grow(std::vector<std::size_t>& rows, int depth) {
            const int id = static_cast<int>(nodes.size());
            nodes.push_back({});
            double w1 = 0.0;
            double wt = 0.0;
            for (std::size_t r : rows) {
                wt += w[r];
                w1 += y[r] == 1 ? w[r] : 0.0;
            }
            nodes[static_cast<std::size_t>(id)].value = wt > 0.0 ? w1 / wt : 0.0;
            const bool pure = w1 == 0.0 || w1 == wt;
            const bool deep = params.max_depth > 0 && depth >= params.max_depth;
            const auto min_leaf = static_cast<std::size_t>(params.min_leaf);
            if (pure || deep || rows.size() < 2 * min_leaf) {
                return id;
            }

            double best = std::numeric_limits<double>::infinity();
            int best_feature = -1;
            double best_threshold = 0.0;
            std::vector<std::size_t> order = rows;
            for (int f : candidate_features()) {
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return x(static_cast<Index>(a), f) < x(static_cast<Index>(b), f);
                });
                double lw1 = 0.0;
                double lwt = 0.0;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    const std::size_t r = order[i];
                    lwt += w[r];
                    lw1 += y[r] == 1 ? w[r] : 0.0;
                    const double lo = x(static_cast<Index>(r), f);
                    const double hi = x(static_cast<Index>(order[i + 1]), f);
                    if (!(lo < hi) || i + 1 < min_leaf || order.size() - (i + 1) < min_leaf) {
                        continue;
                    }
                    const double rwt = wt - lwt;
                    const double impurity =
                        (lwt * gini(lw1, lwt) + rwt * gini(w1 - lw1, rwt)) / wt;
                    if (impurity < best) {
                        best = impurity;
                        best_feature = f;
                        double mid = lo + (hi - lo) / 2.0;
                        if (!(mid < hi)) {
                            mid = lo;
                        }
                        best_threshold = mid;
                    }
                }
            }
            if (best_feature < 0) {
                return id;
            }
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (std::size_t r : rows) {
                (x(static_cast<Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
            }
            rows.clear();
            rows.shrink_to_fit();
            const int l = grow(left, depth + 1);
            const int rr = grow(right, depth + 1);
            auto& node = nodes[static_cast<std::size_t>(id)];
            node.feature = best_feature;
            node.threshold = best_threshold;
            node.left = l;
            node.right = rr;
            return id;
        }
    };
};

struct ForestParams {
    int trees = 100;
    bool bootstrap = true;
    TreeParams tree{0, 1, 3};
};

/// Probability is the fraction of trees voting class 1 (leaf value >= 0.5).
class RandomForest {
public:
    std::vector<DecisionTree> trees;

    /// Tree i draws its bootstrap sample and split features from seed ^ i.
    static RandomForest fit(const Matrix& x, std::span<const int> y, std::span<const double> w,
                            const ForestParams& params, std::uint64_t seed) {
        RandomForest forest;
        const auto n = static_cast<std::size_t>(x.rows());
        for (int i = 0; i < params.trees; ++i) {
            const auto tree_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
            std::vector<std::size_t> rows(n);
            if (params.bootstrap) {
                Engine boot = make_engine(tree_seed, Stream::bootstrap);
                std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                for (auto& r : rows) {
                    r = pick(boot);
                }
            } else {
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
            Engine feat = make_engine(tree_seed, Stream::features);
            forest.trees.push_back(DecisionTree::fit(x, y, w, std::move(rows), params.tree, &feat));
        }
        return forest;
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
        for (Index i = 0; i < x.rows(); ++i) {
            int votes = 0;
            for (const auto& t : trees) {
                votes += t.predict_row(x.row(i)) >= 0.5 ? 1 : 0;
            }
            out[static_cast<std::size_t>(i)] =
                static_cast<double>(votes) / static_cast<double>(trees.size());
        }
        return out;
    }
};

}  // namespace bnsfuzzy::ml
