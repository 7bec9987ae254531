#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "bnsfuzzy/ml.hpp"
#include "bnsfuzzy/ml/grad_check.hpp"

using namespace bnsfuzzy;
using namespace bnsfuzzy::ml;

namespace {

struct Toy {
    Matrix x;
    std::vector<int> y;
};

/// Rows of `width` Gaussian features; label from the sign of a fixed linear score.
Toy linear_toy(std::size_t n, Index width, std::uint64_t seed, double margin = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Toy t;
    t.x.resize(static_cast<Index>(n), width);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Index>(i);
        double score = 0.0;
        for (Index j = 0; j < width; ++j) {
            t.x(r, j) = d(rng);
            score += (j % 2 == 0 ? 1.0 : -0.5) * t.x(r, j);
        }
        if (std::abs(score) < margin) {
            t.x(r, 0) += score >= 0.0 ? margin : -margin;
            score += score >= 0.0 ? margin : -margin;
        }
        t.y.push_back(score > 0.0 ? 1 : 0);
    }
    return t;
}

ClassifierSpec quick(Kind k, std::uint64_t seed = 3) {
    auto s = ClassifierSpec::with_defaults(k, seed);
    if (k == Kind::mlp) {
        s.hyper["epochs"] = 40;
    } else if (k == Kind::lstm || k == Kind::lstm_bn) {
        s.hyper["epochs"] = 8;
    } else if (k == Kind::forest) {
        s.hyper["trees"] = 15;
    }
    return s;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ok += pred[i] == y[i];
    }
    return static_cast<double>(ok) / static_cast<double>(y.size());
}

}  // namespace

TEST(Spec, DefaultsValidateAndUnknownKeysRejected) {
    for (Kind k : kAllKinds) {
        EXPECT_NO_THROW(ClassifierSpec::with_defaults(k).validate()) << to_string(k);
        EXPECT_EQ(parse_kind(to_string(k)), k);
    }
    EXPECT_EQ(column_letter(Kind::logistic), 'A');
    EXPECT_EQ(column_letter(Kind::lstm_bn), 'F');
    auto s = ClassifierSpec::with_defaults(Kind::logistic);
    s.hyper["hidden"] = 4;
    EXPECT_THROW(s.validate(), ConfigError);
    s = ClassifierSpec::with_defaults(Kind::mlp);
    s.hyper["step"] = -1;
    EXPECT_THROW(s.validate(), ConfigError);
    s = ClassifierSpec::with_defaults(Kind::lstm_bn);
    s.hyper["bn_momentum"] = 1.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = ClassifierSpec::with_defaults(Kind::tree);
    s.hyper["min_leaf"] = 0.5;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_FALSE(parse_kind("svm").has_value());
}

TEST(Fit, InvalidHyperparametersAreConfigErrors) {
    const auto t = linear_toy(20, 3, 1);
    auto s = ClassifierSpec::with_defaults(Kind::forest);
    s.hyper["trees"] = 0;
    EXPECT_THROW(fit(s, t.x, t.y), ConfigError);
}

TEST(Fit, SingleClassDataIsDegenerateForIterativeKinds) {
    auto t = linear_toy(20, 10, 2);
    std::fill(t.y.begin(), t.y.end(), 1);
    for (Kind k : {Kind::logistic, Kind::mlp, Kind::lstm, Kind::lstm_bn}) {
        EXPECT_THROW(fit(quick(k), t.x, t.y), DegenerateDataError) << to_string(k);
    }
    EXPECT_NO_THROW(fit(quick(Kind::tree), t.x, t.y));
}

TEST(Fit, ShapeAndLabelChecks) {
    const auto t = linear_toy(20, 4, 3);
    std::vector<int> short_y(t.y.begin(), t.y.end() - 1);
    EXPECT_THROW(fit(quick(Kind::logistic), t.x, short_y), ShapeError);
    auto bad = t.y;
    bad[0] = 2;
    EXPECT_THROW(fit(quick(Kind::logistic), t.x, bad), DataError);
    auto x = t.x;
    x(0, 0) = std::nan("");
    EXPECT_THROW(fit(quick(Kind::logistic), x, t.y), Error);
    const auto m = fit(quick(Kind::logistic), t.x, t.y);
    EXPECT_THROW(m.predict_proba(Matrix::Zero(2, 5)), ShapeError);
}

TEST(Logistic, SeparableToyReachesFullTrainingAccuracy) {
    const auto t = linear_toy(200, 2, 4, 0.3);
    auto s = ClassifierSpec::with_defaults(Kind::logistic);
    s.hyper["epochs"] = 2000;
    s.hyper["step"] = 0.5;
    s.hyper["l2"] = 0.0;
    const auto m = fit(s, t.x, t.y);
    EXPECT_EQ(accuracy(m.predict(t.x), t.y), 1.0);
}

TEST(Logistic, ZeroWeightsGiveHalf) {
    LogisticModel m;
    m.weights = Vector::Zero(10);
    for (double p : m.predict_proba(Matrix::Random(5, 10))) {
        EXPECT_EQ(p, 0.5);
    }
}

TEST(Logistic, LossLogNonincreasingAtSmallStep) {
    const auto t = linear_toy(150, 10, 5);
    auto s = ClassifierSpec::with_defaults(Kind::logistic);
    s.hyper["step"] = 0.05;
    const auto m = fit(s, t.x, t.y);
    ASSERT_EQ(m.training_log.size(), 500u);
    for (std::size_t e = 1; e < m.training_log.size(); ++e) {
        ASSERT_LE(m.training_log[e], m.training_log[e - 1] + 1e-12) << "epoch " << e;
    }
}

TEST(IterativeKinds, LossSettlesOverFinalEpochs) {
    const auto t = linear_toy(160, 10, 6);
    for (Kind k : {Kind::logistic, Kind::mlp, Kind::lstm, Kind::lstm_bn}) {
        auto s = ClassifierSpec::with_defaults(k, 1);
        if (k == Kind::lstm || k == Kind::lstm_bn) {
            s.hyper["epochs"] = 40;
        } else if (k == Kind::mlp) {
            s.hyper["epochs"] = 100;
        }
        const auto m = fit(s, t.x, t.y);
        const auto& log = m.training_log;
        const std::size_t tail = std::max<std::size_t>(2, log.size() / 10);
        const double last = std::accumulate(log.end() - static_cast<long>(tail), log.end(), 0.0);
        const double before = std::accumulate(log.end() - static_cast<long>(2 * tail),
                                              log.end() - static_cast<long>(tail), 0.0);
        EXPECT_LE(last, before * (1.0 + 1e-9)) << to_string(k);
        EXPECT_LT(log.back(), log.front()) << to_string(k);
    }
}

TEST(Tree, UnlimitedDepthFitsTrainingDataExactly) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Toy t;
        t.x = Matrix::Random(40 + trial, 3);
        for (Index i = 0; i < t.x.rows(); ++i) {
            t.y.push_back(static_cast<int>(rng() % 2));
        }
        auto s = ClassifierSpec::with_defaults(Kind::tree);
        s.hyper["max_depth"] = 0;
        s.hyper["min_leaf"] = 1;
        const auto m = fit(s, t.x, t.y);
        ASSERT_EQ(accuracy(m.predict(t.x), t.y), 1.0);
    }
}

TEST(Tree, DepthLimitRespected) {
    const auto t = linear_toy(300, 10, 8);
    auto s = ClassifierSpec::with_defaults(Kind::tree);
    s.hyper["max_depth"] = 3;
    const auto m = fit(s, t.x, t.y);
    EXPECT_LE(std::get<DecisionTree>(m.params).depth(), 3);
}

TEST(Tree, PermutingTrainingRowsLeavesPredictionsUnchanged) {
    const auto t = linear_toy(200, 10, 9);
    const auto probe = linear_toy(100, 10, 10);
    std::vector<std::size_t> perm(t.y.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        Toy p;
        p.x = gather_rows(t.x, perm);
        for (auto i : perm) {
            p.y.push_back(t.y[i]);
        }
        for (Kind k : {Kind::tree, Kind::forest}) {
            auto s = ClassifierSpec::with_defaults(k, 5);
            if (k == Kind::forest) {
                s.hyper["bootstrap"] = 0;
                s.hyper["trees"] = 10;
            }
            const auto a = fit(s, t.x, t.y).predict_proba(probe.x);
            const auto b = fit(s, p.x, p.y).predict_proba(probe.x);
            ASSERT_EQ(a, b) << to_string(k);
        }
    }
}

TEST(Forest, SingleTreeWithoutBootstrapEqualsTree) {
    const auto t = linear_toy(250, 10, 12);
    const auto probe = linear_toy(100, 10, 13);
    auto fs = ClassifierSpec::with_defaults(Kind::forest, 4);
    fs.hyper["trees"] = 1;
    fs.hyper["bootstrap"] = 0;
    fs.hyper["max_features"] = 10;
    fs.hyper["max_depth"] = 6;
    fs.hyper["min_leaf"] = 5;
    fs.hyper["standardize"] = 0;
    auto ts = ClassifierSpec::with_defaults(Kind::tree, 4);
    const auto forest = fit(fs, t.x, t.y);
    const auto tree = fit(ts, t.x, t.y);
    EXPECT_EQ(forest.predict(probe.x), tree.predict(probe.x));
}

TEST(Forest, ProbabilityIsVoteFraction) {
    RandomForest f;
    for (int i = 0; i < 10; ++i) {
        DecisionTree t;
        TreeNode leaf;
        leaf.value = i < 7 ? 0.8 : 0.2;
        t.nodes.push_back(leaf);
        f.trees.push_back(t);
    }
    EXPECT_DOUBLE_EQ(f.predict_proba(Matrix::Zero(1, 10))[0], 0.7);
}

TEST(Predict, ThresholdIsInclusive) {
    TrainedModel m;
    m.spec = ClassifierSpec::with_defaults(Kind::logistic);
    m.width = 1;
    m.scaler = Standardizer::fit(Matrix::Zero(2, 1), false);
    LogisticModel lm;
    lm.weights = Vector::Ones(1);
    m.params = lm;
    Matrix x(3, 1);
    x << 0.0, std::log(0.49 / 0.51), 2.0;
    const auto p = m.predict_proba(x);
    EXPECT_EQ(p[0], 0.5);
    EXPECT_NEAR(p[1], 0.49, 1e-12);
    EXPECT_EQ(m.predict(x), (std::vector<int>{1, 0, 1}));
    EXPECT_EQ(m.predict(x, 0.0), (std::vector<int>{1, 1, 1}));
    EXPECT_THROW(m.predict(x, 1.2), ConfigError);
    EXPECT_THROW(m.predict(x, -0.1), ConfigError);
}

TEST(AllKinds, ProbabilitiesInUnitIntervalAndDeterministic) {
    const auto t = linear_toy(120, 10, 14);
    Matrix probe = 6.0 * Matrix::Random(200, 10);
    for (Kind k : kAllKinds) {
        const auto a = fit(quick(k), t.x, t.y);
        const auto b = fit(quick(k), t.x, t.y);
        const auto pa = a.predict_proba(probe);
        EXPECT_EQ(pa, b.predict_proba(probe)) << to_string(k);
        EXPECT_EQ(a.training_log, b.training_log) << to_string(k);
        for (double p : pa) {
            ASSERT_GE(p, 0.0) << to_string(k);
            ASSERT_LE(p, 1.0) << to_string(k);
        }
    }
}

TEST(AllKinds, SaveLoadRoundTripIsBitExact) {
    const auto t = linear_toy(120, 10, 15);
    Matrix probe = 3.0 * Matrix::Random(50, 10);
    for (Kind k : kAllKinds) {
        const auto m = fit(quick(k), t.x, t.y);
        std::stringstream io;
        save_model(io, m);
        const auto back = load_model(io);
        EXPECT_EQ(back.spec.kind, k);
        EXPECT_EQ(back.spec.seed, m.spec.seed);
        EXPECT_EQ(back.predict_proba(probe), m.predict_proba(probe)) << to_string(k);
    }
}

TEST(AllKinds, LoadRejectsForeignOrCorruptInput) {
    std::istringstream junk("{\"format\": \"other\", \"version\": 1}");
    EXPECT_THROW(load_model(junk), DataError);
    std::istringstream broken("{not json");
    EXPECT_THROW(load_model(broken), DataError);
}

TEST(Lstm, ZeroInputZeroBiasKeepsStateAtZero) {
    auto net = Lstm::init(16, 10, false, 1);
    net.b.setZero();
    const auto s = net.final_state(Matrix::Zero(4, 10));
    EXPECT_EQ(s.c.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.h.cwiseAbs().maxCoeff(), 0.0);
    for (double p : net.predict_proba(Matrix::Zero(4, 10))) {
        EXPECT_EQ(p, 0.5);
    }
}

TEST(BatchNorm, IdenticalColumnsNormalizeToZero) {
    Matrix u(8, 5);
    for (Index j = 0; j < 5; ++j) {
        u.col(j) = Vector::LinSpaced(8, -3.0, 4.0);
    }
    const auto r = batch_norm_forward(u, 1e-5);
    EXPECT_EQ(r.normalized.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(r.inv_std.allFinite());
}

TEST(BatchNorm, LstmWithIdenticalRowsStaysFinite) {
    auto net = Lstm::init(8, 10, true, 2);
    Matrix x(4, 10);
    for (Index i = 0; i < 4; ++i) {
        x.row(i) = Eigen::RowVectorXd::LinSpaced(10, -1.0, 1.0);
    }
    const std::vector<int> y{0, 1, 0, 1};
    const std::vector<double> w(4, 1.0);
    std::vector<Matrix> grads;
    const double l = net.loss(x, y, w, &grads, Mode::train);
    EXPECT_TRUE(std::isfinite(l));
    for (const auto& g : grads) {
        EXPECT_TRUE(g.allFinite());
    }
}

TEST(GradientCheck, NetworksAgreeWithFiniteDifferences) {
    const auto t = linear_toy(3, 10, 16);
    const std::vector<int> y{0, 1, 1};
    EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::mlp, 1), t.x, y, 1e-5), 1e-4);
    EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::lstm, 1), t.x, y, 1e-5), 1e-4);
    EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::lstm_bn, 1), t.x, y, 1e-5), 1e-3);
    // Other seeds and a larger batch.
    const auto u = linear_toy(8, 10, 17);
    for (std::uint64_t seed : {2u, 3u}) {
        EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::mlp, seed), u.x, u.y, 1e-5), 1e-4);
        EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::lstm, seed), u.x, u.y, 1e-5), 1e-4);
        EXPECT_LT(grad_check(ClassifierSpec::with_defaults(Kind::lstm_bn, seed), u.x, u.y, 1e-5), 1e-3);
    }
}

TEST(GradientCheck, NonNetworkKindsAreConfigErrors) {
    const auto t = linear_toy(3, 10, 18);
    EXPECT_THROW(grad_check(ClassifierSpec::with_defaults(Kind::tree), t.x, t.y, 1e-5), ConfigError);
}

TEST(Standardize, TrainingStatisticsOnly) {
    Matrix x(4, 2);
    x << 1, 10, 2, 10, 3, 10, 4, 10;
    const auto s = Standardizer::fit(x, true);
    const Matrix z = s.apply(x);
    EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
    EXPECT_TRUE(z.allFinite());
    EXPECT_EQ(z.col(1).cwiseAbs().maxCoeff(), 0.0);
}
