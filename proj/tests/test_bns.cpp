#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bnsfuzzy/bns.hpp"

using namespace bnsfuzzy;
using namespace bnsfuzzy::bns;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;
};

Moments moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    Moments m;
    for (double x : v) {
        m.mean += x;
    }
    m.mean /= n;
    double m4 = 0.0;
    for (double x : v) {
        const double d = (x - m.mean) * (x - m.mean);
        m.var += d;
        m4 += d * d;
    }
    m.var /= n - 1.0;
    m4 /= n;
    m.se_mean = std::sqrt(m.var / n);
    m.se_var = std::sqrt((m4 - m.var * m.var) / n);
    return m;
}

BnsParams base_params() {
    BnsParams p;
    p.mu = 0.05;
    p.beta = 0.1;
    p.rho = -0.5;
    p.lam = 1.0;
    p.z = {5.0, 10.0};
    p.z_b = {50.0, 10.0};
    return p;
}

}  // namespace

TEST(Subordinator, NoArrivalsGivesZeroIncrements) {
    const auto inc = simulate_subordinator({0.0, 3.0}, 1.0, 1.0, 0.01, 9);
    ASSERT_EQ(inc.size(), 100u);
    for (double v : inc) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Subordinator, MonteCarloMomentsMatchClosedForm) {
    const SubordinatorParams p{1.0, 2.0};
    std::vector<double> z1;
    z1.reserve(100000);
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
        z1.push_back(simulate_subordinator(p, 1.0, 1.0, 1.0, seed)[0]);
    }
    const auto m = moments(z1);
    EXPECT_NEAR(m.mean, p.mean(), 3.0 * m.se_mean);
    EXPECT_NEAR(m.var, p.variance(), 3.0 * m.se_var);
}

TEST(Subordinator, IncrementsNonnegativeAndDeterministic) {
    const auto a = simulate_subordinator({4.0, 1.0}, 2.0, 3.0, 0.01, 77);
    const auto b = simulate_subordinator({4.0, 1.0}, 2.0, 3.0, 0.01, 77);
    EXPECT_EQ(a, b);
    for (double v : a) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(Subordinator, RejectsBadGrid) {
    EXPECT_THROW(simulate_subordinator({1, 1}, 1.0, 1.0, 0.0, 1), DomainError);
    EXPECT_THROW(simulate_subordinator({1, 1}, 1.0, -1.0, 0.1, 1), DomainError);
    EXPECT_THROW(simulate_subordinator({1, 1}, 1.0, 1.0, 2.0, 1), DomainError);
}

TEST(Simulate, PathInvariants) {
    for (auto model : {Model::classical, Model::generalized, Model::refined}) {
        auto p = base_params();
        p.rho_prime = 0.6;
        p.theta = 0.3;
        p.theta_prime = 0.7;
        const auto path = simulate(model, p, 100.0, 0.04, 2.0, 1.0 / 252, 5);
        ASSERT_EQ(path.times.size(), 505u);
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            ASSERT_GT(path.sigma2[k], 0.0);
            ASSERT_NEAR(path.s[k], 100.0 * std::exp(path.x[k]), 1e-12 * path.s[k]);
            if (k > 0) {
                ASSERT_GE(path.jump_z[k], path.jump_z[k - 1]);
                ASSERT_GE(path.jump_zb[k], path.jump_zb[k - 1]);
            }
        }
    }
}

TEST(Simulate, JumpFreeVarianceDecaysDeterministically) {
    BnsParams p;
    p.z = {0.0, 1.0};
    p.z_b = {0.0, 1.0};
    p.lam = 2.0;
    const auto path = simulate_classical(p, 50.0, 0.09, 1.0, 1e-3, 3);
    for (std::size_t k = 0; k < path.times.size(); k += 100) {
        EXPECT_NEAR(path.sigma2[k], 0.09 * std::exp(-2.0 * path.times[k]), 0.09 * 2e-3);
    }
}

TEST(Simulate, ZeroLeverageDecouplesReturnsFromJumps) {
    auto p = base_params();
    p.rho = 0.0;
    p.mu = 0.0;
    p.beta = 0.0;
    const auto path = simulate_classical(p, 100.0, 0.04, 1.0, 1e-3, 8);
    ASSERT_GT(path.jump_z.back(), 0.0);
    // Each log-return step is bounded by its diffusion part alone.
    for (std::size_t k = 0; k + 1 < path.x.size(); ++k) {
        const double step = std::abs(path.x[k + 1] - path.x[k]);
        ASSERT_LT(step, 7.0 * std::sqrt(path.sigma2[k] * path.dt));
    }
}

TEST(Simulate, StabilityAndDomainErrors) {
    auto p = base_params();
    p.lam = 300.0;
    EXPECT_THROW(simulate_classical(p, 100, 0.04, 1.0, 1.0 / 252, 1), StabilityError);
    p = base_params();
    EXPECT_THROW(simulate_classical(p, 0.0, 0.04, 1.0, 0.01, 1), DomainError);
    EXPECT_THROW(simulate_classical(p, 100, 0.0, 1.0, 0.01, 1), DomainError);
    p.rho = 0.5;
    EXPECT_THROW(simulate_classical(p, 100, 0.04, 1.0, 0.01, 1), DomainError);
    p = base_params();
    p.theta = 1.5;
    EXPECT_THROW(simulate_refined(p, 100, 0.04, 1.0, 0.01, 1), DomainError);
}

TEST(Simulate, WeakerSecondarySubordinatorWarns) {
    auto p = base_params();
    EXPECT_TRUE(p.validate().empty());
    p.z_b = {1.0, 10.0};
    EXPECT_EQ(p.validate().size(), 1u);
}

TEST(Simulate, RefinedWithZeroMixingEqualsClassicalBitwise) {
    auto p = base_params();
    p.theta = 0.0;
    p.theta_prime = 0.0;
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto a = simulate_classical(p, 100.0, 0.04, 3.0, 1.0 / 252, seed);
        const auto b = simulate_refined(p, 100.0, 0.04, 3.0, 1.0 / 252, seed);
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.sigma2, b.sigma2);
        EXPECT_EQ(a.s, b.s);
        EXPECT_EQ(a.jump_z, b.jump_z);
    }
}

TEST(Simulate, GeneralizedWithFullCorrelationEqualsClassical) {
    auto p = base_params();
    p.rho_prime = 1.0;
    const auto a = simulate_classical(p, 100.0, 0.04, 3.0, 1.0 / 252, 4);
    const auto b = simulate_generalized(p, 100.0, 0.04, 3.0, 1.0 / 252, 4);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.sigma2, b.sigma2);
}

TEST(Simulate, GeneralizedWithoutCorrelationDecouplesJumpTimes) {
    auto p = base_params();
    p.rho_prime = 0.0;
    const auto path = simulate_generalized(p, 100.0, 0.04, 2.0, 1e-3, 6);
    std::size_t common = 0;
    std::size_t var_jumps = 0;
    for (std::size_t k = 0; k + 1 < path.x.size(); ++k) {
        const bool zj = path.jump_z[k + 1] > path.jump_z[k];
        const bool sj = path.jump_zb[k + 1] > path.jump_zb[k];
        common += zj && sj;
        var_jumps += sj;
        // Variance moves only by decay and the independent stream.
        const double expected = path.sigma2[k] * (1.0 - p.lam * path.dt) +
                                (path.jump_zb[k + 1] - path.jump_zb[k]);
        ASSERT_NEAR(path.sigma2[k + 1], expected, 1e-12);
    }
    EXPECT_GT(var_jumps, 0u);
    EXPECT_LE(common, 1u);
}

TEST(Simulate, TerminalVarianceMeanMatchesOuFormula) {
    auto p = base_params();
    p.mu = 0.0;
    p.beta = 0.0;
    const double s2 = 0.2;
    const double T = 1.0;
    const double decay = std::exp(-p.lam * T);
    for (auto model : {Model::classical, Model::refined}) {
        p.theta = 0.5;
        p.theta_prime = 0.5;
        std::vector<double> terminal;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            terminal.push_back(simulate(model, p, 100.0, s2, T, 1e-3, seed).sigma2.back());
        }
        const auto m = moments(terminal);
        const double expected = s2 * decay + stationary_variance(model, p) * (1.0 - decay);
        EXPECT_NEAR(m.mean, expected, 3.0 * m.se_mean) << to_string(model);
    }
}

TEST(Simulate, ScaledGeneralizedMixVarianceMatchesMonteCarlo) {
    // Var(rho' Z_1 + sqrt(1-rho'^2) Z*_1) for independent copies.
    const SubordinatorParams z{2.0, 4.0};
    const double rp = 0.6;
    const double other = std::sqrt(1.0 - rp * rp);
    std::vector<double> mix;
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
        Engine a = make_engine(seed, Stream::subordinator);
        Engine b = make_engine(seed, Stream::secondary_subordinator);
        const auto za = aggregate_jumps(simulate_jump_events(z, 1.0, 1.0, a), 1, 1.0)[0];
        const auto zb = aggregate_jumps(simulate_jump_events(z, 1.0, 1.0, b), 1, 1.0)[0];
        mix.push_back(rp * za + other * zb);
    }
    const auto m = moments(mix);
    EXPECT_NEAR(m.var, (rp * rp + other * other) * z.variance(), 3.0 * m.se_var);
}

TEST(Epsilon, Examples) {
    EXPECT_EQ(epsilon(1.0, 1.0, 3.0), 0.0);
    EXPECT_NEAR(epsilon(0.0, 1.0, 1e-8), 1.0, 1e-6);
    EXPECT_NEAR(epsilon(0.0, 1.0, 2.0), 0.43233, 1e-5);
    // Simpson rule on exp(-2u) over [0, 1].
    const int n = 1000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * std::exp(-2.0 * i / static_cast<double>(n));
    }
    EXPECT_NEAR(epsilon(0.0, 1.0, 2.0), acc / (3.0 * n), 1e-10);
    EXPECT_THROW(epsilon(2.0, 1.0, 1.0), DomainError);
}

TEST(Epsilon, BoundedAndDecreasingInRate) {
    double prev = INFINITY;
    for (double lam = 0.01; lam < 50.0; lam *= 1.7) {
        const double e = epsilon(0.5, 2.0, lam);
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.5);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(IntegratedVariance, NoJumpsAndEmptyInterval) {
    BnsParams p;
    p.z = {0.0, 1.0};
    p.lam = 1.5;
    const auto path = simulate_classical(p, 100.0, 0.05, 1.0, 0.01, 2);
    EXPECT_DOUBLE_EQ(integrated_variance(path, 0.2, 0.9, 0.0),
                     epsilon(0.2, 0.9, 1.5) * path.sigma2[path.index_of(0.2)]);
    EXPECT_EQ(integrated_variance(path, 0.5, 0.5, 0.3), 0.0);
    EXPECT_THROW(integrated_variance(path, 0.0, 2.0, 0.0), DomainError);
}

TEST(IntegratedVariance, MatchesQuadratureOnFineGrid) {
    for (auto model : {Model::classical, Model::refined}) {
        auto p = base_params();
        p.theta = 0.4;
        p.theta_prime = 0.4;
        for (std::uint64_t seed : {3u, 4u, 5u}) {
            const auto path = simulate(model, p, 100.0, 0.3, 1.0, 1e-4, seed);
            const double mix = model == Model::refined ? p.theta_prime : 0.0;
            const double iv = integrated_variance(path, 0.0, 1.0, mix);
            const double riemann = trapezoid_sigma2(path, 0, path.steps());
            EXPECT_NEAR(iv, riemann, 0.005 * riemann) << to_string(model) << " seed " << seed;
        }
    }
}

TEST(IntegratedVariance, QuadratureGapHalvesWithStep) {
    auto p = base_params();
    p.theta = 0.4;
    p.theta_prime = 0.4;
    for (auto model : {Model::classical, Model::refined}) {
        const double mix = model == Model::refined ? p.theta_prime : 0.0;
        for (std::uint64_t seed : {1u, 2u}) {
            double gap[2];
            const double steps[2] = {1e-4, 5e-5};
            for (int i = 0; i < 2; ++i) {
                const auto path = simulate(model, p, 100.0, 0.3, 1.0, steps[i], seed);
                gap[i] = integrated_variance(path, 0.0, 1.0, mix) -
                         trapezoid_sigma2(path, 0, path.steps());
            }
            EXPECT_NEAR(gap[1] / gap[0], 0.5, 0.15) << to_string(model) << " seed " << seed;
        }
    }
}

TEST(RealizedVariance, JumpTermsAndReductions) {
    auto p = base_params();
    const auto path = simulate_refined(p, 100.0, 0.04, 1.0, 0.01, 7);
    const double avg = trapezoid_sigma2(path, 0, path.steps()) / 1.0;
    auto q = p;
    q.rho = 0.0;
    EXPECT_DOUBLE_EQ(realized_variance(path, 1.0, q), avg);
    q = p;
    q.theta = 1.0;
    EXPECT_DOUBLE_EQ(realized_variance(path, 1.0, q),
                     avg + p.rho * p.rho * p.lam * p.z_b.variance());
    q.theta = 0.0;
    EXPECT_DOUBLE_EQ(realized_variance(path, 1.0, q), avg + p.rho * p.rho * p.lam * p.z.variance());
}

TEST(Correlation, ZeroLeverageIsVarianceRatio) {
    auto p = base_params();
    p.rho = 0.0;
    const auto path = simulate_classical(p, 100.0, 0.04, 2.0, 0.01, 1);
    const double c = correlation_classical(path, 1.5, 0.5, p);
    const double expected = std::sqrt(trapezoid_sigma2(path, 0, 50) / trapezoid_sigma2(path, 0, 150));
    EXPECT_NEAR(c, expected, 1e-12);
    EXPECT_LE(c, 1.0);
    EXPECT_DOUBLE_EQ(correlation_refined(path, 1.5, 0.5, p), c);
}

TEST(Correlation, RefinedReducesToClassicalWithoutMixing) {
    auto p = base_params();
    p.theta = 0.0;
    const auto path = simulate_refined(p, 100.0, 0.04, 4.0, 0.01, 12);
    for (double t : {1.0, 2.0, 4.0}) {
        const double a = correlation_classical(path, t, 0.5, p);
        const double b = correlation_refined(path, t, 0.5, p);
        EXPECT_NEAR(b, a, 1e-12 * std::abs(a));
    }
}

TEST(Correlation, DecreasesInLaterTimeAndIsContinuous) {
    auto p = base_params();
    const double dt = 0.01;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto path = simulate_classical(p, 100.0, p.z.mean(), 5.0, dt, seed);
        double prev = INFINITY;
        for (int k = 101; k <= 500; ++k) {
            const double c = correlation_classical(path, k * dt, 1.0, p);
            ASSERT_LT(c, prev);
            prev = c;
        }
        const double near = correlation_classical(path, 1.0 + dt, 1.0, p);
        const double far = correlation_classical(path, 1.0 + 2 * dt, 1.0, p);
        EXPECT_LT(near - far, 0.05);
    }
    const auto path = simulate_classical(p, 100.0, 0.04, 1.0, dt, 1);
    EXPECT_THROW(correlation_classical(path, 0.5, 0.5, p), DomainError);
    EXPECT_THROW(correlation_classical(path, 0.5, 0.7, p), DomainError);
}

TEST(Correlation, RefinedStaysLargerThanClassicalAtLongLags) {
    BnsParams p;
    p.rho = -1.0;
    p.lam = 1.0;
    p.theta = 0.5;
    p.theta_prime = 0.5;
    p.z = {20.0, 1.0};
    p.z_b = {200.0, 1.5};
    const double dt = 1.0 / 252;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto classical = simulate_classical(p, 100.0, stationary_variance(Model::classical, p),
                                                  20.0, dt, seed);
        const auto refined = simulate_refined(p, 100.0, stationary_variance(Model::refined, p), 20.0,
                                              dt, seed);
        const double c = correlation_classical(classical, 20.0, 5.0, p);
        const double r = correlation_refined(refined, 20.0, 5.0, p);
        EXPECT_GT(r, c) << "seed " << seed;
        EXPECT_LE(std::abs(r), 1.0);
    }
}

TEST(PathCsv, HeaderAndRows) {
    const auto path = simulate_refined(base_params(), 100.0, 0.04, 0.1, 0.01, 1);
    std::ostringstream out;
    write_path_csv(out, path);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,X,sigma2,S,Jz,Jzb");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, path.times.size());
    std::ostringstream again;
    write_path_csv(again, simulate_refined(base_params(), 100.0, 0.04, 0.1, 0.01, 1));
    EXPECT_EQ(out.str(), again.str());
}
