#include <gtest/gtest.h>

#include <random>

#include "bnsfuzzy/fuzzy.hpp"

using namespace bnsfuzzy;
using namespace bnsfuzzy::fuzzy;

TEST(Membership, KernelEdgesAndSupport) {
    const TriangularFuzzyNumber a{1, 2, 3};
    EXPECT_EQ(membership(a, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(membership(a, 1.5), 0.5);
    EXPECT_EQ(membership(a, 0.5), 0.0);
    EXPECT_EQ(membership(a, 1.0), 0.0);
    EXPECT_EQ(membership(a, 3.0), 0.0);
    EXPECT_EQ(membership(a, 7.0), 0.0);
}

TEST(Membership, DegenerateEdgesGiveOneAtKernel) {
    EXPECT_EQ(membership({2, 2, 3}, 2.0), 1.0);
    EXPECT_EQ(membership({1, 2, 2}, 2.0), 1.0);
    EXPECT_EQ(membership(TriangularFuzzyNumber::crisp(5), 5.0), 1.0);
    EXPECT_EQ(membership(TriangularFuzzyNumber::crisp(5), 5.1), 0.0);
}

TEST(AlphaCut, Examples) {
    const TriangularFuzzyNumber a{1, 2, 4};
    EXPECT_EQ(alpha_cut(a, 0.0), (Interval{1, 4}));
    EXPECT_EQ(alpha_cut(a, 1.0), (Interval{2, 2}));
    const auto half = alpha_cut(a, 0.5);
    EXPECT_DOUBLE_EQ(half.lo, 1.5);
    EXPECT_DOUBLE_EQ(half.hi, 3.0);
}

TEST(AlphaCut, RejectsAlphaOutsideUnitInterval) {
    const TriangularFuzzyNumber a{1, 2, 4};
    EXPECT_THROW(alpha_cut(a, -0.01), DomainError);
    EXPECT_THROW(alpha_cut(a, 1.01), DomainError);
}

TEST(Expectation, PublishedTableRows) {
    struct Row {
        TriangularFuzzyNumber a;
        double e03, e05, e07;
    };
    const Row rows[] = {
        {{2118.59, 2130.65, 2140.96}, 2127.98, 2130.21, 2132.45},
        {{2066.58, 2078.18, 2085.19}, 2075.17, 2077.03, 2078.89},
        {{1074.77, 1099.23, 1125.12}, 1094.55, 1099.59, 1104.62},
        {{3535.23, 3580.84, 3588.11}, 3565.97, 3571.26, 3576.54},
    };
    for (const auto& r : rows) {
        EXPECT_NEAR(fuzzy_expectation(r.a, OptimismWeight{0.3}), r.e03, 0.01);
        EXPECT_NEAR(fuzzy_expectation(r.a, OptimismWeight{0.5}), r.e05, 0.01);
        EXPECT_NEAR(fuzzy_expectation(r.a, OptimismWeight{0.7}), r.e07, 0.01);
    }
}

TEST(Expectation, CrispNumberIsItsValue) {
    for (double lf : {0.0, 0.3, 1.0}) {
        EXPECT_EQ(fuzzy_expectation(TriangularFuzzyNumber::crisp(42.5), OptimismWeight{lf}), 42.5);
    }
}

TEST(Expectation, WeightOutsideUnitIntervalRejected) {
    EXPECT_THROW(OptimismWeight{-0.1}, DomainError);
    EXPECT_THROW(OptimismWeight{1.5}, DomainError);
}

TEST(FuzzifyBar, OrderedBarsAndMalformed) {
    EXPECT_EQ(fuzzify_bar(1074.77, 1099.23, 1125.12), (TriangularFuzzyNumber{1074.77, 1099.23, 1125.12}));
    EXPECT_EQ(fuzzify_bar(5, 5, 5), TriangularFuzzyNumber::crisp(5));
    try {
        fuzzify_bar(10, 12, 11);
        FAIL() << "expected MalformedBarError";
    } catch (const MalformedBarError& e) {
        EXPECT_EQ(e.low(), 10);
        EXPECT_EQ(e.close(), 12);
        EXPECT_EQ(e.high(), 11);
    }
    EXPECT_EQ(fuzzify_bar(10, 12, 11, BarPolicy::clamp_close), (TriangularFuzzyNumber{10, 11, 11}));
    EXPECT_THROW(fuzzify_bar(12, 11, 10, BarPolicy::clamp_close), MalformedBarError);
}

TEST(TriangularFuzzyNumber, RejectsUnorderedOrNonFinite) {
    EXPECT_THROW((TriangularFuzzyNumber{3, 2, 4}), DomainError);
    EXPECT_THROW((TriangularFuzzyNumber{1, 2, std::nan("")}), DomainError);
}

namespace {

TriangularFuzzyNumber random_tfn(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    double v[3] = {u(rng), u(rng), u(rng)};
    std::sort(v, v + 3);
    return {v[0], v[1], v[2]};
}

}  // namespace

TEST(FuzzyProperties, AlphaCutsNestAndContainOnlyHighMembership) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_tfn(rng);
        double a1 = unit(rng);
        double a2 = unit(rng);
        if (a1 > a2) {
            std::swap(a1, a2);
        }
        const auto outer = alpha_cut(a, a1);
        const auto inner = alpha_cut(a, a2);
        ASSERT_LE(outer.lo, inner.lo + 1e-12);
        ASSERT_GE(outer.hi, inner.hi - 1e-12);
        ASSERT_LE(inner.lo, inner.hi);
        if (a2 > 0.0) {
            const double x = inner.lo + unit(rng) * (inner.hi - inner.lo);
            ASSERT_GE(membership(a, x), a2 - 1e-12);
        }
    }
}

TEST(FuzzyProperties, MembershipIsOneOnlyAtKernelAndZeroOutsideSupport) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-150.0, 150.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_tfn(rng);
        if (a.left() == a.kernel() || a.kernel() == a.right()) {
            continue;
        }
        const double x = u(rng);
        const double m = membership(a, x);
        ASSERT_GE(m, 0.0);
        ASSERT_LE(m, 1.0);
        if (x <= a.left() || x >= a.right()) {
            ASSERT_EQ(m, 0.0);
        } else if (x != a.kernel()) {
            ASSERT_LT(m, 1.0);
            ASSERT_GT(m, 0.0);
        }
    }
}

TEST(FuzzyProperties, ExpectationAffineInWeightAndBounded) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_tfn(rng);
        const double lf = unit(rng);
        const double e = fuzzy_expectation(a, OptimismWeight{lf});
        const double e0 = fuzzy_expectation(a, OptimismWeight{0.0});
        const double slope = (a.right() - a.left()) / 2.0;
        ASSERT_NEAR(e, e0 + slope * lf, 1e-9);
        ASSERT_GE(e, (a.left() + a.kernel()) / 2.0 - 1e-9);
        ASSERT_LE(e, (a.kernel() + a.right()) / 2.0 + 1e-9);
        ASSERT_NEAR(fuzzy_expectation(a, OptimismWeight{0.5}),
                    (a.left() / 2.0 + a.kernel() + a.right() / 2.0) / 2.0, 1e-9);
    }
}
