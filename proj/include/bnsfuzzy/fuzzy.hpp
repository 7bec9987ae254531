#pragma once

/// Triangular fuzzy numbers and the daily fuzzy price built from (low, close, high).
///
/// Note on naming: the optimism weight of the fuzzy expectation is called
/// `lambda_f` throughout. It is unrelated to the OU mean-reversion rate `lam`
/// of the volatility model.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::fuzzy {

/// Fuzzy number (a_l, a_m, a_u) with a_l <= a_m <= a_u. Prices are not normalized to [0,1].
class TriangularFuzzyNumber {
public:
    TriangularFuzzyNumber(double left, double kernel, double right)
        : l_{left}, m_{kernel}, u_{right} {
        if (!(std::isfinite(l_) && std::isfinite(m_) && std::isfinite(u_))) {
            throw DomainError("triangular fuzzy number requires finite values");
        }
        if (!(l_ <= m_ && m_ <= u_)) {
            throw DomainError("triangular fuzzy number requires a_l <= a_m <= a_u, got (" +
                              std::to_string(l_) + ", " + std::to_string(m_) + ", " +
                              std::to_string(u_) + ")");
        }
    }

    /// Crisp real as a degenerate fuzzy number.
    static TriangularFuzzyNumber crisp(double c) { return {c, c, c}; }

    double left() const noexcept { return l_; }
    double kernel() const noexcept { return m_; }
    double right() const noexcept { return u_; }
    bool is_crisp() const noexcept { return l_ == m_ && m_ == u_; }

    friend bool operator==(const TriangularFuzzyNumber&, const TriangularFuzzyNumber&) = default;

private:
    double l_;
    double m_;
    double u_;
};

/// Risk-preference weight lambda_f in [0,1]; 0.5 is risk-neutral.
class OptimismWeight {
public:
    explicit OptimismWeight(double lambda_f) : value_{lambda_f} {
        if (!(lambda_f >= 0.0 && lambda_f <= 1.0)) {
            throw DomainError("lambda_f must lie in [0,1], got " + std::to_string(lambda_f));
        }
    }
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Closed interval [lo, hi].
struct Interval {
    double lo;
    double hi;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Piecewise-linear membership. Degenerate edges give 1 at the shared kernel point.
inline double membership(const TriangularFuzzyNumber& a, double x) noexcept {
    const double l = a.left();
    const double m = a.kernel();
    const double u = a.right();
    if (x == m) {
        return 1.0;
    }
    if (x <= l || x >= u) {
        return 0.0;
    }
    if (x < m) {
        return (x - l) / (m - l);
    }
    return (u - x) / (u - m);
}

/// Level set {x : membership >= alpha} as [(1-a)a_l + a*a_m, (1-a)a_u + a*a_m].
inline Interval alpha_cut(const TriangularFuzzyNumber& a, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha must lie in [0,1], got " + std::to_string(alpha));
    }
    return {(1.0 - alpha) * a.left() + alpha * a.kernel(),
            (1.0 - alpha) * a.right() + alpha * a.kernel()};
}

/// E(A) = [(1 - lambda_f) a_l + a_m + lambda_f a_u] / 2.
inline double fuzzy_expectation(const TriangularFuzzyNumber& a, OptimismWeight w) noexcept {
    const double lf = w.value();
    return ((1.0 - lf) * a.left() + a.kernel() + lf * a.right()) / 2.0;
}

/// Raised when a bar's close lies outside [low, high]; carries the offending values.
class MalformedBarError : public DataError {
public:
    MalformedBarError(double low, double close, double high)
        : DataError("malformed bar: close " + std::to_string(close) + " outside [low " +
                    std::to_string(low) + ", high " + std::to_string(high) + "]"),
          low_{low},
          close_{close},
          high_{high} {}

    double low() const noexcept { return low_; }
    double close() const noexcept { return close_; }
    double high() const noexcept { return high_; }

private:
    double low_;
    double close_;
    double high_;
};

enum class BarPolicy { reject, clamp_close };

/// Daily fuzzy price (low, close, high).
inline TriangularFuzzyNumber fuzzify_bar(double low, double close, double high,
                                         BarPolicy policy = BarPolicy::reject) {
    if (!(std::isfinite(low) && std::isfinite(close) && std::isfinite(high))) {
        throw DataError("bar prices must be finite");
    }
    if (low > high) {
        throw MalformedBarError(low, close, high);
    }
    if (close < low || close > high) {
        if (policy == BarPolicy::reject) {
            throw MalformedBarError(low, close, high);
        }
        close = std::clamp(close, low, high);
    }
    return {low, close, high};
}

}  // namespace bnsfuzzy::fuzzy
