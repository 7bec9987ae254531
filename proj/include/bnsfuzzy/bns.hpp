#pragma once

/// Barndorff-Nielsen–Shephard stochastic volatility: classical, generalized
/// (correlated variance subordinator) and refined (convex combination of two
/// subordinators) variants, plus integrated/realized variance and the
/// log-return correlation functionals.
///
/// Subordinators are compound Poisson processes with exponential jump sizes.
/// Jumps are drawn in continuous time on the calendar clock (arrival intensity
/// a*lam for the time-changed process Z_{lam t}) and then aggregated onto the
/// simulation grid, so a given seed produces the same jumps for every dt.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "bnsfuzzy/error.hpp"
#include "bnsfuzzy/rng.hpp"

namespace bnsfuzzy::bns {

/// Compound Poisson subordinator: jumps arrive at rate `jump_rate` (a) per unit
/// of the subordinator clock, sizes are Exp(`jump_scale`) (rate b).
struct SubordinatorParams {
    double jump_rate = 1.0;
    double jump_scale = 1.0;

    /// E[Z_1] = a/b.
    double mean() const { return jump_rate / jump_scale; }
    /// Var[Z_1] = 2a/b^2.
    double variance() const { return 2.0 * jump_rate / (jump_scale * jump_scale); }

    void validate(const char* name) const {
        if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) {
            throw DomainError(std::string(name) + ": jump rate must be >= 0");
        }
        if (!(jump_scale > 0.0) || !std::isfinite(jump_scale)) {
            throw DomainError(std::string(name) + ": jump scale must be > 0");
        }
    }
};

struct BnsParams {
    double mu = 0.0;
    double beta = 0.0;
    double rho = -1.0;         // leverage, <= 0
    double lam = 1.0;          // OU rate, > 0
    double rho_prime = 1.0;    // generalized-model correlation in [0,1]
    double theta = 0.0;        // return mixing in [0,1]
    double theta_prime = 0.0;  // variance mixing in [0,1]
    SubordinatorParams z{};
    SubordinatorParams z_b{};

    /// Throws on hard violations; returns soft warnings (Z^(b) should carry the
    /// greater Levy intensity, a_b/b_b >= a/b).
    std::vector<std::string> validate() const {
        auto unit = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DomainError(std::string(name) + " must lie in [0,1], got " +
                                  std::to_string(v));
            }
        };
        if (!std::isfinite(mu) || !std::isfinite(beta)) {
            throw DomainError("mu and beta must be finite");
        }
        if (!(rho <= 0.0) || !std::isfinite(rho)) {
            throw DomainError("rho must be <= 0, got " + std::to_string(rho));
        }
        if (!(lam > 0.0) || !std::isfinite(lam)) {
            throw DomainError("lambda must be > 0, got " + std::to_string(lam));
        }
        unit(rho_prime, "rho_prime");
        unit(theta, "theta");
        unit(theta_prime, "theta_prime");
        z.validate("z");
        z_b.validate("z_b");
        std::vector<std::string> warnings;
        if (z_b.mean() < z.mean()) {
            warnings.push_back("z_b has smaller Levy intensity than z (a_b/b_b < a/b)");
        }
        return warnings;
    }
};

enum class Model { classical, generalized, refined };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::classical: return "classical";
        case Model::generalized: return "generalized";
        case Model::refined: return "refined";
    }
    return "?";
}

/// Discretized joint path on the grid t_k = k*dt, k = 0..n.
struct SimPath {
    Model model = Model::classical;
    BnsParams params{};
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> x;        // log-return X_t
    std::vector<double> sigma2;   // variance
    std::vector<double> s;        // price S_0 exp(X_t)
    std::vector<double> jump_z;   // cumulative raw jumps of Z_{lam t}
    std::vector<double> jump_zb;  // cumulative raw jumps of Z^(b) (refined) or Z* (generalized)

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    /// Grid index of time t; t must be a grid point (relative tolerance 1e-6 of dt).
    std::size_t index_of(double t) const {
        if (!(t >= -1e-12) || t > horizon() + 1e-6 * dt) {
            throw DomainError("time " + std::to_string(t) + " outside path [0, " +
                              std::to_string(horizon()) + "]");
        }
        const double k = std::round(t / dt);
        if (std::abs(k * dt - t) > 1e-6 * dt) {
            throw DomainError("time " + std::to_string(t) + " is not on the simulation grid");
        }
        return static_cast<std::size_t>(k);
    }
};

/// Jump arrival times (calendar clock) and sizes of Z_{lam t} on [0, horizon].
struct JumpEvents {
    std::vector<double> times;
    std::vector<double> sizes;
};

inline JumpEvents simulate_jump_events(const SubordinatorParams& p, double lam, double horizon,
                                       Engine& rng) {
    JumpEvents ev;
    const double intensity = p.jump_rate * lam;
    if (intensity <= 0.0) {
        return ev;
    }
    std::exponential_distribution<double> gap(intensity);
    std::exponential_distribution<double> size(p.jump_scale);
    double t = gap(rng);
    while (t <= horizon) {
        ev.times.push_back(t);
        ev.sizes.push_back(size(rng));
        t += gap(rng);
    }
    return ev;
}

/// Sums jumps falling in (t_k, t_{k+1}] into increment k.
inline std::vector<double> aggregate_jumps(const JumpEvents& ev, std::size_t steps, double dt) {
    std::vector<double> inc(steps, 0.0);
    for (std::size_t j = 0; j < ev.times.size(); ++j) {
        const double pos = std::ceil(ev.times[j] / dt) - 1.0;
        std::size_t k = pos < 0.0 ? 0 : static_cast<std::size_t>(pos);
        if (k >= steps) {
            k = steps - 1;
        }
        inc[k] += ev.sizes[j];
    }
    return inc;
}

namespace detail {

inline std::size_t grid_steps(double horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("dt must be > 0");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("horizon must be > 0");
    }
    if (dt > horizon * (1.0 + 1e-12)) {
        throw DomainError("dt must not exceed the horizon");
    }
    const double n = std::round(horizon / dt);
    if (std::abs(n * dt - horizon) > 1e-6 * dt) {
        throw DomainError("horizon " + std::to_string(horizon) +
                          " is not an integer multiple of dt " + std::to_string(dt));
    }
    return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Per-step increments of Z_{lam t} on the grid of step dt. Deterministic in seed;
/// identical to the Z increments of a simulated path with the same seed.
inline std::vector<double> simulate_subordinator(const SubordinatorParams& p, double lam,
                                                 double horizon, double dt, std::uint64_t seed) {
    p.validate("subordinator");
    if (!(lam > 0.0)) {
        throw DomainError("lambda must be > 0");
    }
    const std::size_t n = detail::grid_steps(horizon, dt);
    Engine rng = make_engine(seed, Stream::subordinator);
    return aggregate_jumps(simulate_jump_events(p, lam, n * dt, rng), n, dt);
}

/// Euler scheme shared by the three model variants:
///   X   += (mu + beta sigma2) dt + sigma sqrt(dt) N(0,1) + rho * (return jump mix)
///   sigma2 += -lam sigma2 dt + (variance jump mix)
inline SimPath simulate(Model model, const BnsParams& p, double s0, double sigma2_0,
                        double horizon, double dt, std::uint64_t seed) {
    p.validate();
    if (!(s0 > 0.0) || !std::isfinite(s0)) {
        throw DomainError("s0 must be > 0");
    }
    if (!(sigma2_0 > 0.0) || !std::isfinite(sigma2_0)) {
        throw DomainError("sigma2_0 must be > 0");
    }
    const std::size_t n = detail::grid_steps(horizon, dt);
    if (p.lam * dt >= 1.0) {
        throw StabilityError("lambda*dt = " + std::to_string(p.lam * dt) +
                             " >= 1: variance decay step is unstable");
    }
    const double end = static_cast<double>(n) * dt;

    Engine w_rng = make_engine(seed, Stream::brownian);
    Engine z_rng = make_engine(seed, Stream::subordinator);
    const auto dz = aggregate_jumps(simulate_jump_events(p.z, p.lam, end, z_rng), n, dt);
    std::vector<double> dz2(n, 0.0);
    if (model != Model::classical) {
        Engine z2_rng = make_engine(seed, Stream::secondary_subordinator);
        const auto& law = model == Model::refined ? p.z_b : p.z;
        dz2 = aggregate_jumps(simulate_jump_events(law, p.lam, end, z2_rng), n, dt);
    }
    std::normal_distribution<double> normal(0.0, 1.0);

    SimPath path;
    path.model = model;
    path.params = p;
    path.dt = dt;
    path.seed = seed;
    for (auto* v : {&path.times, &path.x, &path.sigma2, &path.s, &path.jump_z, &path.jump_zb}) {
        v->resize(n + 1);
    }
    path.times[0] = 0.0;
    path.x[0] = 0.0;
    path.sigma2[0] = sigma2_0;
    path.s[0] = s0;
    path.jump_z[0] = 0.0;
    path.jump_zb[0] = 0.0;

    const double sqrt_dt = std::sqrt(dt);
    const double rp_other = std::sqrt(1.0 - p.rho_prime * p.rho_prime);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = path.sigma2[k];
        double return_jump = dz[k];
        double variance_jump = dz[k];
        switch (model) {
            case Model::classical:
                break;
            case Model::generalized:
                variance_jump = p.rho_prime * dz[k] + rp_other * dz2[k];
                break;
            case Model::refined:
                return_jump = (1.0 - p.theta) * dz[k] + p.theta * dz2[k];
                variance_jump = (1.0 - p.theta_prime) * dz[k] + p.theta_prime * dz2[k];
                break;
        }
        const double shock = normal(w_rng);
        path.x[k + 1] = path.x[k] + (p.mu + p.beta * v) * dt + std::sqrt(v) * sqrt_dt * shock +
                        p.rho * return_jump;
        path.sigma2[k + 1] = v - p.lam * v * dt + variance_jump;
        path.times[k + 1] = static_cast<double>(k + 1) * dt;
        path.s[k + 1] = s0 * std::exp(path.x[k + 1]);
        path.jump_z[k + 1] = path.jump_z[k] + dz[k];
        path.jump_zb[k + 1] = path.jump_zb[k] + dz2[k];
        if (!std::isfinite(path.x[k + 1]) || !std::isfinite(path.sigma2[k + 1])) {
            throw NumericError("non-finite state at step " + std::to_string(k + 1));
        }
    }
    return path;
}

/// Long-run mean of sigma2 under the model's variance jump mix.
inline double stationary_variance(Model model, const BnsParams& p) {
    switch (model) {
        case Model::classical:
            return p.z.mean();
        case Model::generalized:
            return (p.rho_prime + std::sqrt(1.0 - p.rho_prime * p.rho_prime)) * p.z.mean();
        case Model::refined:
            return (1.0 - p.theta_prime) * p.z.mean() + p.theta_prime * p.z_b.mean();
    }
    return p.z.mean();
}

inline SimPath simulate_classical(const BnsParams& p, double s0, double sigma2_0, double horizon,
                                  double dt, std::uint64_t seed) {
    return simulate(Model::classical, p, s0, sigma2_0, horizon, dt, seed);
}

/// Variance driven by rho' dZ + sqrt(1 - rho'^2) dZ*, with Z* ~ Z independent.
inline SimPath simulate_generalized(const BnsParams& p, double s0, double sigma2_0,
                                    double horizon, double dt, std::uint64_t seed) {
    return simulate(Model::generalized, p, s0, sigma2_0, horizon, dt, seed);
}

inline SimPath simulate_refined(const BnsParams& p, double s0, double sigma2_0, double horizon,
                                double dt, std::uint64_t seed) {
    return simulate(Model::refined, p, s0, sigma2_0, horizon, dt, seed);
}

/// eps(s, T) = (1 - exp(-lam (T - s))) / lam.
inline double epsilon(double s, double T, double lam) {
    if (s > T) {
        throw DomainError("epsilon requires s <= T");
    }
    if (!(lam > 0.0)) {
        throw DomainError("epsilon requires lambda > 0");
    }
    return -std::expm1(-lam * (T - s)) / lam;
}

/// Trapezoidal integral of sigma2 between grid indices i <= j.
inline double trapezoid_sigma2(const SimPath& path, std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t k = i; k < j; ++k) {
        acc += 0.5 * (path.sigma2[k] + path.sigma2[k + 1]);
    }
    return acc * path.dt;
}

/// Integrated variance over [t, T] from the OU solution:
/// eps(t,T) sigma2_t + sum over jumps in (t,T] of eps(s,T) ((1-theta') dZ + theta' dZ^(b)).
inline double integrated_variance(const SimPath& path, double t, double T, double theta_prime) {
    if (t > T) {
        throw DomainError("integrated variance requires t <= T");
    }
    if (!(theta_prime >= 0.0 && theta_prime <= 1.0)) {
        throw DomainError("theta_prime must lie in [0,1]");
    }
    const std::size_t i = path.index_of(t);
    const std::size_t j = path.index_of(T);
    const double lam = path.params.lam;
    const double Tg = path.times[j];
    double acc = epsilon(path.times[i], Tg, lam) * path.sigma2[i];
    for (std::size_t k = i; k < j; ++k) {
        const double dz = path.jump_z[k + 1] - path.jump_z[k];
        const double dzb = path.jump_zb[k + 1] - path.jump_zb[k];
        if (dz == 0.0 && dzb == 0.0) {
            continue;
        }
        acc += epsilon(path.times[k + 1], Tg, lam) * ((1.0 - theta_prime) * dz + theta_prime * dzb);
    }
    return acc;
}

/// Realized variance on [0, T]: (1/T) int sigma2 + rho^2 (1-theta)^2 lam Var Z_1
/// + rho^2 theta^2 lam Var Z^(b)_1, the integral by the trapezoidal rule.
inline double realized_variance(const SimPath& path, double T, const BnsParams& p) {
    if (!(T > 0.0)) {
        throw DomainError("realized variance requires T > 0");
    }
    const std::size_t j = path.index_of(T);
    const double avg = trapezoid_sigma2(path, 0, j) / path.times[j];
    const double r2 = p.rho * p.rho;
    return avg + r2 * (1.0 - p.theta) * (1.0 - p.theta) * p.lam * p.z.variance() +
           r2 * p.theta * p.theta * p.lam * p.z_b.variance();
}

namespace detail {

inline void check_corr_times(const SimPath& path, double t, double s) {
    if (!(t > s)) {
        throw DomainError("correlation requires t > s");
    }
    if (!(s > 0.0)) {
        throw DomainError("correlation requires s > 0");
    }
    (void)path.index_of(t);
}

}  // namespace detail

/// Corr(X_t, X_s) for the classical model evaluated on a realized path:
/// (I_s + rho^2 J(s)) / sqrt((I_t + t rho^2 lam Var Z_1)(I_s + s rho^2 lam Var Z_1)).
inline double correlation_classical(const SimPath& path, double t, double s, const BnsParams& p) {
    detail::check_corr_times(path, t, s);
    const std::size_t it = path.index_of(t);
    const std::size_t is = path.index_of(s);
    const double i_s = trapezoid_sigma2(path, 0, is);
    const double i_t = i_s + trapezoid_sigma2(path, is, it);
    const double r2 = p.rho * p.rho;
    const double jump_var = r2 * p.lam * p.z.variance();
    const double num = i_s + r2 * path.jump_z[is];
    return num / std::sqrt((i_t + path.times[it] * jump_var) * (i_s + path.times[is] * jump_var));
}

/// Corr(X_t, X_s) for the refined model:
/// (I_s + rho^2 (1-theta)^2 J(s) + rho^2 theta^2 J^(b)(s)) / sqrt(alpha(t) alpha(s)),
/// alpha(v) = I_v + v rho^2 lam ((1-theta)^2 Var Z_1 + theta^2 Var Z^(b)_1).
/// Throws NumericError if the value leaves [-1, 1].
inline double correlation_refined(const SimPath& path, double t, double s, const BnsParams& p) {
    detail::check_corr_times(path, t, s);
    const std::size_t it = path.index_of(t);
    const std::size_t is = path.index_of(s);
    const double i_s = trapezoid_sigma2(path, 0, is);
    const double i_t = i_s + trapezoid_sigma2(path, is, it);
    const double r2 = p.rho * p.rho;
    const double w = 1.0 - p.theta;
    const double jump_var =
        r2 * p.lam * (w * w * p.z.variance() + p.theta * p.theta * p.z_b.variance());
    const double num =
        i_s + r2 * w * w * path.jump_z[is] + r2 * p.theta * p.theta * path.jump_zb[is];
    const double corr =
        num / std::sqrt((i_t + path.times[it] * jump_var) * (i_s + path.times[is] * jump_var));
    if (!(std::abs(corr) <= 1.0 + 1e-12)) {
        throw NumericError("refined correlation " + std::to_string(corr) +
                           " outside [-1, 1] at s=" + std::to_string(s) +
                           ": realized jumps J(s) exceed their expectation-level variance term");
    }
    return corr;
}

/// CSV with header `t,X,sigma2,S,Jz,Jzb`, one row per grid point.
inline void write_path_csv(std::ostream& out, const SimPath& path) {
    out << "t,X,sigma2,S,Jz,Jzb\n";
    char buf[256];
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", path.times[k],
                      path.x[k], path.sigma2[k], path.s[k], path.jump_z[k], path.jump_zb[k]);
        out << buf;
    }
}

}  // namespace bnsfuzzy::bns
