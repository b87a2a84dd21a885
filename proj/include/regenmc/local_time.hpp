#pragma once

// Local time of Brownian motion at the regeneration time T, level by level.
//
// The law of L(T,x) is a point mass at zero (for levels the cycle may never
// reach) mixed with one or two independent exponentials:
//   x > 1     : atom 1 - 1/x,      positive part Exp(mean 2x)
//   x in [0,1]: no atom,           Exp(mean 2x) + Exp(mean 2(1-x))
//   x < 0     : atom 1 - 1/(1-x),  positive part Exp(mean 2(1-x))
// A chi-squared(2) variable scaled by c is exponential with mean 2c, which
// is how the scale fields below encode the law. First moment is 2 at every
// level; the second moment is 8x / 8(x^2-x+1) / 8(1-x) by regime.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "regenmc/errors.hpp"
#include "regenmc/regeneration.hpp"
#include "regenmc/rng.hpp"

namespace regenmc {

enum class Regime { above_one, unit_interval, below_zero };

struct LocalTimeLaw {
    double x = 0.0;
    Regime regime = Regime::unit_interval;
    double atom_at_zero = 0.0;
    double scale_a = 0.0;  // mean of the first exponential component
    double scale_b = 0.0;  // mean of the second component; 0 outside [0,1]
};

/// P(L(T,x) > 0): 1/x above 1, certain on [0,1], 1/(1-x) below 0.
inline double hitting_prob(double x) {
    if (x > 1.0) return 1.0 / x;
    if (x < 0.0) return 1.0 / (1.0 - x);
    return 1.0;
}

inline LocalTimeLaw exact_law(double x) {
    LocalTimeLaw law;
    law.x = x;
    if (x > 1.0) {
        law.regime = Regime::above_one;
        law.atom_at_zero = 1.0 - 1.0 / x;
        law.scale_a = 2.0 * x;
        law.scale_b = 0.0;
    } else if (x < 0.0) {
        law.regime = Regime::below_zero;
        law.atom_at_zero = 1.0 - 1.0 / (1.0 - x);
        law.scale_a = 2.0 * (1.0 - x);
        law.scale_b = 0.0;
    } else {
        law.regime = Regime::unit_interval;
        law.atom_at_zero = 0.0;
        law.scale_a = 2.0 * x;
        law.scale_b = 2.0 * (1.0 - x);
    }
    return law;
}

/// One draw from the exact law: 0 with the atom mass, else the sum of the
/// exponential components (a component with zero scale contributes nothing).
inline double sample_exact(const LocalTimeLaw& law, RandomStream& rng) {
    if (law.atom_at_zero > 0.0 && rng.uniform() < law.atom_at_zero) return 0.0;
    double value = 0.0;
    if (law.scale_a > 0.0) value += rng.exponential(law.scale_a);
    if (law.scale_b > 0.0) value += rng.exponential(law.scale_b);
    return value;
}

inline double mean_local_time(double /*x*/) { return 2.0; }

inline double second_moment_local_time(double x) {
    if (x > 1.0) return 8.0 * x;
    if (x < 0.0) return 8.0 * (1.0 - x);
    return 8.0 * (x * x - x + 1.0);
}

/// CDF of L(T,x) under `law`. The two-rate hypoexponential form degrades
/// gracefully: a vanishing scale drops to a single exponential, near-equal
/// scales switch to the Gamma(2) limit form to dodge the cancellation in the
/// difference quotient.
inline double analytic_cdf(const LocalTimeLaw& law, double ell) {
    if (ell < 0.0) return 0.0;
    const double atom = law.atom_at_zero;
    if (law.regime != Regime::unit_interval) {
        return atom + (1.0 - atom) * (1.0 - std::exp(-ell / law.scale_a));
    }
    const double sa = law.scale_a;
    const double sb = law.scale_b;
    if (sa == 0.0 && sb == 0.0) return 1.0;
    if (sa == 0.0) return 1.0 - std::exp(-ell / sb);
    if (sb == 0.0) return 1.0 - std::exp(-ell / sa);
    if (std::abs(sa - sb) < 1e-9) {
        const double s = 0.5 * (sa + sb);
        return 1.0 - std::exp(-ell / s) * (1.0 + ell / s);
    }
    return 1.0 - (sa * std::exp(-ell / sa) - sb * std::exp(-ell / sb)) / (sa - sb);
}

/// E[exp(theta L(T,x))] in closed form, or nullopt when theta reaches the
/// regime's divergence threshold (1/(2x) above 1, 1/(2(1-x)) below 0, and
/// 1/(2 max(x, 1-x)) on the unit interval).
inline std::optional<double> mgf(double x, double theta) {
    const LocalTimeLaw law = exact_law(x);
    const double max_scale = std::max(law.scale_a, law.scale_b);
    if (max_scale > 0.0 && theta >= 1.0 / max_scale) return std::nullopt;
    double value = 1.0;
    if (law.scale_a > 0.0) value *= 1.0 / (1.0 - theta * law.scale_a);
    if (law.scale_b > 0.0) value *= 1.0 / (1.0 - theta * law.scale_b);
    return law.atom_at_zero + (1.0 - law.atom_at_zero) * value;
}

// ---------------------------------------------------------------------------
// Path-based occupation estimates
// ---------------------------------------------------------------------------

struct OccupationEstimate {
    double x = 0.0;
    double epsilon = 0.0;
    double value = 0.0;  // time in (x-eps, x+eps) over the cycle, divided by 2 eps
};

/// Occupation-density estimate of L(T,x) from one cycle's retained samples:
/// dt * #{left endpoints within (x-eps, x+eps)} / (2 eps). The closing
/// sample at t = duration is the right endpoint of the last step and is not
/// counted; the step size is read off the sample grid.
inline OccupationEstimate occupation_local_time(const Cycle& cycle, double x, double epsilon) {
    if (!(epsilon > 0.0)) throw Error("occupation_local_time: epsilon must be > 0");
    if (cycle.samples.size() < 2) throw NoSamples();
    const double dt = cycle.samples[1].first - cycle.samples[0].first;
    std::size_t count = 0;
    const std::size_t n_steps = cycle.samples.size() - 1;
    for (std::size_t i = 0; i < n_steps; ++i) {
        if (std::abs(cycle.samples[i].second - x) < epsilon) ++count;
    }
    return OccupationEstimate{x, epsilon, dt * static_cast<double>(count) / (2.0 * epsilon)};
}

// ---------------------------------------------------------------------------
// The process law on [0,1]
// ---------------------------------------------------------------------------

/// One draw of {L(T,x), x in grid} for an increasing grid in [0,1], via the
/// squared-Bessel-2 representation H1(x) + H2(1-x) with four independent
/// Brownian motions evaluated on the grid.
inline std::vector<double> sample_process_unit_interval(const std::vector<double>& grid,
                                                        RandomStream& rng) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > 1.0)
            throw GridOutOfRange("grid point " + std::to_string(grid[i]) + " outside [0,1]");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw GridOutOfRange("grid must be strictly increasing");
    }
    const std::size_t n = grid.size();
    // H1 along the grid in ascending order.
    std::vector<double> h1(n);
    {
        double b1 = 0.0, b2 = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sd = std::sqrt(grid[i] - prev);
            b1 += sd * rng.normal();
            b2 += sd * rng.normal();
            prev = grid[i];
            h1[i] = b1 * b1 + b2 * b2;
        }
    }
    // H2 at 1 - x: walk the reflected points in ascending order.
    std::vector<double> h2(n);
    {
        double b3 = 0.0, b4 = 0.0, prev = 0.0;
        for (std::size_t j = n; j-- > 0;) {  // 1 - grid[j] ascends as j descends
            const double u = 1.0 - grid[j];
            const double sd = std::sqrt(u - prev);
            b3 += sd * rng.normal();
            b4 += sd * rng.normal();
            prev = u;
            h2[j] = b3 * b3 + b4 * b4;
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = h1[i] + h2[i];
    return out;
}

/// Covariance of the process law: Cov(L(T,x), L(T,y)) on [0,1].
inline double process_covariance(double x, double y) {
    const double a = std::min(x, y);
    const double b = std::min(1.0 - x, 1.0 - y);
    return 4.0 * a * a + 4.0 * b * b;
}

}  // namespace regenmc
