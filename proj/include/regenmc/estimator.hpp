#pragma once

// Regenerative-sequence Monte Carlo estimation of lambda = integral of f
// over the line.
//
// The expected cycle occupation measure is 2 x Lebesgue (the mean cycle
// local time is 2 at every level), so the point estimate divides the mean
// per-cycle integral by that occupation constant:
//
//   lambda* = (1/(2 N(t))) * integral_0^{T_N(t)} f(B(s)) ds
//
// Per-cycle contributions xi_j/2 are i.i.d. with mean lambda, which gives
// the plug-in variance sigma^2 = mean((xi/2)^2) - lambda*^2 and the normal
// confidence interval lambda* +/- z_alpha sigma / sqrt(N).
//
// Brownian time past the last completed regeneration is discarded from both
// the numerator and N(t); the remainder is asymptotically negligible and
// keeps the cycle contributions i.i.d. With several streams, each stream
// contributes complete cycles from its share of the time budget and the
// pooled cycle count plays the role of N(t).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "regenmc/errors.hpp"
#include "regenmc/integrand.hpp"
#include "regenmc/local_time.hpp"
#include "regenmc/regeneration.hpp"
#include "regenmc/stats.hpp"

namespace regenmc {

/// Mean cycle local time at every level; the proportionality constant
/// between the expected cycle occupation measure and Lebesgue measure.
inline constexpr double kOccupationConstant = 2.0;

struct RsmcResult {
    double lambda_star = 0.0;
    std::size_t n_cycles = 0;
    double sigma_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double alpha = 0.05;
    double horizon_t = 0.0;
    std::size_t truncated_cycles = 0;
    std::uint64_t seed = 0;
    unsigned streams = 1;
    double dt = 0.0;
};

struct CycleIntegralAccumulator {
    double xi_sum = 0.0;
    double xi_sq_sum = 0.0;
    std::size_t n = 0;

    void add(double xi) {
        xi_sum += xi;
        xi_sq_sum += xi * xi;
        ++n;
    }
    void merge(const CycleIntegralAccumulator& other) {
        xi_sum += other.xi_sum;
        xi_sq_sum += other.xi_sq_sum;
        n += other.n;
    }
};

/// Left-endpoint Riemann sum of f over one retained cycle path:
/// dt * sum of f at the sample values, the closing endpoint excluded.
inline double cycle_integral(const Cycle& cycle, const Expr& f, double dt) {
    if (cycle.samples.empty()) throw NoSamples();
    const CompiledExpr compiled(f);
    double sum = 0.0;
    const std::size_t n_steps = cycle.samples.size() - 1;
    for (std::size_t i = 0; i < n_steps; ++i) sum += compiled(cycle.samples[i].second);
    return sum * dt;
}

namespace detail {

struct StreamEstimate {
    CycleIntegralAccumulator acc;
    std::size_t truncated = 0;
};

/// One stream's worth of complete cycles within `budget_steps`. The cycle in
/// progress when the budget runs out is the discarded partial; cycles that
/// exhaust `cycle_cap` steps on their own are censoring events.
inline StreamEstimate run_estimate_stream(const CompiledExpr& f, std::uint64_t seed,
                                          std::uint64_t stream_id, double dt,
                                          std::uint64_t budget_steps, std::uint64_t cycle_cap) {
    PathCursor cursor(seed, stream_id, dt);
    StreamEstimate out;
    std::uint64_t used = 0;
    while (used < budget_steps) {
        const std::uint64_t remaining = budget_steps - used;
        const std::uint64_t cap = std::min(cycle_cap, remaining);
        double xi = 0.0;
        const CycleRun run = run_cycle(cursor, cap, [&](double b) { xi += f(b); });
        used += run.steps;
        if (run.completed) {
            out.acc.add(xi * dt);
        } else if (run.steps >= cycle_cap) {
            ++out.truncated;  // censored: ran into the per-cycle cap
        }
        // else: partial final cycle, discarded by construction
    }
    return out;
}

}  // namespace detail

struct EstimateConfig {
    double dt = 1e-4;
    std::uint64_t seed = 0;
    unsigned streams = 0;  // 0: one per logical core
    double alpha = 0.05;
    std::uint64_t max_steps_per_cycle = 1'000'000'000;
    bool check_integrability = true;

    unsigned effective_streams() const {
        if (streams > 0) return streams;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }
};

/// Plug-in summary of pooled cycle integrals: lambda* = mean(xi)/2,
/// sigma^2 = mean((xi/2)^2) - lambda*^2, normal interval at level alpha.
inline RsmcResult summarize_cycles(const CycleIntegralAccumulator& acc, double horizon_t,
                                   double alpha) {
    if (acc.n < 2)
        throw TooFewCycles("estimate: " + std::to_string(acc.n) +
                           " complete cycles; extend the horizon");
    const double n = static_cast<double>(acc.n);
    const double c = kOccupationConstant;
    const double lambda = acc.xi_sum / (c * n);
    const double sigma_sq = std::max(0.0, acc.xi_sq_sum / (c * c * n) - lambda * lambda);
    const double sigma = std::sqrt(sigma_sq);
    const double half_width = two_sided_z(alpha) * sigma / std::sqrt(n);
    RsmcResult result;
    result.lambda_star = lambda;
    result.n_cycles = acc.n;
    result.sigma_hat = sigma;
    result.ci_low = lambda - half_width;
    result.ci_high = lambda + half_width;
    result.alpha = alpha;
    result.horizon_t = horizon_t;
    return result;
}

/// Point estimate and confidence interval for the integral of f, from
/// complete regeneration cycles up to Brownian time `horizon_t`.
inline RsmcResult estimate(const Expr& f, double horizon_t, const EstimateConfig& config) {
    if (!(horizon_t > 0.0)) throw Error("estimate: horizon_t must be > 0");
    if (config.check_integrability) {
        const IntegrabilityReport l1 = check_weighted_integrability(f, 0.0);
        if (l1.verdict == IntegrabilityVerdict::infinite)
            throw IntegrabilityRefused(
                "integral of |f| appears infinite; the estimator has no almost-sure limit");
    }
    const CompiledExpr compiled(f);
    const unsigned n_streams = config.effective_streams();
    const std::uint64_t budget_steps =
        static_cast<std::uint64_t>(std::llround(horizon_t / config.dt)) / n_streams;

    std::vector<detail::StreamEstimate> parts(n_streams);
    parallel_for(n_streams, n_streams, [&](std::size_t s) {
        parts[s] = detail::run_estimate_stream(compiled, config.seed, s, config.dt, budget_steps,
                                               config.max_steps_per_cycle);
    });

    CycleIntegralAccumulator acc;
    std::size_t truncated = 0;
    for (const auto& part : parts) {  // merge in stream order
        acc.merge(part.acc);
        truncated += part.truncated;
    }
    RsmcResult result = summarize_cycles(acc, horizon_t, config.alpha);
    result.truncated_cycles = truncated;
    result.seed = config.seed;
    result.streams = n_streams;
    result.dt = config.dt;
    return result;
}

// ---------------------------------------------------------------------------
// Raw-path estimators
// ---------------------------------------------------------------------------

namespace detail {

struct PathIntegrals {
    double f_integral = 0.0;
    double unit_interval_time = 0.0;
};

inline PathIntegrals run_raw_path(const CompiledExpr& f, std::uint64_t seed,
                                  std::uint64_t stream_id, double dt,
                                  std::uint64_t n_steps) {
    PathCursor cursor(seed, stream_id, dt);
    PathIntegrals out;
    double b = 0.0;
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        out.f_integral += f(b);
        if (b >= 0.0 && b <= 1.0) out.unit_interval_time += 1.0;
        b = cursor.step().second;
    }
    out.f_integral *= dt;
    out.unit_interval_time *= dt;
    return out;
}

}  // namespace detail

/// Ratio estimator: path integral of f divided by the time spent in [0,1].
/// Streams contribute independent path segments; both sums are pooled.
inline double ratio_estimate(const Expr& f, double horizon_t, const EstimateConfig& config) {
    if (!(horizon_t > 0.0)) throw Error("ratio_estimate: horizon_t must be > 0");
    const CompiledExpr compiled(f);
    const unsigned n_streams = config.effective_streams();
    const std::uint64_t steps =
        static_cast<std::uint64_t>(std::llround(horizon_t / config.dt)) / n_streams;
    std::vector<detail::PathIntegrals> parts(n_streams);
    parallel_for(n_streams, n_streams, [&](std::size_t s) {
        parts[s] = detail::run_raw_path(compiled, config.seed, s, config.dt, steps);
    });
    double num = 0.0, den = 0.0;
    for (const auto& part : parts) {
        num += part.f_integral;
        den += part.unit_interval_time;
    }
    if (den == 0.0)
        throw ZeroDenominator("ratio_estimate: path never visited [0,1]; horizon too short");
    return num / den;
}

/// Kallianpur-Robbins normalization: t^{-1/2} times the path integral of f.
/// Always a single path; its limit law is about one trajectory, and pooling
/// segments would change it.
inline double kr_estimate(const Expr& f, double horizon_t, const EstimateConfig& config) {
    if (!(horizon_t > 0.0)) throw Error("kr_estimate: horizon_t must be > 0");
    const CompiledExpr compiled(f);
    const std::uint64_t steps = static_cast<std::uint64_t>(std::llround(horizon_t / config.dt));
    const auto integrals = detail::run_raw_path(compiled, config.seed, 0, config.dt, steps);
    return integrals.f_integral / std::sqrt(horizon_t);
}

// ---------------------------------------------------------------------------
// Limit laws
// ---------------------------------------------------------------------------

/// One draw of the t^{1/4} limit variable Q = B(V): V = 1/(2 Z0^2) (stable
/// law of order 1/2, Laplace transform e^{-sqrt(s)}) time-changing an
/// independent Brownian motion, so Q = sqrt(V) Z1.
inline double sample_limit_q(RandomStream& rng) {
    const double z0 = rng.normal();
    const double v = 1.0 / (2.0 * z0 * z0);
    return std::sqrt(v) * rng.normal();
}

struct TQuarterReport {
    GofReport ks;
    double lambda = 0.0;     // reference value of the integral
    double sigma = 0.0;      // calibrated sigma
    std::size_t replications = 0;
    double t = 0.0;
    std::vector<double> normalized_errors;
};

/// Distribution check of t^{1/4} (lambda*(t) - lambda) / sigma across
/// independent replications against draws of the limit variable Q.
/// lambda comes from quadrature; sigma is calibrated once from a run 10x
/// longer than the test horizon, as the theorem takes sigma as known.
inline TQuarterReport t_quarter_limit_check(const Expr& f, double t, std::size_t replications,
                                            const EstimateConfig& config,
                                            std::size_t reference_draws = 2000) {
    const CompiledExpr compiled(f);
    TQuarterReport report;
    report.t = t;
    report.replications = replications;
    report.lambda = integrate([&](double x) { return compiled(x); }, -64.0, 64.0);

    EstimateConfig calib = config;
    calib.streams = config.effective_streams();
    calib.seed = config.seed + 1'000'003;
    const RsmcResult long_run = estimate(f, 10.0 * t, calib);
    report.sigma = long_run.sigma_hat;
    if (!(report.sigma > 0.0))
        throw Error("t_quarter_limit_check: sigma is degenerate (constant cycle integrals)");

    report.normalized_errors.resize(replications);
    const double t_quarter = std::pow(t, 0.25);
    // Replications must be single-path: the t^{1/4} limit law mixes over the
    // renewal count of one trajectory. Parallelism goes across replications.
    parallel_for(config.effective_streams(), replications, [&](std::size_t r) {
        EstimateConfig rep_config = config;
        rep_config.streams = 1;
        rep_config.seed = config.seed + r;
        const RsmcResult res = estimate(f, t, rep_config);
        report.normalized_errors[r] =
            t_quarter * (res.lambda_star - report.lambda) / report.sigma;
    });

    RandomStream rng(config.seed + 999'331, 0);
    std::vector<double> reference(std::max(reference_draws, replications));
    for (double& q : reference) q = sample_limit_q(rng);
    report.ks = ks_two_sample(report.normalized_errors, reference, 0.01, "t_quarter_vs_limit_q");
    report.ks.metadata["t"] = std::to_string(t);
    report.ks.metadata["sigma"] = std::to_string(report.sigma);
    return report;
}

}  // namespace regenmc
