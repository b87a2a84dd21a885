#pragma once

// Regeneration cycles of Brownian motion: the path from one visit to 0,
// through the first hit of 1, to the next return to 0. Cycle durations form
// a heavy-tailed renewal process (survival ~ C/sqrt(y)), so every cycle run
// carries a step budget and truncation is reported explicitly, never
// silently dropped.

#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "regenmc/brownian_path.hpp"
#include "regenmc/errors.hpp"
#include "regenmc/parallel.hpp"

namespace regenmc {

struct Cycle {
    double duration = 0.0;    // T_i - T_{i-1}
    double hit_one_at = 0.0;  // time of the first hit of level 1, relative to cycle start
    double xi = 0.0;          // per-cycle integrand integral, filled by the estimator
    std::vector<std::pair<double, double>> samples;  // (time, value), present iff retained
};

/// A cycle that ran out of its step budget. `elapsed` is the (censored)
/// duration reached before truncation; the true duration exceeds it.
struct Truncated {
    double elapsed = 0.0;
    std::uint64_t steps = 0;
    bool hit_one = false;
};

struct CycleOptions {
    bool retain_samples = false;
    std::uint64_t max_steps = 1'000'000'000;
};

namespace detail {

struct NullStepObserver {
    void operator()(double /*b*/) const {}
};

}  // namespace detail

struct CycleRun {
    bool completed = false;
    bool hit_one = false;
    double duration = 0.0;
    double hit_one_at = 0.0;
    std::uint64_t steps = 0;
};

/// Core cycle loop. The cursor must sit at a regeneration instant (b == 0);
/// on completion it is reset to 0 for the next cycle. `on_step` is called
/// once per step with the value at the step's left endpoint, which makes
/// accumulated quantities left-endpoint Riemann sums over the cycle.
///
/// Crossing semantics: a level counts as hit within a step when the endpoint
/// crosses it or a Bernoulli draw with the bridge crossing probability
/// succeeds; the crossing time is the end of the step.
template <class OnStep>
CycleRun run_cycle(PathCursor& cursor, std::uint64_t max_steps, OnStep&& on_step) {
    if (cursor.b() != 0.0) throw Error("run_cycle: cursor not at a regeneration instant");
    const double dt = cursor.dt();
    CycleRun run;
    bool above_phase = false;  // false: waiting for 1, true: waiting for 0
    double b0 = 0.0;
    while (run.steps < max_steps) {
        on_step(b0);
        const double b1 = cursor.step().second;
        ++run.steps;
        if (!above_phase) {
            const double d0 = 1.0 - b0;
            const double d1 = 1.0 - b1;
            if (d1 <= 0.0 || detail::bridge_hit(cursor.rng(), d0, d1, dt)) {
                above_phase = true;
                run.hit_one = true;
                run.hit_one_at = static_cast<double>(run.steps) * dt;
            }
        } else {
            if (b1 <= 0.0 || detail::bridge_hit(cursor.rng(), -b0, -b1, dt)) {
                run.completed = true;
                run.duration = static_cast<double>(run.steps) * dt;
                cursor.reset_value(0.0);
                return run;
            }
        }
        b0 = b1;
    }
    run.duration = static_cast<double>(run.steps) * dt;
    return run;  // truncated
}

/// Simulate the next full regeneration cycle, or report truncation once
/// `max_steps` elapse. Callers must account for every Truncated outcome
/// (extend the budget or record a censoring event).
inline std::variant<Cycle, Truncated> next_cycle(PathCursor& cursor,
                                                 const CycleOptions& options = {}) {
    Cycle cycle;
    const double dt = cursor.dt();
    CycleRun run;
    if (options.retain_samples) {
        std::uint64_t i = 0;
        run = run_cycle(cursor, options.max_steps, [&](double b) {
            cycle.samples.emplace_back(static_cast<double>(i++) * dt, b);
        });
        if (run.completed)
            cycle.samples.emplace_back(run.duration, 0.0);  // closing regeneration point
    } else {
        run = run_cycle(cursor, options.max_steps, detail::NullStepObserver{});
    }
    if (!run.completed) {
        cycle.samples.clear();
        return Truncated{run.duration, run.steps, run.hit_one};
    }
    cycle.duration = run.duration;
    cycle.hit_one_at = run.hit_one_at;
    return cycle;
}

struct RenewalRecord {
    std::vector<double> durations;
    double t_horizon = 0.0;
    std::size_t n_of_t = 0;
};

/// max{k : T_k <= t} for the partial sums T_k of `durations` (T_0 = 0).
inline std::size_t renewal_count(const std::vector<double>& durations, double t) {
    if (t < 0.0) throw Error("renewal_count: t must be >= 0");
    std::size_t k = 0;
    double partial = 0.0;
    for (double d : durations) {
        if (!(d > 0.0)) throw Error("renewal_count: durations must be > 0");
        partial += d;
        if (partial <= t)
            ++k;
        else
            break;
    }
    return k;
}

struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> y_grid;
    std::vector<double> log_survival;
};

/// Least-squares slope of log empirical survival against log y over the
/// given grid. For cycle durations the slope estimates -1/2. Right-censored
/// durations may be included as long as the grid stays below the censoring
/// point; they count as exceedances wherever they should.
inline TailFit estimate_tail_exponent(const std::vector<double>& durations,
                                      const std::vector<double>& y_grid) {
    if (durations.size() < 1000)
        throw Error("estimate_tail_exponent: need at least 1000 durations");
    if (y_grid.size() < 2) throw Error("estimate_tail_exponent: grid too small");
    const double n = static_cast<double>(durations.size());
    TailFit fit;
    fit.y_grid = y_grid;
    for (double y : y_grid) {
        std::size_t exceed = 0;
        for (double d : durations)
            if (d > y) ++exceed;
        if (exceed < 50)
            throw InsufficientTail("fewer than 50 exceedances at y = " + std::to_string(y));
        fit.log_survival.push_back(std::log(static_cast<double>(exceed) / n));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(y_grid.size());
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        const double lx = std::log(y_grid[i]);
        sx += lx;
        sy += fit.log_survival[i];
        sxx += lx * lx;
        sxy += lx * fit.log_survival[i];
    }
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

// ---------------------------------------------------------------------------
// Parallel cycle batches
// ---------------------------------------------------------------------------

struct SimConfig {
    std::uint64_t seed = 0;
    double dt = 1e-4;
    unsigned streams = 0;  // 0: one stream per logical core
    std::uint64_t max_steps_per_cycle = 1'000'000'000;

    unsigned effective_streams() const {
        if (streams > 0) return streams;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }
};

/// Runs `n_cycles` complete cycles split over independent RNG streams and
/// merges the per-stream accumulators in stream order, so the result depends
/// only on (seed, stream count), not on scheduling. `make_acc` builds one
/// accumulator per stream; an accumulator sees on_cycle_step(b) per step,
/// then on_cycle_end(run) / on_truncated(run). Returns the stream-ordered
/// accumulators.
template <class Accumulator, class MakeAcc>
std::vector<Accumulator> run_cycle_batch(const SimConfig& config, std::size_t n_cycles,
                                         MakeAcc&& make_acc) {
    const unsigned n_streams = config.effective_streams();
    std::vector<Accumulator> accs;
    accs.reserve(n_streams);
    for (unsigned s = 0; s < n_streams; ++s) accs.push_back(make_acc(s));

    parallel_for(n_streams, n_streams, [&](std::size_t s) {
        PathCursor cursor(config.seed, s, config.dt);
        Accumulator& acc = accs[s];
        const std::size_t quota = n_cycles / n_streams + (s < n_cycles % n_streams ? 1 : 0);
        std::size_t done = 0;
        while (done < quota) {
            const CycleRun run = run_cycle(cursor, config.max_steps_per_cycle,
                                           [&](double b) { acc.on_cycle_step(b); });
            if (run.completed) {
                acc.on_cycle_end(run);
                ++done;
            } else {
                acc.on_truncated(run);
            }
        }
    });
    return accs;
}

}  // namespace regenmc
