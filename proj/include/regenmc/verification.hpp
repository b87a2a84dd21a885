#pragma once

// Statistical verification batteries behind the CLI `verify` subcommands and
// the acceptance suite. Each battery simulates at a configurable resolution,
// compares against the closed-form laws, and reports per-test rows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "regenmc/estimator.hpp"
#include "regenmc/integrand.hpp"
#include "regenmc/local_time.hpp"
#include "regenmc/parallel.hpp"
#include "regenmc/regeneration.hpp"
#include "regenmc/stats.hpp"

namespace regenmc {

// ---------------------------------------------------------------------------
// Local-time laws from paths (occupation-density estimates per cycle)
// ---------------------------------------------------------------------------

struct LocalTimeLevelRow {
    double x = 0.0;
    std::size_t n = 0;
    double ks_stat = 0.0;
    double ks_p = 1.0;
    double zero_frac = 0.0;
    double atom_expected = 0.0;
    double mean_hat = 0.0;
    double mean_expected = 2.0;
    double m2_hat = 0.0;
    double m2_expected = 0.0;
    // not part of the CSV schema, used by the gates:
    double mean_se = 0.0;
    double m2_se = 0.0;
    bool ks_accept = true;
    bool atom_accept = true;

    bool accepted() const { return ks_accept && atom_accept; }
};

struct LocalTimeLawReport {
    std::vector<LocalTimeLevelRow> rows;
    std::size_t truncated_cycles = 0;
    double epsilon = 0.0;
    double dt = 0.0;

    bool all_accepted() const {
        for (const auto& r : rows)
            if (!r.accepted()) return false;
        return true;
    }
};

namespace detail {

/// Per-stream accumulator: time spent in a small band around each level,
/// per cycle.
struct BandAccumulator {
    const std::vector<double>* levels;
    double epsilon;
    std::vector<std::uint32_t> counts;            // scratch, one per level
    std::vector<std::vector<double>> values;      // per level, per completed cycle
    std::size_t truncated = 0;
    double lo_min = 0.0, hi_max = 0.0;
    double dt = 0.0;

    BandAccumulator(const std::vector<double>& lv, double eps, double step)
        : levels(&lv), epsilon(eps), counts(lv.size(), 0), values(lv.size()), dt(step) {
        lo_min = lv.front() - eps;
        hi_max = lv.back() + eps;
    }

    void on_cycle_step(double b) {
        if (b <= lo_min || b >= hi_max) return;
        // levels are sorted and bands are narrow; scan the candidates
        const auto& lv = *levels;
        auto it = std::lower_bound(lv.begin(), lv.end(), b - epsilon);
        for (; it != lv.end() && *it < b + epsilon; ++it) {
            if (std::abs(b - *it) < epsilon) ++counts[static_cast<std::size_t>(it - lv.begin())];
        }
    }
    void on_cycle_end(const CycleRun&) {
        const double scale = dt / (2.0 * epsilon);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            values[i].push_back(scale * static_cast<double>(counts[i]));
            counts[i] = 0;
        }
    }
    void on_truncated(const CycleRun&) {
        ++truncated;
        std::fill(counts.begin(), counts.end(), 0);
    }
};

}  // namespace detail

/// Occupation-density estimates of L(T,x) for each level over `n_cycles`
/// complete cycles, tested against the exact laws: KS on the continuous part
/// at `significance`, exact binomial on the zero fraction for levels with an
/// atom. A sample counts as zero when the band around the level is never
/// entered; on [0,1] every cycle crosses every level, so there is no atom to
/// test and all values (including occasional all-miss zeros at the
/// resolution floor) belong to the continuous part.
inline LocalTimeLawReport verify_local_time_laws(std::vector<double> levels,
                                                 std::size_t n_cycles, const SimConfig& config,
                                                 double epsilon, double significance = 0.01) {
    std::sort(levels.begin(), levels.end());
    auto accs = run_cycle_batch<detail::BandAccumulator>(
        config, n_cycles,
        [&](unsigned) { return detail::BandAccumulator(levels, epsilon, config.dt); });

    LocalTimeLawReport report;
    report.epsilon = epsilon;
    report.dt = config.dt;
    for (const auto& acc : accs) report.truncated_cycles += acc.truncated;

    for (std::size_t li = 0; li < levels.size(); ++li) {
        std::vector<double> values;
        values.reserve(n_cycles);
        for (const auto& acc : accs)
            values.insert(values.end(), acc.values[li].begin(), acc.values[li].end());

        const double x = levels[li];
        const LocalTimeLaw law = exact_law(x);
        LocalTimeLevelRow row;
        row.x = x;
        row.n = values.size();
        row.atom_expected = law.atom_at_zero;
        row.mean_expected = mean_local_time(x);
        row.m2_expected = second_moment_local_time(x);

        const double n = static_cast<double>(values.size());
        double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
        std::size_t zeros = 0;
        for (double v : values) {
            sum += v;
            sum2 += v * v;
            sum4 += v * v * v * v;
            if (v == 0.0) ++zeros;
        }
        row.mean_hat = sum / n;
        row.m2_hat = sum2 / n;
        row.mean_se = std::sqrt(std::max(0.0, sum2 / n - row.mean_hat * row.mean_hat) / n);
        row.m2_se = std::sqrt(std::max(0.0, sum4 / n - row.m2_hat * row.m2_hat) / n);
        row.zero_frac = static_cast<double>(zeros) / n;

        if (law.regime == Regime::unit_interval) {
            const GofReport ks = ks_one_sample(
                values, [&](double ell) { return analytic_cdf(law, ell); }, significance,
                "local_time_ks");
            row.ks_stat = ks.statistic;
            row.ks_p = ks.p_value;
            row.ks_accept = ks.accepted();
            row.atom_accept = true;
        } else {
            std::vector<double> positives;
            positives.reserve(values.size() - zeros);
            for (double v : values)
                if (v > 0.0) positives.push_back(v);
            const GofReport ks = ks_one_sample(
                positives, [&](double ell) { return 1.0 - std::exp(-ell / law.scale_a); },
                significance, "local_time_ks_positive");
            row.ks_stat = ks.statistic;
            row.ks_p = ks.p_value;
            row.ks_accept = ks.accepted();
            const GofReport atom =
                binomial_atom_test(zeros, values.size(), law.atom_at_zero, significance);
            row.atom_accept = atom.accepted();
        }
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Exact-law moments
// ---------------------------------------------------------------------------

/// Exact-law sampling check of the first and second moments at each level;
/// two GofReport rows per level.
inline std::vector<GofReport> verify_moments(const std::vector<double>& levels, std::size_t n,
                                             std::uint64_t seed, double significance = 0.01) {
    std::vector<GofReport> rows;
    RandomStream rng(seed, 0);
    for (double x : levels) {
        const LocalTimeLaw law = exact_law(x);
        std::vector<double> draws(n);
        for (double& v : draws) v = sample_exact(law, rng);
        GofReport mean_row =
            moment_test(draws, mean_local_time(x), 1, significance, "mean_local_time");
        mean_row.metadata["x"] = std::to_string(x);
        mean_row.metadata["expected"] = std::to_string(mean_local_time(x));
        rows.push_back(std::move(mean_row));
        GofReport m2_row = moment_test(draws, second_moment_local_time(x), 2, significance,
                                       "second_moment_local_time");
        m2_row.metadata["x"] = std::to_string(x);
        m2_row.metadata["expected"] = std::to_string(second_moment_local_time(x));
        rows.push_back(std::move(m2_row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Cycle-duration tail
// ---------------------------------------------------------------------------

struct TailReport {
    TailFit fit;
    std::size_t n_cycles = 0;
    std::size_t truncated = 0;
    double slope_lo = -0.56;
    double slope_hi = -0.44;
    std::vector<double> durations;  // censored durations included

    bool accepted() const { return fit.slope >= slope_lo && fit.slope <= slope_hi; }
};

namespace detail {

struct DurationAccumulator {
    std::vector<double> durations;
    std::size_t truncated = 0;
    void on_cycle_step(double) {}
    void on_cycle_end(const CycleRun& run) { durations.push_back(run.duration); }
    void on_truncated(const CycleRun& run) {
        // right-censored at the cap; still a valid exceedance below it
        durations.push_back(run.duration);
        ++truncated;
    }
};

}  // namespace detail

/// Log-log slope of the cycle-duration survival function over a quantile
/// window of the upper tail; the law predicts -1/2. The grid stays below the
/// truncation cap so censored durations count correctly as exceedances.
inline TailReport verify_tail(std::size_t n_cycles, const SimConfig& config,
                              double q_lo = 0.90, double q_hi = 0.995, int grid_points = 15) {
    auto accs = run_cycle_batch<detail::DurationAccumulator>(
        config, n_cycles, [](unsigned) { return detail::DurationAccumulator{}; });
    TailReport report;
    for (auto& acc : accs) {
        report.durations.insert(report.durations.end(), acc.durations.begin(),
                                acc.durations.end());
        report.truncated += acc.truncated;
    }
    report.n_cycles = n_cycles;

    std::vector<double> sorted = report.durations;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const std::size_t i = static_cast<std::size_t>(q * (static_cast<double>(sorted.size()) - 1.0));
        return sorted[i];
    };
    const double cap =
        static_cast<double>(config.max_steps_per_cycle) * config.dt;
    const double y_lo = quantile(q_lo);
    const double y_hi = std::min(quantile(q_hi), 0.8 * cap);
    if (!(y_hi > y_lo)) throw InsufficientTail("tail grid window is empty; raise the cycle cap");
    std::vector<double> grid(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        const double w = static_cast<double>(i) / (grid_points - 1);
        grid[i] = std::exp(std::log(y_lo) + w * (std::log(y_hi) - std::log(y_lo)));
    }
    report.fit = estimate_tail_exponent(report.durations, grid);
    return report;
}

// ---------------------------------------------------------------------------
// Ray-Knight process law on [0,1]
// ---------------------------------------------------------------------------

struct RayKnightEntry {
    double x = 0.0, y = 0.0;     // grid pair (x == y on the diagonal)
    double expected = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    bool is_mean = false;        // mean row instead of covariance row
    bool accepted() const { return std::abs(estimate - expected) <= 3.0 * se; }
};

struct RayKnightReport {
    std::vector<RayKnightEntry> entries;
    std::size_t n = 0;
    bool all_accepted() const {
        for (const auto& e : entries)
            if (!e.accepted()) return false;
        return true;
    }
};

/// Empirical means and covariances of the process {L(T,x), x in grid}
/// sampled through the squared-Bessel representation, against E = 2 and
/// Cov(x,y) = 4 min(x,y)^2 + 4 min(1-x,1-y)^2, all within 3 standard errors.
inline RayKnightReport verify_ray_knight(const std::vector<double>& grid, std::size_t n,
                                         std::uint64_t seed) {
    const std::size_t m = grid.size();
    std::vector<std::vector<double>> draws(m, std::vector<double>(n));
    RandomStream rng(seed, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const std::vector<double> sample = sample_process_unit_interval(grid, rng);
        for (std::size_t i = 0; i < m; ++i) draws[i][k] = sample[i];
    }
    RayKnightReport report;
    report.n = n;
    std::vector<double> means(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0, sum2 = 0.0;
        for (double v : draws[i]) {
            sum += v;
            sum2 += v * v;
        }
        means[i] = sum / static_cast<double>(n);
        const double var = sum2 / static_cast<double>(n) - means[i] * means[i];
        RayKnightEntry e;
        e.x = e.y = grid[i];
        e.is_mean = true;
        e.expected = 2.0;
        e.estimate = means[i];
        e.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
        report.entries.push_back(e);
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double cov_sum = 0.0, cov_sum2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double p = (draws[i][k] - means[i]) * (draws[j][k] - means[j]);
                cov_sum += p;
                cov_sum2 += p * p;
            }
            const double cov = cov_sum / static_cast<double>(n);
            const double var_p = cov_sum2 / static_cast<double>(n) - cov * cov;
            RayKnightEntry e;
            e.x = grid[i];
            e.y = grid[j];
            e.expected = process_covariance(grid[i], grid[j]);
            e.estimate = cov;
            e.se = std::sqrt(std::max(0.0, var_p) / static_cast<double>(n));
            report.entries.push_back(e);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// CLT coverage of the confidence interval
// ---------------------------------------------------------------------------

struct CoverageReport {
    std::size_t covered = 0;
    std::size_t replications = 0;
    double lambda = 0.0;
    double coverage() const {
        return static_cast<double>(covered) / static_cast<double>(replications);
    }
};

/// Fraction of seeded replications whose (1-alpha) interval covers the true
/// integral (from quadrature). Each replication runs single-stream;
/// parallelism goes across replications.
inline CoverageReport verify_clt_coverage(const Expr& f, double t, std::size_t replications,
                                          const EstimateConfig& base) {
    const CompiledExpr compiled(f);
    CoverageReport report;
    report.replications = replications;
    report.lambda = integrate([&](double x) { return compiled(x); }, -64.0, 64.0);
    std::vector<char> covered(replications, 0);
    parallel_for(base.effective_streams(), replications, [&](std::size_t r) {
        EstimateConfig config = base;
        config.streams = 1;
        config.seed = base.seed + r;
        config.check_integrability = false;  // checked once by the caller
        const RsmcResult res = estimate(f, t, config);
        covered[r] = (res.ci_low <= report.lambda && report.lambda <= res.ci_high) ? 1 : 0;
    });
    for (char c : covered) report.covered += c;
    return report;
}

// ---------------------------------------------------------------------------
// Kallianpur-Robbins normalization
// ---------------------------------------------------------------------------

enum class KrReference {
    sqrt_abs_z,  // lambda * sqrt(|Z|) * sqrt(2/pi)
    abs_z,       // lambda * |Z|  (the distributional limit of t^{-1/2} integral)
};

/// Independent replications of the Kallianpur-Robbins statistic
/// t^{-1/2} integral_0^t f(B(s)) ds, one path per replication.
inline std::vector<double> kr_replications(const Expr& f, double t, std::size_t replications,
                                           const EstimateConfig& base) {
    std::vector<double> out(replications);
    parallel_for(base.effective_streams(), replications, [&](std::size_t r) {
        EstimateConfig config = base;
        config.streams = 1;
        config.seed = base.seed + r;
        out[r] = kr_estimate(f, t, config);
    });
    return out;
}

inline std::vector<double> kr_reference_draws(KrReference kind, double lambda, std::size_t n,
                                              std::uint64_t seed) {
    RandomStream rng(seed, 0);
    std::vector<double> out(n);
    const double root_2_over_pi = std::sqrt(2.0 / 3.14159265358979323846);
    for (double& v : out) {
        const double z = std::abs(rng.normal());
        v = (kind == KrReference::sqrt_abs_z) ? lambda * std::sqrt(z) * root_2_over_pi
                                              : lambda * z;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stable-limit building blocks
// ---------------------------------------------------------------------------

struct LaplaceCheckRow {
    double s = 0.0;
    double expected = 0.0;  // e^{-sqrt(s)}
    double estimate = 0.0;
    double se = 0.0;
    bool accepted() const { return std::abs(estimate - expected) <= 3.0 * se; }
};

/// Empirical Laplace transform of the sampler's V = 1/(2 Z^2) against
/// e^{-sqrt(s)} at the given transform points.
inline std::vector<LaplaceCheckRow> verify_limit_v_transform(const std::vector<double>& s_points,
                                                             std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    std::vector<double> vs(n);
    for (double& v : vs) {
        const double z = rng.normal();
        v = 1.0 / (2.0 * z * z);
    }
    std::vector<LaplaceCheckRow> rows;
    for (double s : s_points) {
        double sum = 0.0, sum2 = 0.0;
        for (double v : vs) {
            const double e = std::exp(-s * v);
            sum += e;
            sum2 += e * e;
        }
        LaplaceCheckRow row;
        row.s = s;
        row.expected = std::exp(-std::sqrt(s));
        row.estimate = sum / static_cast<double>(n);
        row.se = std::sqrt(
            std::max(0.0, sum2 / static_cast<double>(n) - row.estimate * row.estimate) /
            static_cast<double>(n));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Occupation measure of cycles
// ---------------------------------------------------------------------------

struct OccupationRow {
    double a = 0.0, b = 0.0;
    double expected = 0.0;  // 2 (b - a)
    double estimate = 0.0;
    double se = 0.0;
    bool accepted() const { return std::abs(estimate - expected) <= 3.0 * se; }
};

namespace detail {

struct IntervalAccumulator {
    std::vector<std::pair<double, double>> intervals;
    double dt;
    std::vector<std::uint64_t> counts;
    std::vector<double> sum, sum2;
    std::size_t n = 0, truncated = 0;

    IntervalAccumulator(const std::vector<std::pair<double, double>>& iv, double step)
        : intervals(iv), dt(step), counts(iv.size(), 0), sum(iv.size(), 0.0),
          sum2(iv.size(), 0.0) {}

    void on_cycle_step(double b) {
        for (std::size_t i = 0; i < intervals.size(); ++i)
            if (b >= intervals[i].first && b <= intervals[i].second) ++counts[i];
    }
    void on_cycle_end(const CycleRun&) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double v = dt * static_cast<double>(counts[i]);
            sum[i] += v;
            sum2[i] += v * v;
            counts[i] = 0;
        }
        ++n;
    }
    void on_truncated(const CycleRun&) {
        std::fill(counts.begin(), counts.end(), 0);
        ++truncated;
    }
};

}  // namespace detail

/// Mean cycle occupation time of each interval against 2 * length, within
/// 3 standard errors: the cycle occupation measure is 2 x Lebesgue.
inline std::vector<OccupationRow> verify_occupation_measure(
    const std::vector<std::pair<double, double>>& intervals, std::size_t n_cycles,
    const SimConfig& config) {
    auto accs = run_cycle_batch<detail::IntervalAccumulator>(
        config, n_cycles,
        [&](unsigned) { return detail::IntervalAccumulator(intervals, config.dt); });
    std::vector<OccupationRow> rows;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (const auto& acc : accs) {
            sum += acc.sum[i];
            sum2 += acc.sum2[i];
            n += acc.n;
        }
        OccupationRow row;
        row.a = intervals[i].first;
        row.b = intervals[i].second;
        row.expected = 2.0 * (row.b - row.a);
        const double nn = static_cast<double>(n);
        row.estimate = sum / nn;
        row.se = std::sqrt(std::max(0.0, sum2 / nn - row.estimate * row.estimate) / nn);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Gambler's-ruin atoms from paths
// ---------------------------------------------------------------------------

struct AtomRow {
    double x = 0.0;
    std::size_t n = 0;
    std::size_t zeros = 0;
    double p0 = 0.0;  // expected zero fraction (the atom mass)
    GofReport test;
    double zero_frac() const { return static_cast<double>(zeros) / static_cast<double>(n); }
};

namespace detail {

struct ReachAccumulator {
    std::vector<double> levels;  // positive levels: reached if max >= x; negative: min <= x
    std::vector<std::size_t> reached;
    double running_max = 0.0, running_min = 0.0;
    std::size_t n = 0, truncated = 0;

    explicit ReachAccumulator(const std::vector<double>& lv)
        : levels(lv), reached(lv.size(), 0) {}

    void on_cycle_step(double b) {
        if (b > running_max) running_max = b;
        if (b < running_min) running_min = b;
    }
    void on_cycle_end(const CycleRun&) {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const bool hit = levels[i] >= 0.0 ? running_max >= levels[i]
                                              : running_min <= levels[i];
            if (hit) ++reached[i];
        }
        ++n;
        running_max = running_min = 0.0;
    }
    void on_truncated(const CycleRun&) {
        ++truncated;
        running_max = running_min = 0.0;
    }
};

}  // namespace detail

/// Zero fractions of L(T,x) from whether the path ever reaches x within a
/// cycle, tested by exact binomial against the gambler's-ruin atom masses.
inline std::vector<AtomRow> verify_atoms(const std::vector<double>& levels, std::size_t n_cycles,
                                         const SimConfig& config, double significance = 0.01) {
    auto accs = run_cycle_batch<detail::ReachAccumulator>(
        config, n_cycles, [&](unsigned) { return detail::ReachAccumulator(levels); });
    std::vector<AtomRow> rows;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::size_t reached = 0, n = 0;
        for (const auto& acc : accs) {
            reached += acc.reached[i];
            n += acc.n;
        }
        AtomRow row;
        row.x = levels[i];
        row.n = n;
        row.zeros = n - reached;
        row.p0 = exact_law(levels[i]).atom_at_zero;
        row.test = binomial_atom_test(row.zeros, n, row.p0, significance, "gamblers_ruin_atom");
        row.test.metadata["x"] = std::to_string(levels[i]);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace regenmc
