#pragma once

// Goodness-of-fit and moment-testing utilities.
//
// KS p-values are asymptotic (Kolmogorov distribution with the usual
// finite-sample effective-n correction); every verification run here uses
// n >= 2000, far above the n >= 20 floor. Laws with an atom at zero are
// never fed to a raw KS test: the atom goes through an exact binomial test
// and the continuous part through KS, conditioned on positivity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "regenmc/errors.hpp"

namespace regenmc {

struct GofReport {
    std::string test_name;
    std::size_t n = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    double accept_at = 0.01;
    std::map<std::string, std::string> metadata;

    bool accepted() const { return p_value >= accept_at; }
};

// ---------------------------------------------------------------------------
// Normal distribution helpers
// ---------------------------------------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Inverse standard-normal CDF. Acklam's rational approximation refined with
/// one Halley step against erfc; absolute error well below 1e-8.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw Error("normal_quantile: p outside [0,1]");
    }
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double z;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement.
    const double e = normal_cdf(z) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * z * z);
    z = z - u / (1.0 + 0.5 * z * u);
    return z;
}

/// z with P(|Z| > z) = alpha for standard normal Z.
inline double two_sided_z(double alpha) { return normal_quantile(1.0 - 0.5 * alpha); }

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

namespace detail {

/// P(K > t) for the Kolmogorov distribution. Series terms below 1e-10 are
/// dropped; the theta-dual form is used for small t where the standard
/// series converges slowly.
inline double kolmogorov_sf(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 0.755) {
        constexpr double pi = 3.14159265358979323846;
        double sum = 0.0;
        for (int j = 1; j < 100; j += 2) {
            const double term = std::exp(-j * j * pi * pi / (8.0 * t * t));
            sum += term;
            if (term < 1e-10) break;
        }
        const double cdf = std::sqrt(2.0 * pi) / t * sum;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j < 100; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-10) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_p_value(double d, double n_effective) {
    const double sq = std::sqrt(n_effective);
    return kolmogorov_sf(d * (sq + 0.12 + 0.11 / sq));
}

}  // namespace detail

/// One-sample KS test of `samples` against the CDF `cdf` (non-decreasing).
template <class Cdf>
GofReport ks_one_sample(std::vector<double> samples, Cdf&& cdf,
                        double accept_at = 0.01, std::string name = "ks_one_sample") {
    if (samples.size() < 20) throw TooFewSamples("ks_one_sample: n < 20");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    double f_prev = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d = std::max({d, hi, lo, f_prev - static_cast<double>(i) / n});
        f_prev = f;
    }
    GofReport report;
    report.test_name = std::move(name);
    report.n = samples.size();
    report.statistic = d;
    report.p_value = detail::ks_p_value(d, n);
    report.accept_at = accept_at;
    return report;
}

/// Two-sample KS test with effective n = na*nb/(na+nb).
inline GofReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                               double accept_at = 0.01, std::string name = "ks_two_sample") {
    if (a.size() < 20 || b.size() < 20) throw TooFewSamples("ks_two_sample: n < 20");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    GofReport report;
    report.test_name = std::move(name);
    report.n = a.size() + b.size();
    report.statistic = d;
    report.p_value = detail::ks_p_value(d, na * nb / (na + nb));
    report.accept_at = accept_at;
    return report;
}

/// z-test of the order-th raw moment against `expected`. The standard error
/// comes from the empirical variance of the order-th powers, so the test
/// needs a finite 2*order moment to mean anything.
inline GofReport moment_test(const std::vector<double>& samples, double expected, int order,
                             double accept_at = 0.01, std::string name = "moment_test") {
    if (samples.size() < 100) throw TooFewSamples("moment_test: n < 100");
    const double n = static_cast<double>(samples.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double v : samples) {
        double p = 1.0;
        for (int k = 0; k < order; ++k) p *= v;
        sum += p;
        sum_sq += p * p;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double se = std::sqrt(var / n);
    GofReport report;
    report.test_name = std::move(name);
    report.n = samples.size();
    report.accept_at = accept_at;
    report.metadata["order"] = std::to_string(order);
    if (se == 0.0) {
        // Degenerate sample: exact match accepts, anything else rejects.
        report.statistic = 0.0;
        report.p_value = (mean == expected) ? 1.0 : 0.0;
        return report;
    }
    const double z = (mean - expected) / se;
    report.statistic = std::abs(z);
    report.p_value = 2.0 * (1.0 - normal_cdf(std::abs(z)));
    return report;
}

/// Exact two-sided binomial test of n_zero successes in n_total trials
/// against success probability p0 (sum of outcome probabilities no larger
/// than the observed one).
inline GofReport binomial_atom_test(std::size_t n_zero, std::size_t n_total, double p0,
                                    double accept_at = 0.01,
                                    std::string name = "binomial_atom_test") {
    if (n_total < 100) throw TooFewSamples("binomial_atom_test: n < 100");
    if (n_zero > n_total) throw Error("binomial_atom_test: n_zero > n_total");
    GofReport report;
    report.test_name = std::move(name);
    report.n = n_total;
    report.accept_at = accept_at;
    report.statistic = static_cast<double>(n_zero) / static_cast<double>(n_total);
    if (p0 <= 0.0) {
        report.p_value = (n_zero == 0) ? 1.0 : 0.0;
        return report;
    }
    if (p0 >= 1.0) {
        report.p_value = (n_zero == n_total) ? 1.0 : 0.0;
        return report;
    }
    const auto log_pmf = [&](std::size_t k) {
        const double kk = static_cast<double>(k);
        const double nn = static_cast<double>(n_total);
        return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
               kk * std::log(p0) + (nn - kk) * std::log1p(-p0);
    };
    const double obs = log_pmf(n_zero);
    double p = 0.0;
    for (std::size_t k = 0; k <= n_total; ++k) {
        const double lp = log_pmf(k);
        if (lp <= obs + 1e-7) p += std::exp(lp);
    }
    report.p_value = std::min(1.0, p);
    return report;
}

}  // namespace regenmc
