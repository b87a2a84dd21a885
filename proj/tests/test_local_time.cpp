#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <variant>
#include <vector>

#include "regenmc/local_time.hpp"
#include "regenmc/stats.hpp"

using namespace regenmc;

TEST_CASE("exact_law regimes", "[local_time]") {
    const LocalTimeLaw above = exact_law(2.0);
    REQUIRE(above.regime == Regime::above_one);
    REQUIRE(above.atom_at_zero == Catch::Approx(0.5));
    REQUIRE(above.scale_a == Catch::Approx(4.0));
    REQUIRE(above.scale_b == 0.0);

    const LocalTimeLaw mid = exact_law(0.5);
    REQUIRE(mid.regime == Regime::unit_interval);
    REQUIRE(mid.atom_at_zero == 0.0);
    REQUIRE(mid.scale_a == Catch::Approx(1.0));
    REQUIRE(mid.scale_b == Catch::Approx(1.0));

    const LocalTimeLaw below = exact_law(-1.0);
    REQUIRE(below.regime == Regime::below_zero);
    REQUIRE(below.atom_at_zero == Catch::Approx(0.5));
    REQUIRE(below.scale_a == Catch::Approx(4.0));
    REQUIRE(below.scale_b == 0.0);
}

TEST_CASE("hitting probabilities", "[local_time]") {
    REQUIRE(hitting_prob(2.0) == Catch::Approx(0.5));
    REQUIRE(hitting_prob(0.7) == 1.0);
    REQUIRE(hitting_prob(-3.0) == Catch::Approx(0.25));
}

TEST_CASE("moments: mean 2 everywhere, piecewise second moment", "[local_time]") {
    REQUIRE(mean_local_time(2.0) == 2.0);
    REQUIRE(mean_local_time(0.0) == 2.0);
    REQUIRE(mean_local_time(-7.3) == 2.0);
    REQUIRE(second_moment_local_time(2.0) == Catch::Approx(16.0));
    REQUIRE(second_moment_local_time(0.5) == Catch::Approx(6.0));
    REQUIRE(second_moment_local_time(-1.0) == Catch::Approx(16.0));
    // Continuity at the regime boundaries: both sides give 8.
    REQUIRE(second_moment_local_time(0.0) == Catch::Approx(8.0));
    REQUIRE(second_moment_local_time(1.0) == Catch::Approx(8.0));
    REQUIRE(second_moment_local_time(1.0 + 1e-12) == Catch::Approx(8.0));
    REQUIRE(second_moment_local_time(-1e-12) == Catch::Approx(8.0));
}

TEST_CASE("sample_exact reproduces the closed-form moments", "[local_time]") {
    RandomStream rng(101, 0);
    const std::size_t n = 100000;
    const auto draw_all = [&](double x) {
        const LocalTimeLaw law = exact_law(x);
        std::vector<double> out(n);
        for (double& v : out) v = sample_exact(law, rng);
        return out;
    };
    SECTION("x = 2: mean 2, second moment 16") {
        const auto draws = draw_all(2.0);
        REQUIRE(moment_test(draws, 2.0, 1).statistic < 3.0);
        REQUIRE(moment_test(draws, 16.0, 2).statistic < 3.0);
    }
    SECTION("x = 0.5: second moment 6") {
        const auto draws = draw_all(0.5);
        REQUIRE(moment_test(draws, 2.0, 1).statistic < 3.0);
        REQUIRE(moment_test(draws, 6.0, 2).statistic < 3.0);
    }
    SECTION("x = -1: second moment 16") {
        const auto draws = draw_all(-1.0);
        REQUIRE(moment_test(draws, 16.0, 2).statistic < 3.0);
    }
}

TEST_CASE("analytic_cdf closed-form checkpoints", "[local_time]") {
    REQUIRE(analytic_cdf(exact_law(2.0), -1.0) == 0.0);
    REQUIRE(analytic_cdf(exact_law(2.0), 0.0) == Catch::Approx(0.5));      // the atom
    REQUIRE(analytic_cdf(exact_law(-1.0), 0.0) == Catch::Approx(0.5));
    REQUIRE(analytic_cdf(exact_law(0.5), 0.0) == 0.0);
    // Equal scales at x = 0.5: Gamma(2, scale 1) CDF at 1 is 1 - 2/e.
    REQUIRE(analytic_cdf(exact_law(0.5), 1.0) == Catch::Approx(1.0 - 2.0 * std::exp(-1.0)));
    // Degenerate endpoints: single exponential with mean 2.
    REQUIRE(analytic_cdf(exact_law(0.0), 1.0) == Catch::Approx(1.0 - std::exp(-0.5)));
    REQUIRE(analytic_cdf(exact_law(1.0), 1.0) == Catch::Approx(1.0 - std::exp(-0.5)));
    for (double x : {-2.0, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 3.0})
        REQUIRE(analytic_cdf(exact_law(x), 1e9) == Catch::Approx(1.0));
}

TEST_CASE("analytic_cdf is a CDF: monotone, starts at the atom", "[local_time]") {
    for (double x : {-2.0, -0.3, 0.0, 0.25, 0.5, 0.75, 1.0, 1.7, 4.0}) {
        const LocalTimeLaw law = exact_law(x);
        REQUIRE(analytic_cdf(law, 0.0) == Catch::Approx(law.atom_at_zero).margin(1e-14));
        double prev = -1.0;
        for (double ell = 0.0; ell < 40.0; ell += 0.1) {
            const double v = analytic_cdf(law, ell);
            REQUIRE(v >= prev);
            REQUIRE(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("atom mass against a large sample of exact draws", "[local_time]") {
    RandomStream rng(202, 0);
    const LocalTimeLaw law = exact_law(2.0);
    const std::size_t n = 1000000;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (sample_exact(law, rng) == 0.0) ++zeros;
    REQUIRE(binomial_atom_test(zeros, n, 0.5).accepted());
}

TEST_CASE("sample_exact agrees with analytic_cdf in every regime", "[local_time]") {
    RandomStream rng(303, 0);
    const std::size_t n = 100000;
    for (double x : {2.0, 0.5, -1.0, 0.0, 1.0, 0.25}) {
        const LocalTimeLaw law = exact_law(x);
        std::vector<double> positives;
        positives.reserve(n);
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = sample_exact(law, rng);
            if (v == 0.0)
                ++zeros;
            else
                positives.push_back(v);
        }
        // Mixed laws are tested as binomial atom + KS on the conditioned
        // continuous part, never as a raw KS on the mixture.
        if (law.atom_at_zero > 0.0) {
            REQUIRE(binomial_atom_test(zeros, n, law.atom_at_zero).accepted());
            const double atom = law.atom_at_zero;
            REQUIRE(ks_one_sample(positives, [&](double ell) {
                        return (analytic_cdf(law, ell) - atom) / (1.0 - atom);
                    }).accepted());
        } else {
            REQUIRE(zeros == 0);
            REQUIRE(ks_one_sample(positives, [&](double ell) {
                        return analytic_cdf(law, ell);
                    }).accepted());
        }
    }
}

TEST_CASE("mgf closed form, thresholds and derivative relations", "[local_time]") {
    SECTION("mgf at zero is 1") {
        for (double x : {-2.0, 0.0, 0.3, 1.0, 5.0}) REQUIRE(mgf(x, 0.0).value() == Catch::Approx(1.0));
    }
    SECTION("mgf(0, 1/4) = 2: chi-squared(2) closed form") {
        REQUIRE(mgf(0.0, 0.25).value() == Catch::Approx(2.0));
    }
    SECTION("empirical oracle at theta = 0.1, x = 0") {
        RandomStream rng(404, 0);
        const LocalTimeLaw law = exact_law(0.0);
        const std::size_t n = 1000000;
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(0.1 * sample_exact(law, rng));
            sum += e;
            sum2 += e * e;
        }
        const double mean = sum / static_cast<double>(n);
        const double se =
            std::sqrt((sum2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
        REQUIRE(std::abs(mean - mgf(0.0, 0.1).value()) < 3.0 * se);
    }
    SECTION("divergence thresholds") {
        REQUIRE_FALSE(mgf(2.0, 0.25).has_value());   // 1/(2x) at x = 2
        REQUIRE(mgf(2.0, 0.2499).has_value());
        REQUIRE_FALSE(mgf(-1.0, 0.25).has_value());  // 1/(2(1-x)) at x = -1
        REQUIRE_FALSE(mgf(0.5, 1.0).has_value());    // 1/(2 max(x,1-x)) = 1
        REQUIRE(mgf(0.5, 0.999).has_value());
        REQUIRE_FALSE(mgf(0.0, 0.5).has_value());
    }
    SECTION("finite-difference derivatives match the moments") {
        const double h = 1e-5;
        for (double x : {-1.5, 0.0, 0.4, 1.0, 2.5}) {
            const double up = mgf(x, h).value();
            const double down = mgf(x, -h).value();
            const double d1 = (up - down) / (2.0 * h);
            const double d2 = (up - 2.0 + down) / (h * h);
            REQUIRE(d1 == Catch::Approx(mean_local_time(x)).epsilon(1e-3));
            REQUIRE(d2 == Catch::Approx(second_moment_local_time(x)).epsilon(1e-3));
        }
    }
    SECTION("mgf -> 1 as theta -> 0 from below") {
        REQUIRE(mgf(0.7, -1e-8).value() == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("occupation_local_time on retained cycles", "[local_time]") {
    SECTION("requires samples") {
        Cycle cycle;
        cycle.duration = 1.0;
        REQUIRE_THROWS_AS(occupation_local_time(cycle, 0.5, 1e-3), NoSamples);
    }
    SECTION("level far outside the path range gives zero") {
        PathCursor cursor(7, 0, 1e-3);
        const Cycle cycle = std::get<Cycle>(next_cycle(cursor, {true, 10000000}));
        REQUIRE(occupation_local_time(cycle, 50.0, 1e-3).value == 0.0);
    }
    SECTION("mean over cycles approaches 2 and is stable in epsilon") {
        const double dt = 1e-4;
        PathCursor cursor(505, 0, dt);
        const std::size_t n = 400;
        std::vector<double> v4, v2;
        for (std::size_t i = 0; i < n; ++i) {
            const auto outcome = next_cycle(cursor, {true, 40000000});
            if (!std::holds_alternative<Cycle>(outcome)) {
                cursor.reset_value(0.0);
                continue;
            }
            const Cycle& cycle = std::get<Cycle>(outcome);
            v4.push_back(occupation_local_time(cycle, 0.5, 4e-3).value);
            v2.push_back(occupation_local_time(cycle, 0.5, 2e-3).value);
        }
        const auto mean_se = [](const std::vector<double>& v) {
            double s = 0, s2 = 0;
            for (double u : v) {
                s += u;
                s2 += u * u;
            }
            const double n = static_cast<double>(v.size());
            const double m = s / n;
            return std::pair<double, double>(m, std::sqrt((s2 / n - m * m) / n));
        };
        const auto [m4, se4] = mean_se(v4);
        const auto [m2, se2] = mean_se(v2);
        REQUIRE(std::abs(m4 - 2.0) < 3.0 * se4);
        REQUIRE(std::abs(m2 - 2.0) < 3.0 * se2);
        // Shrinking epsilon leaves the mean put (within 2 SE of the pair).
        REQUIRE(std::abs(m4 - m2) < 2.0 * std::sqrt(se4 * se4 + se2 * se2));
    }
}

TEST_CASE("process sampler on [0,1]: validation and moments", "[local_time]") {
    RandomStream rng(606, 0);
    SECTION("grid validation") {
        REQUIRE_THROWS_AS(sample_process_unit_interval({0.2, 1.2}, rng), GridOutOfRange);
        REQUIRE_THROWS_AS(sample_process_unit_interval({-0.1}, rng), GridOutOfRange);
        REQUIRE_THROWS_AS(sample_process_unit_interval({0.5, 0.5}, rng), GridOutOfRange);
        REQUIRE_THROWS_AS(sample_process_unit_interval({0.7, 0.2}, rng), GridOutOfRange);
    }
    SECTION("pointwise mean 2, covariance 4min^2+4min^2, variance 2 at 1/2") {
        const std::vector<double> grid = {0.25, 0.5, 0.75};
        const std::size_t n = 50000;
        std::vector<std::vector<double>> draws(grid.size(), std::vector<double>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const auto s = sample_process_unit_interval(grid, rng);
            for (std::size_t i = 0; i < grid.size(); ++i) draws[i][k] = s[i];
        }
        const double nn = static_cast<double>(n);
        std::vector<double> means(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double s = 0, s2 = 0;
            for (double v : draws[i]) {
                s += v;
                s2 += v * v;
            }
            means[i] = s / nn;
            const double se = std::sqrt((s2 / nn - means[i] * means[i]) / nn);
            REQUIRE(std::abs(means[i] - 2.0) < 3.0 * se);
        }
        // Cov(H(0.25), H(0.75)) = 4 min(.25,.75)^2 + 4 min(.75,.25)^2 = 0.5.
        double cs = 0, cs2 = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double p = (draws[0][k] - means[0]) * (draws[2][k] - means[2]);
            cs += p;
            cs2 += p * p;
        }
        const double cov = cs / nn;
        const double cov_se = std::sqrt((cs2 / nn - cov * cov) / nn);
        REQUIRE(process_covariance(0.25, 0.75) == Catch::Approx(0.5));
        REQUIRE(std::abs(cov - 0.5) < 3.0 * cov_se);
        // Var at 1/2 equals the moment formula: 8(x^2-x+1) - 4 = 2.
        double vs = 0, vs2 = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double p = (draws[1][k] - means[1]) * (draws[1][k] - means[1]);
            vs += p;
            vs2 += p * p;
        }
        const double var = vs / nn;
        const double var_se = std::sqrt((vs2 / nn - var * var) / nn);
        REQUIRE(std::abs(var - 2.0) < 3.0 * var_se);
    }
}
