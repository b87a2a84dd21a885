#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "regenmc/brownian_path.hpp"

using namespace regenmc;

TEST_CASE("step advances t by dt and increments are N(0, dt)", "[brownian_path]") {
    PathCursor cursor(7, 0, 0.01);
    REQUIRE(cursor.t() == 0.0);
    REQUIRE(cursor.b() == 0.0);
    auto [t, b] = cursor.step();
    REQUIRE(t == Catch::Approx(0.01));
    REQUIRE(cursor.steps() == 1);

    const std::size_t n = 1000000;
    const double dt = 0.01;
    PathCursor c2(19, 0, dt);
    double prev = 0.0, sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = c2.step().second;
        const double inc = v - prev;
        sum += inc;
        sum_sq += inc * inc;
        prev = v;
    }
    const double nn = static_cast<double>(n);
    // Mean of n increments: 0 within 3 standard errors (SE = sqrt(dt/n)).
    REQUIRE(std::abs(sum / nn) < 3.0 * std::sqrt(dt / nn));
    // Increment variance: dt within 3 SE of the chi-square spread.
    REQUIRE(std::abs(sum_sq / nn - dt) < 3.0 * dt * std::sqrt(2.0 / nn));
    REQUIRE(c2.t() == Catch::Approx(nn * dt));
}

TEST_CASE("identical (seed, stream, dt) gives bit-identical paths", "[brownian_path]") {
    PathCursor a(123, 5, 1e-3), b(123, 5, 1e-3);
    for (int i = 0; i < 20000; ++i) REQUIRE(a.step().second == b.step().second);
}

TEST_CASE("distinct stream ids decorrelate paths", "[brownian_path]") {
    PathCursor a(123, 0, 1e-3), b(123, 1, 1e-3);
    const std::size_t n = 100000;
    double sum_ab = 0.0;
    double prev_a = 0.0, prev_b = 0.0;
    bool any_diff = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double va = a.step().second, vb = b.step().second;
        const double ia = va - prev_a, ib = vb - prev_b;
        prev_a = va;
        prev_b = vb;
        sum_ab += ia * ib;
        if (va != vb) any_diff = true;
    }
    REQUIRE(any_diff);
    // Increment cross-covariance sum: 0 within 4 SE (SE = dt sqrt(n)).
    REQUIRE(std::abs(sum_ab) < 4.0 * 1e-3 * std::sqrt(static_cast<double>(n)));
}

TEST_CASE("dt must be positive", "[brownian_path]") {
    REQUIRE_THROWS_AS(PathCursor(1, 0, 0.0), Error);
    REQUIRE_THROWS_AS(PathCursor(1, 0, -1e-4), Error);
}

TEST_CASE("bridge_crossing_prob closed-form values", "[brownian_path]") {
    // Endpoints straddling the level cross with certainty.
    REQUIRE(bridge_crossing_prob(0.5, 1.2, 1.0, 0.01) == 1.0);
    REQUIRE(bridge_crossing_prob(1.2, 0.5, 1.0, 0.01) == 1.0);
    // Same-side endpoints: exp(-2 d0 d1 / dt).
    REQUIRE(bridge_crossing_prob(0.5, 0.5, 1.0, 0.01) == Catch::Approx(std::exp(-50.0)));
    REQUIRE(bridge_crossing_prob(0.9, 0.9, 1.0, 0.02) == Catch::Approx(std::exp(-1.0)));
    // Either endpoint on the level crosses with certainty.
    REQUIRE(bridge_crossing_prob(1.0, 0.7, 1.0, 0.01) == 1.0);
    REQUIRE(bridge_crossing_prob(0.7, 1.0, 1.0, 0.01) == 1.0);
}

TEST_CASE("bridge_crossing_prob against a fine-grid bridge sub-simulation", "[brownian_path]") {
    // Simulate bridges from 0.9 to 0.9 over dt = 0.02 on a 400-point grid,
    // with the same crossing correction applied at the substep scale, and
    // compare the empirical crossing fraction with exp(-1).
    const double b0 = 0.9, b1 = 0.9, level = 1.0, dt = 0.02;
    const int m = 400;
    const double h = dt / m;
    const std::size_t n = 200000;
    RandomStream rng(2024, 0);
    std::vector<double> w(m + 1);
    std::size_t crossed = 0;
    for (std::size_t rep = 0; rep < n; ++rep) {
        w[0] = 0.0;
        for (int i = 1; i <= m; ++i) w[i] = w[i - 1] + std::sqrt(h) * rng.normal();
        bool hit = false;
        double prev = b0;
        for (int i = 1; i <= m && !hit; ++i) {
            const double frac = static_cast<double>(i) / m;
            const double value = b0 + w[i] - frac * w[m] + frac * (b1 - b0);
            if (value >= level ||
                rng.uniform() < bridge_crossing_prob(prev, value, level, h))
                hit = true;
            prev = value;
        }
        if (hit) ++crossed;
    }
    const double p_hat = static_cast<double>(crossed) / static_cast<double>(n);
    const double p = std::exp(-1.0);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    REQUIRE(std::abs(p_hat - p) < 3.5 * se);
}

TEST_CASE("bridge_crossing_prob monotonicity and limits", "[brownian_path]") {
    // Monotone non-increasing as same-side endpoints move away from the level.
    double prev = 1.0;
    for (double d = 0.01; d < 0.5; d += 0.01) {
        const double p = bridge_crossing_prob(1.0 - d, 1.0 - d, 1.0, 0.01);
        REQUIRE(p <= prev);
        prev = p;
    }
    // Vanishes as dt -> 0 for fixed same-side endpoints.
    double prev_dt = 1.0;
    for (double dt = 0.1; dt > 1e-6; dt *= 0.5) {
        const double p = bridge_crossing_prob(0.9, 0.95, 1.0, dt);
        REQUIRE(p <= prev_dt);
        prev_dt = p;
    }
    REQUIRE(prev_dt < 1e-40);
}
