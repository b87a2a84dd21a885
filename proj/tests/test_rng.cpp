#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "regenmc/rng.hpp"
#include "regenmc/stats.hpp"

using namespace regenmc;

TEST_CASE("philox streams are deterministic", "[rng]") {
    Philox a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("buffered stream equals the single-block reference", "[rng]") {
    // The AVX2 refill must be bit-identical to plain Philox.
    RandomStream fast(123456789, 42);
    Philox reference(123456789, 42);
    for (int i = 0; i < 4096; ++i) REQUIRE(fast.next_u64() == reference.next_u64());
}

TEST_CASE("philox streams differ across seeds and stream ids", "[rng]") {
    Philox base(42, 0), other_seed(43, 0), other_stream(42, 1);
    int same_seed = 0, same_stream = 0;
    for (int i = 0; i < 100; ++i) {
        const auto v = base.next_u64();
        if (v == other_seed.next_u64()) ++same_seed;
        if (v == other_stream.next_u64()) ++same_stream;
    }
    REQUIRE(same_seed == 0);
    REQUIRE(same_stream == 0);
}

TEST_CASE("uniform stays in [0,1) and uniform_oo in (0,1)", "[rng]") {
    RandomStream rng(1, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.uniform_oo();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("normal sampler matches N(0,1): KS battery over 100 seeds", "[rng]") {
    // Acceptance bar: at significance 0.01 at least 95 of 100 seeds accept.
    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomStream rng(seed, 0);
        std::vector<double> draws(100000);
        for (double& d : draws) d = rng.normal();
        const GofReport report = ks_one_sample(std::move(draws), normal_cdf, 0.01);
        if (report.accepted()) ++accepted;
    }
    REQUIRE(accepted >= 95);
}

TEST_CASE("normal sampler moments", "[rng]") {
    RandomStream rng(12345, 3);
    const std::size_t n = 4000000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    std::size_t tail35 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
        if (std::abs(z) > 3.5) ++tail35;
    }
    const double nn = static_cast<double>(n);
    REQUIRE(std::abs(s1 / nn) < 3.0 / std::sqrt(nn));             // mean 0, sd 1
    REQUIRE(std::abs(s2 / nn - 1.0) < 3.0 * std::sqrt(2.0 / nn)); // var of z^2 is 2
    REQUIRE(std::abs(s3 / nn) < 3.0 * std::sqrt(15.0 / nn));      // E z^6 = 15
    REQUIRE(std::abs(s4 / nn - 3.0) < 3.0 * std::sqrt(96.0 / nn)); // var of z^4 = 96
    // Tail mass beyond 3.5 (exercises the ziggurat tail branch): 2*Phi(-3.5).
    const double p = 2.0 * normal_cdf(-3.5);
    const double se = std::sqrt(p * (1.0 - p) / nn);
    REQUIRE(std::abs(static_cast<double>(tail35) / nn - p) < 4.0 * se);
}

TEST_CASE("exponential draws have the requested mean", "[rng]") {
    RandomStream rng(9, 1);
    const std::size_t n = 200000;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rng.exponential(2.0);
    REQUIRE(std::abs(sum / static_cast<double>(n) - 2.0) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}
