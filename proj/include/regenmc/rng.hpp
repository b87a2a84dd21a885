#pragma once

// Counter-based pseudo-random number generation.
//
// The generator is Philox-4x32-10: a keyed bijection applied to a 128-bit
// counter. The 64-bit seed forms the key and the 64-bit stream id occupies
// the upper counter words, so every (seed, stream_id) pair addresses its own
// disjoint 2^64-block sequence with no jump-ahead or warm-up. Output is
// fully determined by (seed, stream_id, draw index).
//
// RandomStream refills a block buffer; with AVX2 eight counter blocks run in
// parallel, bit-identical to the scalar path. Normal variates come from a
// 128-strip ziggurat over the half-normal density with Marsaglia's integer
// strip thresholds; tables are built once per process.

#include <array>
#include <cmath>
#include <cstdint>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace regenmc {

namespace detail {

struct PhiloxConstants {
    static constexpr std::uint32_t mul0 = 0xD2511F53u;
    static constexpr std::uint32_t mul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t bump0 = 0x9E3779B9u;  // golden ratio
    static constexpr std::uint32_t bump1 = 0xBB67AE85u;  // sqrt(3) - 1
};

/// One 128-bit Philox-4x32-10 block for counter `block_index`.
inline void philox_block(std::uint32_t k0_init, std::uint32_t k1_init, std::uint32_t s2,
                         std::uint32_t s3, std::uint64_t block_index, std::uint64_t out[2]) {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_index);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_index >> 32);
    std::uint32_t c2 = s2, c3 = s3;
    std::uint32_t k0 = k0_init, k1 = k1_init;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(PhiloxConstants::mul0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(PhiloxConstants::mul1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        k0 += PhiloxConstants::bump0;
        k1 += PhiloxConstants::bump1;
    }
    out[0] = c0 | (static_cast<std::uint64_t>(c1) << 32);
    out[1] = c2 | (static_cast<std::uint64_t>(c3) << 32);
}

}  // namespace detail

/// Plain single-block Philox counter generator; the reference the buffered
/// RandomStream must agree with bit for bit.
class Philox {
public:
    Philox() : Philox(0, 0) {}
    Philox(std::uint64_t seed, std::uint64_t stream_id)
        : k0_(static_cast<std::uint32_t>(seed)), k1_(static_cast<std::uint32_t>(seed >> 32)),
          s2_(static_cast<std::uint32_t>(stream_id)),
          s3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    std::uint64_t next_u64() {
        if (pos_ == 2) {
            detail::philox_block(k0_, k1_, s2_, s3_, block_++, out_);
            pos_ = 0;
        }
        return out_[pos_++];
    }

    std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint32_t k0_, k1_, s2_, s3_;
    std::uint64_t block_ = 0;
    std::uint64_t out_[2] = {0, 0};
    int pos_ = 2;
};

namespace detail {

// Ziggurat tables for the standard normal, 128 strips of equal area.
struct ZigguratTables {
    std::array<double, 129> x;          // strip right edges, x[1] = R, x[128] = 0
    std::array<double, 129> f;          // exp(-x^2/2) at the edges
    std::array<std::uint64_t, 128> k;   // integer rectangle thresholds on 53 bits
    std::array<double, 128> w;          // x[i] * 2^-53
    double r;

    ZigguratTables() {
        constexpr double kR = 3.442619855899;  // edge of the base strip
        r = kR;
        const double f_r = std::exp(-0.5 * kR * kR);
        // Strip area: base rectangle plus the tail mass beyond R.
        const double v = kR * f_r + std::sqrt(3.14159265358979323846 / 2.0) *
                                        std::erfc(kR / std::sqrt(2.0));
        x[0] = v / f_r;  // virtual width of the base strip
        x[1] = kR;
        for (int i = 2; i < 128; ++i) {
            const double fi = v / x[i - 1] + std::exp(-0.5 * x[i - 1] * x[i - 1]);
            x[i] = std::sqrt(-2.0 * std::log(fi));
        }
        x[128] = 0.0;
        for (int i = 0; i <= 128; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
        for (int i = 0; i < 128; ++i) {
            k[i] = static_cast<std::uint64_t>((x[i + 1] / x[i]) * 0x1.0p53);
            w[i] = x[i] * 0x1.0p-53;
        }
    }
};

inline const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace detail

/// One independent, reproducible random stream: uniforms, exponentials and
/// standard normals from a single buffered Philox counter sequence.
/// Not thread-safe; use one RandomStream per thread.
class RandomStream {
public:
    RandomStream() : RandomStream(0, 0) {}
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : k0_(static_cast<std::uint32_t>(seed)), k1_(static_cast<std::uint32_t>(seed >> 32)),
          s2_(static_cast<std::uint32_t>(stream_id)),
          s3_(static_cast<std::uint32_t>(stream_id >> 32)),
          zig_(&detail::ziggurat()) {}

    std::uint64_t next_u64() {
        if (pos_ == kBuffer) refill();
        return buffer_[pos_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1); safe as a log() argument.
    double uniform_oo() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(uniform_oo()); }

    /// Standard normal via the ziggurat.
    double normal() {
        const std::uint64_t bits = next_u64();
        const int i = static_cast<int>(bits & 127u);
        const std::uint64_t m = bits >> 11;
        const double xv = static_cast<double>(m) * zig_->w[i];
        if (m < zig_->k[i]) return (bits & 128u) ? -xv : xv;
        return normal_slow(m, i, (bits & 128u) != 0);
    }

private:
    static constexpr int kBuffer = 256;  // u64 slots = 128 Philox blocks

#if defined(__GNUC__)
    __attribute__((noinline))
#endif
    double normal_slow(std::uint64_t m, int i, bool negative) {
        for (;;) {
            if (i == 0) {
                // Tail beyond R: Marsaglia's exponential-majorant rejection.
                double xt, yt;
                do {
                    xt = -std::log(uniform_oo()) / zig_->r;
                    yt = -std::log(uniform_oo());
                } while (yt + yt < xt * xt);
                const double v = zig_->r + xt;
                return negative ? -v : v;
            }
            const double xv = static_cast<double>(m) * zig_->w[i];
            const double fu = zig_->f[i] + uniform() * (zig_->f[i + 1] - zig_->f[i]);
            if (fu < std::exp(-0.5 * xv * xv)) return negative ? -xv : xv;
            const std::uint64_t bits = next_u64();
            i = static_cast<int>(bits & 127u);
            negative = (bits & 128u) != 0;
            m = bits >> 11;
            if (m < zig_->k[i]) {
                const double accepted = static_cast<double>(m) * zig_->w[i];
                return negative ? -accepted : accepted;
            }
        }
    }

    void refill();

    std::uint32_t k0_, k1_, s2_, s3_;
    std::uint64_t block_ = 0;
    const detail::ZigguratTables* zig_;
    int pos_ = kBuffer;
    std::uint64_t buffer_[kBuffer];
};

#if defined(__AVX2__)

inline void RandomStream::refill() {
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(detail::PhiloxConstants::mul0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(detail::PhiloxConstants::mul1));
    const __m256i b0 = _mm256_set1_epi32(static_cast<int>(detail::PhiloxConstants::bump0));
    const __m256i b1 = _mm256_set1_epi32(static_cast<int>(detail::PhiloxConstants::bump1));
    const __m256i lo32 = _mm256_set1_epi64x(0xFFFFFFFFll);
    const __m256i stream2 = _mm256_set1_epi32(static_cast<int>(s2_));
    const __m256i stream3 = _mm256_set1_epi32(static_cast<int>(s3_));
    alignas(32) std::uint32_t scratch_lo[8], scratch_hi[8];
    alignas(32) std::uint32_t o0[8], o1[8], o2[8], o3[8];
    for (int batch = 0; batch < kBuffer / 16; ++batch) {
        for (int j = 0; j < 8; ++j) {
            const std::uint64_t ctr = block_ + static_cast<std::uint64_t>(j);
            scratch_lo[j] = static_cast<std::uint32_t>(ctr);
            scratch_hi[j] = static_cast<std::uint32_t>(ctr >> 32);
        }
        block_ += 8;
        __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(scratch_lo));
        __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(scratch_hi));
        __m256i c2 = stream2, c3 = stream3;
        __m256i k0 = _mm256_set1_epi32(static_cast<int>(k0_));
        __m256i k1 = _mm256_set1_epi32(static_cast<int>(k1_));
        for (int round = 0; round < 10; ++round) {
            const __m256i p0e = _mm256_mul_epu32(c0, m0);
            const __m256i p0o = _mm256_mul_epu32(_mm256_srli_epi64(c0, 32), m0);
            const __m256i p1e = _mm256_mul_epu32(c2, m1);
            const __m256i p1o = _mm256_mul_epu32(_mm256_srli_epi64(c2, 32), m1);
            const __m256i hi0 = _mm256_blend_epi32(_mm256_srli_epi64(p0e, 32),
                                                   _mm256_andnot_si256(lo32, p0o), 0xAA);
            const __m256i lo0 = _mm256_blend_epi32(
                _mm256_and_si256(p0e, lo32),
                _mm256_slli_epi64(_mm256_and_si256(p0o, lo32), 32), 0xAA);
            const __m256i hi1 = _mm256_blend_epi32(_mm256_srli_epi64(p1e, 32),
                                                   _mm256_andnot_si256(lo32, p1o), 0xAA);
            const __m256i lo1 = _mm256_blend_epi32(
                _mm256_and_si256(p1e, lo32),
                _mm256_slli_epi64(_mm256_and_si256(p1o, lo32), 32), 0xAA);
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
            c3 = lo0;
            k0 = _mm256_add_epi32(k0, b0);
            k1 = _mm256_add_epi32(k1, b1);
        }
        _mm256_store_si256(reinterpret_cast<__m256i*>(o0), c0);
        _mm256_store_si256(reinterpret_cast<__m256i*>(o1), c1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(o2), c2);
        _mm256_store_si256(reinterpret_cast<__m256i*>(o3), c3);
        std::uint64_t* dst = buffer_ + batch * 16;
        for (int j = 0; j < 8; ++j) {
            dst[2 * j] = o0[j] | (static_cast<std::uint64_t>(o1[j]) << 32);
            dst[2 * j + 1] = o2[j] | (static_cast<std::uint64_t>(o3[j]) << 32);
        }
    }
    pos_ = 0;
}

#else

inline void RandomStream::refill() {
    for (int blk = 0; blk < kBuffer / 2; ++blk)
        detail::philox_block(k0_, k1_, s2_, s3_, block_++, buffer_ + 2 * blk);
    pos_ = 0;
}

#endif

}  // namespace regenmc
