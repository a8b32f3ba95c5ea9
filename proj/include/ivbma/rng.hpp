#pragma once

// Self-contained random number stream: xoshiro256++ core (256-bit state)
// plus the scalar samplers the Gibbs updates need. The generator and the
// samplers are written out in full rather than taken from <random> because
// the standard library leaves distribution algorithms implementation
// defined, and the reproducibility contract here is bit-exact: same seed,
// same draw sequence, on any conforming compiler.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ivbma {

namespace detail {

// splitmix64, used only to expand a 64-bit seed into the 256-bit state.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = detail::splitmix64(x);
    }

    // Stream k of a master seed: the base state advanced by k jumps of
    // 2^128 steps each. Streams are non-overlapping for any realistic
    // draw count, which is what lets chains and replicates run in
    // parallel while staying reproducible.
    static RngStream for_stream(std::uint64_t seed, std::uint64_t stream) {
        RngStream r(seed);
        for (std::uint64_t k = 0; k < stream; ++k) r.jump();
        return r;
    }

    std::uint64_t next() {
        const std::uint64_t result =
            detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Advance 2^128 steps (standard xoshiro256 jump polynomial).
    void jump() { apply_jump({0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                              0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL}); }

    // Advance 2^192 steps.
    void long_jump() { apply_jump({0x76e15d3efefdcbbfULL, 0xc5004e441c522fb3ULL,
                                   0x77710069854ee241ULL, 0x39109bb02acbe635ULL}); }

    // Uniform on [0, 1) with the full 53 bits of double precision.
    double uniform01() {
        return double(next() >> 11) * 0x1.0p-53;
    }

    // Uniform on {0, ..., n-1} without modulo bias (Lemire's method).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: empty range");
        const std::uint64_t bound = n;
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (-bound) % bound;
            while (low < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    // Standard normal via the Marsaglia polar method; the second variate
    // of each accepted pair is cached for the next call.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Gamma(shape, scale) via Marsaglia and Tsang's squeeze method,
    // boosted through shape+1 when shape < 1.
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0))
            throw std::invalid_argument("gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double u = 1.0 - uniform01();  // in (0, 1]
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * scale;
        }
    }

    double chi_squared(double df) { return gamma(0.5 * df, 2.0); }

private:
    void apply_jump(const std::array<std::uint64_t, 4>& poly) {
        std::array<std::uint64_t, 4> t{0, 0, 0, 0};
        for (std::uint64_t word : poly) {
            for (int b = 0; b < 64; ++b) {
                if (word & (std::uint64_t(1) << b)) {
                    t[0] ^= state_[0];
                    t[1] ^= state_[1];
                    t[2] ^= state_[2];
                    t[3] ^= state_[3];
                }
                next();
            }
        }
        state_ = t;
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ivbma
