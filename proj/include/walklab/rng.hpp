#pragma once

#include <cstdint>
#include <limits>

#include "walklab/bigint.hpp"

namespace walklab {

// Counter-based stream generator. Each stream is keyed by (seed, stream_id)
// and produces out(i) = mix64(key + i*GOLDEN), a Weyl sequence pushed through
// a full-avalanche mixer (splitmix64 finalizer). Streams with distinct ids
// are independent for practical purposes and can be consumed in parallel
// without coordination; all results are reproducible from (seed, stream_id).
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream_id)
        : state_(derive_key(seed, stream_id)) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = state_ += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    nat128 next_u128() {
        nat128 hi = next_u64();
        return (hi << 64) | next_u64();
    }

    // Uniform double in [0,1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), unbiased via rejection on the top range.
    std::uint64_t next_below(std::uint64_t n) {
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit || limit == 0) return v % n;
        }
    }

    bool next_bool() { return (next_u64() >> 63) != 0; }

    // Exact Bernoulli with success probability eps * 2^-n for 0 < eps < 1.
    // Compares a lazily drawn uniform u in [0,1) against the threshold: the
    // first n bits of u must all be zero, and the remainder must fall below
    // eps. Probability of consuming more than two 64-bit words is 2^-64.
    bool bernoulli_eps_pow2(double eps, nat128 n) {
        while (n >= 64) {
            if (next_u64() != 0) return false;
            n -= 64;
        }
        unsigned shift = static_cast<unsigned>(n);
        std::uint64_t w = next_u64();
        if (shift > 0 && (w >> (64 - shift)) != 0) return false;
        // Remaining uniform in [0,1) from the low 64-shift bits, extended by
        // one more word; 117+ bits of resolution vs a double threshold.
        double u = static_cast<double>((w << shift) >> 11) * 0x1.0p-53;
        if (u < eps - 0x1.0p-50) return true;
        if (u > eps + 0x1.0p-50) return false;
        // Within rounding distance of the threshold: extend.
        long double ul = static_cast<long double>(w << shift) * 0x1.0p-64L +
                         static_cast<long double>(next_u64()) * 0x1.0p-128L;
        return ul < static_cast<long double>(eps);
    }

private:
    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t k = mix64(seed ^ 0x8ad462c9f0b3d2e5ULL);
        k = mix64(k + mix64(stream_id * 0xd6e8feb86659fd93ULL));
        return k;
    }

    std::uint64_t state_;
};

// Stage-level stream ids used by the pipeline so that every stage sees an
// independent, named stream regardless of execution order or thread count.
namespace stream_id {
constexpr std::uint64_t calibration = 1;
constexpr std::uint64_t calibration_holdout = 2;
constexpr std::uint64_t claim_check = 3;
constexpr std::uint64_t omega_mass = 4;
constexpr std::uint64_t pushforward = 5;
constexpr std::uint64_t rates = 6;
constexpr std::uint64_t scratch = 100;
// Parallel workers for stage s use ids worker_base + 1000*s + worker_index.
constexpr std::uint64_t worker_base = 1u << 20;
}  // namespace stream_id

}  // namespace walklab
