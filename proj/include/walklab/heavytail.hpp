#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "walklab/bigint.hpp"
#include "walklab/dd.hpp"
#include "walklab/rng.hpp"

namespace walklab {

// The step-count distribution p(n) = c * n^(-5/4) on {1,2,...}, with
// 1/c = sum n^(-5/4). Partial sums up to the cache depth are kept exactly
// (double-double); everything past the cache goes through an Euler-Maclaurin
// tail expansion with a certified error radius:
//
//   sum_{j>=a} j^(-5/4) = 4 a^(-1/4) + a^(-5/4)/2 + (5/48) a^(-9/4)
//                         - (13/1024) a^(-17/4) + O(a^(-25/4)).
//
// Sampling is exact inverse-CDF against the cached sums, driven by a 128-bit
// uniform; draws beyond the cache invert the tail expansion. Support is
// unbounded up to the 2^126 representation cap; hits on the cap or on an
// enclosure-ambiguous boundary are counted and reported, both have
// probability below 1e-9 per draw.
class HeavyTail {
public:
    explicit HeavyTail(std::size_t cache_depth = default_cache_depth());

    // Shared instance with the default cache depth (env WALKLAB_CACHE_DEPTH).
    static const HeavyTail& shared();
    static std::size_t default_cache_depth();

    std::size_t cache_depth() const { return depth_; }

    Enclosure zeta() const { return zeta_; }        // 1/c
    Enclosure normalizer() const { return c_; }     // c

    // p(n), relative error well below 1e-12. n = 0 is a usage error.
    double pmf(nat128 n) const;
    double log_pmf(nat128 n) const;  // natural log, double precision

    Enclosure cdf(nat128 n) const;        // P(X <= n)
    Enclosure tail_mass(nat128 n) const;  // P(X >= n), n >= 1

    // sum_{j >= a} j^(-5/4) (unnormalized tail).
    Enclosure tail_raw(nat128 a) const;

    // Shannon entropy in nats. Throws if the certified width exceeds tol.
    double entropy(double tol) const;
    Enclosure entropy_enclosure() const;
    // Entropy of X conditioned on X <= m (m = 1 gives 0).
    Enclosure entropy_conditioned(nat128 m) const;
    // sum_{n <= m} p(n) ln(1/p(n)).
    Enclosure head_plogp(nat128 m) const;

    nat128 sample(StreamRng& rng) const;
    nat128 sample_truncated(StreamRng& rng, nat128 n_trunc) const;

    std::uint64_t clamp_count() const { return clamps_.load(std::memory_order_relaxed); }
    std::uint64_t ambiguous_count() const { return ambiguous_.load(std::memory_order_relaxed); }

private:
    Enclosure prefix_enclosure(std::size_t n) const;  // sum_{j<=n} j^(-5/4)
    nat128 sample_tail(nat128 v_bits) const;          // inverse tail past the cache

    std::size_t depth_;
    std::vector<dd> prefix_;       // prefix_[n] = sum_{j<=n} j^(-5/4), n in [0, depth]
    std::vector<dd> prefix_log_;   // sum_{j<=n} j^(-5/4) ln j
    std::vector<double> cdf_d_;    // c * prefix_[n] rounded to double
    Enclosure zeta_;
    Enclosure c_;
    Enclosure zeta_log_;           // sum j^(-5/4) ln j over all j
    mutable std::atomic<std::uint64_t> clamps_{0};
    mutable std::atomic<std::uint64_t> ambiguous_{0};
};

// Per-sequence record statistics. Indices are 1-based to match the usual
// notation; entry k lives at offset k-1. next(k) and the tie indicator are
// reported as "beyond horizon" (0 / undetermined) when the sequence ends
// before they are decided.
struct TrajectoryStats {
    std::vector<nat128> running_max;        // M_k = max(s_1..s_k)
    std::vector<std::uint32_t> next_index;  // min{i > k : s_i >= M_k}, 0 if beyond horizon
    std::vector<std::uint8_t> a_event;      // M_k < k^2
    std::vector<std::uint8_t> b_event;      // s_next(k) == M_k; 2 = undetermined
    std::uint32_t ind_prime = 1;            // 1 + last k with A_k or B_k
    std::uint32_t ind = 0;                  // next(ind_prime), 0 if beyond horizon
};

TrajectoryStats trajectory_stats(std::span<const nat128> s);

struct LemmaParams {
    double eps = 0.1;
    nat128 K = 1;
    nat128 N = 1;
    std::uint64_t m = 0;
};

// Membership in the good event: max(s_1..s_K) <= N, and for every
// K <= k <= m the running max is at least k^2 and is attained exactly once.
bool is_in_E(std::span<const nat128> s, const LemmaParams& params);

// Smallest K such that properties 3 and 4 hold on [K, m]; m+1 when even
// K = m fails. Used by the calibration sweep.
std::uint64_t min_valid_K(std::span<const nat128> s);

struct CalibrationResult {
    nat128 K = 0;
    nat128 N = 0;
    double mass = 0.0;   // empirical E-mass at (K, N) on the calibration set
    double sigma = 0.0;  // binomial sigma of the mass estimate
    std::uint64_t samples = 0;
    std::uint64_t m = 0;
    double target = 0.0;
    // Failure counts at the returned (K, N) over the calibration set.
    std::uint64_t fail_prefix_bound = 0;  // property 2
    std::uint64_t fail_growth_or_tie = 0; // properties 3-4
    // (K, fraction passing properties 3-4 from K on) for each K examined.
    std::vector<std::pair<std::uint32_t, double>> sweep_trace;
};

// Sweeps K = 1..k_cap in increasing order; for each K the minimal N is the
// empirical quantile of M_K over sequences already satisfying properties 3-4
// from K on. Returns the first (K, N) whose empirical E-mass reaches
// 1 - eps + 3*sigma. Throws SearchFailure with diagnostics if none does.
CalibrationResult calibrate_KN(double eps, std::uint64_t m, std::uint64_t samples,
                               StreamRng& rng, std::uint32_t k_cap = 64,
                               const HeavyTail& dist = HeavyTail::shared());

// Fraction of fresh sequences in E at the given parameters.
double estimate_E_mass(const LemmaParams& params, std::uint64_t samples, StreamRng& rng,
                       const HeavyTail& dist = HeavyTail::shared());

}  // namespace walklab
