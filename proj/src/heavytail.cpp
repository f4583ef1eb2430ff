#include "walklab/heavytail.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

constexpr nat128 kValueCap = nat128(1) << 126;

// Euler-Maclaurin tail of sum_{j>=a} j^(-5/4). Valid for a >= 16; the last
// kept term is the B4 correction, the error radius covers the next one.
Enclosure tail_raw_em(nat128 a) {
    dd y = dd_pow_m14(a);          // a^(-1/4)
    dd y4 = (y * y) * (y * y);     // a^(-1)
    dd y5 = y4 * y;                // a^(-5/4)
    dd y9 = y5 * y4;               // a^(-9/4)
    dd y17 = y9 * y4 * y4;         // a^(-17/4)
    dd v = dd{4.0} * y + dd{0.5} * y5 + dd{5.0 / 48.0} * y9 - dd{13.0 / 1024.0} * y17;
    double y25 = y17.to_double() * y4.to_double() * y4.to_double();
    double err = 7e-3 * y25 + 1e-31 * v.to_double() + 1e-300;
    return {v, err};
}

double tail_raw_em_double(double a) {
    double y = std::pow(a, -0.25);
    double y4 = 1.0 / a;
    double y5 = y * y4;
    double y9 = y5 * y4;
    return 4.0 * y + 0.5 * y5 + (5.0 / 48.0) * y9 - (13.0 / 1024.0) * y9 * y4 * y4;
}

// Euler-Maclaurin tail of sum_{j>=a} j^(-5/4) ln j, for a >= 16. The error
// radius is three times the magnitude bound of the first omitted correction;
// the oracle test pins it against exact partial sums.
Enclosure tail_log_em(nat128 a) {
    dd y = dd_pow_m14(a);
    dd y4 = (y * y) * (y * y);
    dd y5 = y4 * y;
    dd y9 = y5 * y4;
    double la = std::log(to_double(a));
    dd lna{la};
    dd v = dd{4.0} * y * (lna + dd{4.0}) + dd{0.5} * y5 * lna +
           dd{1.0 / 12.0} * y9 * (dd{1.25} * lna - dd{1.0});
    double y17 = y9.to_double() * y4.to_double() * y4.to_double();
    double err = (10.0 * la + 16.0) / 240.0 * y17 + 4e-16 * std::fabs(v.to_double()) + 1e-300;
    return {v, err};
}

Enclosure enc_log(const Enclosure& a) {
    double m = a.value.to_double();
    if (m - a.err <= 0) throw UsageError("enc_log of non-positive enclosure");
    double v = std::log(m);
    double err = a.err / (m - a.err) + 3e-16 * std::fabs(v) + 1e-300;
    // Refine with one dd step: log(a) = v + log(a * e^-v) ~= v + (a*e^-v - 1).
    dd rest = a.value * dd{std::exp(-v)} - dd{1.0};
    return {dd{v} + rest, err};
}

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
    const char* s = std::getenv(name);
    if (!s || !*s) return fallback;
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end) return fallback;
    return v;
}

}  // namespace

std::size_t HeavyTail::default_cache_depth() {
    return static_cast<std::size_t>(env_u64("WALKLAB_CACHE_DEPTH", 1u << 20));
}

HeavyTail::HeavyTail(std::size_t cache_depth) : depth_(std::max<std::size_t>(cache_depth, 4096)) {
    prefix_.resize(depth_ + 1);
    prefix_log_.resize(depth_ + 1);
    prefix_[0] = dd{0.0};
    prefix_log_[0] = dd{0.0};
    dd run{0.0}, run_log{0.0};
    for (std::size_t n = 1; n <= depth_; ++n) {
        dd y = dd_pow_m14(n);
        dd p = ((y * y) * (y * y)) * y;  // n^(-5/4)
        run = run + p;
        run_log = run_log + p * dd{std::log(static_cast<double>(n))};
        prefix_[n] = run;
        prefix_log_[n] = run_log;
    }
    double acc_err = 3e-31 * static_cast<double>(depth_);
    Enclosure head(prefix_[depth_], acc_err);
    zeta_ = head + tail_raw_em(depth_ + 1);
    c_ = enc_inverse(zeta_);
    Enclosure head_log(prefix_log_[depth_], acc_err * 16.0);
    zeta_log_ = head_log + tail_log_em(depth_ + 1);
    cdf_d_.resize(depth_ + 1);
    cdf_d_[0] = 0.0;
    double cmid = c_.mid();
    for (std::size_t n = 1; n <= depth_; ++n) cdf_d_[n] = cmid * prefix_[n].to_double();
}

const HeavyTail& HeavyTail::shared() {
    static const HeavyTail instance;
    return instance;
}

Enclosure HeavyTail::prefix_enclosure(std::size_t n) const {
    return {prefix_[n], 3e-31 * static_cast<double>(n) + 1e-300};
}

Enclosure HeavyTail::tail_raw(nat128 a) const {
    if (a == 0) throw UsageError("tail_raw: a must be >= 1");
    if (a <= depth_ + 1) {
        return zeta_ - prefix_enclosure(static_cast<std::size_t>(a - 1));
    }
    return tail_raw_em(a);
}

double HeavyTail::pmf(nat128 n) const {
    if (n == 0) throw UsageError("pmf: n must be a positive integer");
    dd y = dd_pow_m14(n);
    dd p = ((y * y) * (y * y)) * y;
    return (c_.value * p).to_double();
}

double HeavyTail::log_pmf(nat128 n) const {
    if (n == 0) throw UsageError("log_pmf: n must be a positive integer");
    return std::log(c_.mid()) - 1.25 * std::log(to_double(n));
}

Enclosure HeavyTail::cdf(nat128 n) const {
    if (n == 0) return Enclosure(0.0);
    if (n <= depth_) return c_ * prefix_enclosure(static_cast<std::size_t>(n));
    return Enclosure(1.0) - c_ * tail_raw_em(n + 1);
}

Enclosure HeavyTail::tail_mass(nat128 n) const {
    if (n == 0) throw UsageError("tail_mass: n must be >= 1");
    return c_ * tail_raw(n);
}

Enclosure HeavyTail::entropy_enclosure() const {
    // H = ln(1/c) + (5/4) c sum_n n^(-5/4) ln n.
    return enc_log(zeta_) + Enclosure(1.25) * c_ * zeta_log_;
}

double HeavyTail::entropy(double tol) const {
    if (tol <= 0) throw UsageError("entropy: tol must be positive");
    Enclosure h = entropy_enclosure();
    if (h.width() > tol) {
        throw VerificationError("entropy enclosure wider than tol");
    }
    return h.mid();
}

Enclosure HeavyTail::head_plogp(nat128 m) const {
    if (m == 0) throw UsageError("head_plogp: m must be >= 1");
    Enclosure lz = enc_log(zeta_);
    if (m <= depth_) {
        auto idx = static_cast<std::size_t>(m);
        Enclosure s(prefix_[idx], 3e-31 * static_cast<double>(idx));
        Enclosure slog(prefix_log_[idx], 5e-30);
        return c_ * (lz * s + Enclosure(1.25) * slog);
    }
    Enclosure tail_part = c_ * (lz * tail_raw_em(m + 1) + Enclosure(1.25) * tail_log_em(m + 1));
    return entropy_enclosure() - tail_part;
}

Enclosure HeavyTail::entropy_conditioned(nat128 m) const {
    // H(X | X <= m) = head_plogp(m)/P + ln P with P = cdf(m).
    Enclosure p = cdf(m);
    return head_plogp(m) * enc_inverse(p) + enc_log(p);
}

nat128 HeavyTail::sample_tail(nat128 v_bits) const {
    // Smallest n > depth with c * tail_raw(n+1) < v, v = v_bits / 2^128.
    double v_d = std::ldexp(to_double(v_bits), -128);
    double cmid = c_.mid();
    double guess_root = 4.0 * cmid / v_d;  // from 4c n^(-1/4) = v
    double guess = guess_root * guess_root;
    guess = guess * guess;
    nat128 lo = depth_ / 2;
    nat128 hi;
    if (guess >= std::ldexp(1.0, 126)) {
        hi = kValueCap;
    } else {
        hi = static_cast<nat128>(guess) + 16;
        if (hi <= lo) hi = lo + 1;
    }
    auto pred = [&](nat128 n) {
        return cmid * tail_raw_em_double(to_double(n) + 1.0) < v_d;
    };
    while (!pred(hi)) {
        if (hi >= kValueCap) {
            clamps_.fetch_add(1, std::memory_order_relaxed);
            return kValueCap;
        }
        hi = hi > kValueCap / 2 ? kValueCap : hi * 2;
    }
    while (hi - lo > 1) {
        nat128 mid = lo + (hi - lo) / 2;
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Certify the boundary with the dd enclosure; ambiguity means v falls
    // inside an enclosure radius (width ~1e-31 of the tail mass).
    dd v_dd = dd_from_nat128(v_bits);
    v_dd = dd{std::ldexp(v_dd.hi, -128), std::ldexp(v_dd.lo, -128)};
    Enclosure at = c_ * tail_raw(hi + 1);     // must be < v
    Enclosure before = c_ * tail_raw(hi);     // must be >= v
    bool ok_hi = at.upper() < v_dd.to_double() || at.mid() + at.err < v_dd.hi;
    bool ok_lo = before.lower() >= v_dd.to_double();
    if (!ok_hi || !ok_lo) ambiguous_.fetch_add(1, std::memory_order_relaxed);
    return hi;
}

nat128 HeavyTail::sample(StreamRng& rng) const {
    std::uint64_t w_hi = rng.next_u64();
    std::uint64_t w_lo = rng.next_u64();
    double u_d = static_cast<double>(w_hi >> 11) * 0x1.0p-53;
    if (u_d < cdf_d_[depth_] - 1e-9) {
        // Head path: smallest n with u < c*prefix[n]. Try the hot 4096-entry
        // block first, then the full cache.
        std::size_t block = std::min<std::size_t>(4096, depth_);
        const double* begin = cdf_d_.data() + 1;
        const double* end;
        if (u_d < cdf_d_[block]) {
            end = cdf_d_.data() + block + 1;
        } else {
            end = cdf_d_.data() + depth_ + 1;
        }
        const double* it = std::upper_bound(begin, end, u_d);
        auto n = static_cast<std::size_t>(it - cdf_d_.data());
        // Boundary guard: re-derive with dd when the double search landed
        // within rounding distance of a cell edge.
        bool near_low = n > 1 && u_d - cdf_d_[n - 1] < 1e-11;
        bool near_high = n <= depth_ && cdf_d_[n] - u_d < 1e-11;
        if (near_low || near_high) {
            dd u_dd = dd{std::ldexp(static_cast<double>(w_hi >> 32), -32)} +
                      dd{std::ldexp(static_cast<double>(w_hi & 0xffffffffULL), -64)} +
                      dd{std::ldexp(static_cast<double>(w_lo >> 32), -96)} +
                      dd{std::ldexp(static_cast<double>(w_lo & 0xffffffffULL), -128)};
            std::size_t n_lo = n > 2 ? n - 2 : 1;
            std::size_t n_hi = std::min(n + 2, depth_);
            std::size_t pick = n_hi;
            for (std::size_t k = n_lo; k <= n_hi; ++k) {
                if (u_dd < c_.value * prefix_[k]) {
                    pick = k;
                    break;
                }
            }
            return pick;
        }
        return n;
    }
    nat128 u_bits = (nat128(w_hi) << 64) | w_lo;
    if (u_bits == 0) return 1;
    nat128 v_bits = ~u_bits + 1;  // 2^128 - u
    // Seam: decide head vs tail exactly at the cache edge.
    double v_d = std::ldexp(to_double(v_bits), -128);
    Enclosure cache_tail = c_ * tail_raw_em(depth_ + 1);
    if (v_d > cache_tail.upper()) {
        // Still inside the cache; walk back from the end.
        dd u_dd = dd{std::ldexp(static_cast<double>(w_hi >> 32), -32)} +
                  dd{std::ldexp(static_cast<double>(w_hi & 0xffffffffULL), -64)} +
                  dd{std::ldexp(static_cast<double>(w_lo >> 32), -96)} +
                  dd{std::ldexp(static_cast<double>(w_lo & 0xffffffffULL), -128)};
        for (std::size_t n = depth_; n >= 1; --n) {
            if (!(u_dd < c_.value * prefix_[n])) return n + 1;
        }
        return 1;
    }
    return sample_tail(v_bits);
}

nat128 HeavyTail::sample_truncated(StreamRng& rng, nat128 n_trunc) const {
    if (n_trunc < 1) throw UsageError("sample_truncated: empty support");
    for (;;) {
        nat128 x = sample(rng);
        if (x <= n_trunc) return x;
    }
}

namespace {

// Max segment tree answering "leftmost index in [l, n) with value >= x".
class MaxTree {
public:
    explicit MaxTree(std::span<const nat128> s) : n_(s.size()), t_(2 * s.size()) {
        for (std::size_t i = 0; i < n_; ++i) t_[n_ + i] = s[i];
        for (std::size_t i = n_ - 1; i > 0; --i) t_[i] = std::max(t_[2 * i], t_[2 * i + 1]);
    }

    std::size_t first_at_least(std::size_t l, nat128 x) const {
        if (l >= n_) return n_;
        return descend(1, 0, n_, l, x);
    }

private:
    std::size_t descend(std::size_t node, std::size_t lo, std::size_t hi, std::size_t l, nat128 x) const {
        if (hi <= l || t_[node] < x) return n_;
        if (hi - lo == 1) return lo;
        std::size_t mid = lo + (hi - lo) / 2;
        std::size_t left = descend(2 * node, lo, mid, l, x);
        if (left != n_) return left;
        return descend(2 * node + 1, mid, hi, l, x);
    }

    std::size_t n_;
    std::vector<nat128> t_;
};

}  // namespace

TrajectoryStats trajectory_stats(std::span<const nat128> s) {
    for (nat128 v : s) {
        if (v == 0) throw UsageError("trajectory_stats: values must be >= 1");
    }
    std::size_t m = s.size();
    TrajectoryStats st;
    st.running_max.resize(m);
    st.next_index.assign(m, 0);
    st.a_event.resize(m);
    st.b_event.assign(m, 2);
    nat128 mx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (s[i] > mx) mx = s[i];
        st.running_max[i] = mx;
        nat128 k = i + 1;
        st.a_event[i] = mx < k * k ? 1 : 0;
    }
    MaxTree tree(s);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = tree.first_at_least(i + 1, st.running_max[i]);
        if (j < m) {
            st.next_index[i] = static_cast<std::uint32_t>(j + 1);
            st.b_event[i] = s[j] == st.running_max[i] ? 1 : 0;
        }
    }
    std::uint32_t last_bad = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (st.a_event[i] || st.b_event[i] == 1) last_bad = static_cast<std::uint32_t>(i + 1);
    }
    st.ind_prime = last_bad + 1;
    st.ind = st.ind_prime <= m ? st.next_index[st.ind_prime - 1] : 0;
    return st;
}

bool is_in_E(std::span<const nat128> s, const LemmaParams& params) {
    if (params.K < 1 || params.N < 1) throw UsageError("is_in_E: K and N must be >= 1");
    if (s.size() < params.K) throw UsageError("is_in_E: sequence shorter than K");
    nat128 mx = 0;
    std::uint64_t mult = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] > mx) {
            mx = s[i];
            mult = 1;
        } else if (s[i] == mx) {
            ++mult;
        }
        nat128 k = i + 1;
        if (k == params.K && mx > params.N) return false;
        if (k >= params.K) {
            if (mx < k * k) return false;
            if (mult != 1) return false;
        }
    }
    return true;
}

std::uint64_t min_valid_K(std::span<const nat128> s) {
    nat128 mx = 0;
    std::uint64_t mult = 0;
    std::uint64_t last_bad = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] > mx) {
            mx = s[i];
            mult = 1;
        } else if (s[i] == mx) {
            ++mult;
        }
        nat128 k = i + 1;
        if (mx < k * k || mult != 1) last_bad = static_cast<std::uint64_t>(k);
    }
    return last_bad + 1;
}

CalibrationResult calibrate_KN(double eps, std::uint64_t m, std::uint64_t samples,
                               StreamRng& rng, std::uint32_t k_cap, const HeavyTail& dist) {
    if (!(eps > 0.0 && eps < 0.125)) throw UsageError("calibrate_KN: need 0 < eps < 1/8");
    if (m < 4) throw UsageError("calibrate_KN: need m >= 4");
    if (samples < 100) throw UsageError("calibrate_KN: need at least 100 samples");
    double margin = 3.0 * std::sqrt(eps * (1.0 - eps) / static_cast<double>(samples));
    double target = 1.0 - eps + margin;
    if (target >= 1.0) throw UsageError("calibrate_KN: sample count too small for the margin");
    std::uint32_t kc = static_cast<std::uint32_t>(std::min<std::uint64_t>(k_cap, m));

    std::vector<std::uint32_t> kmin(samples);
    std::vector<std::uint64_t> mk(static_cast<std::size_t>(samples) * kc);
    std::vector<nat128> buf(m);
    constexpr std::uint64_t sat = ~0ULL;
    for (std::uint64_t i = 0; i < samples; ++i) {
        nat128 mx = 0;
        std::uint64_t mult = 0;
        std::uint64_t last_bad = 0;
        for (std::uint64_t k = 1; k <= m; ++k) {
            nat128 v = dist.sample(rng);
            buf[k - 1] = v;
            if (v > mx) {
                mx = v;
                mult = 1;
            } else if (v == mx) {
                ++mult;
            }
            if (mx < nat128(k) * k || mult != 1) last_bad = k;
            if (k <= kc) {
                mk[i * kc + (k - 1)] = mx > nat128(sat) ? sat : static_cast<std::uint64_t>(mx);
            }
        }
        kmin[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(last_bad + 1, m + 1));
    }

    auto t_needed = static_cast<std::uint64_t>(std::ceil(target * static_cast<double>(samples)));
    std::vector<std::pair<std::uint32_t, double>> trace;
    std::vector<std::uint64_t> pool;
    pool.reserve(samples);
    for (std::uint32_t K = 1; K <= kc; ++K) {
        pool.clear();
        for (std::uint64_t i = 0; i < samples; ++i) {
            if (kmin[i] <= K) pool.push_back(mk[i * kc + (K - 1)]);
        }
        trace.emplace_back(K, static_cast<double>(pool.size()) / static_cast<double>(samples));
        if (pool.size() < t_needed) continue;
        std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(t_needed - 1), pool.end());
        std::uint64_t N = pool[t_needed - 1];
        if (N == sat) continue;
        CalibrationResult res;
        res.K = K;
        res.N = N;
        res.samples = samples;
        res.m = m;
        res.target = target;
        std::uint64_t pass = 0;
        for (std::uint64_t i = 0; i < samples; ++i) {
            bool ok34 = kmin[i] <= K;
            bool ok2 = mk[i * kc + (K - 1)] <= N;
            if (ok34 && ok2) ++pass;
            if (!ok2) ++res.fail_prefix_bound;
            if (!ok34) ++res.fail_growth_or_tie;
        }
        res.mass = static_cast<double>(pass) / static_cast<double>(samples);
        res.sigma = std::sqrt(res.mass * (1.0 - res.mass) / static_cast<double>(samples));
        res.sweep_trace = std::move(trace);
        return res;
    }
    // Diagnostics: best achievable fraction over the sweep.
    std::uint64_t best = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        if (kmin[i] <= kc) ++best;
    }
    throw SearchFailure("calibrate_KN: no (K,N) reaches target " + std::to_string(target) +
                        "; best property-3/4 fraction at K=" + std::to_string(kc) + " is " +
                        std::to_string(static_cast<double>(best) / static_cast<double>(samples)));
}

double estimate_E_mass(const LemmaParams& params, std::uint64_t samples, StreamRng& rng,
                       const HeavyTail& dist) {
    if (params.m < params.K) throw UsageError("estimate_E_mass: m < K");
    std::vector<nat128> buf(params.m);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        for (std::uint64_t k = 0; k < params.m; ++k) buf[k] = dist.sample(rng);
        if (is_in_E(buf, params)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace walklab
