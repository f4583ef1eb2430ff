#include "walklab/construction.hpp"

#include <algorithm>
#include <cmath>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

void elem_bounds(const GroupElement& x, BigInt& shift_bound, BigInt& lamp_bound) {
    BigInt at = abs(x.shift);
    if (at > shift_bound) shift_bound = at;
    for (const BigInt& p : x.lamps) {
        BigInt ap = abs(p);
        if (ap > lamp_bound) lamp_bound = ap;
    }
}

void elem_bounds_sym(const GroupElement& x, BigInt& shift_bound, BigInt& lamp_bound) {
    elem_bounds(x, shift_bound, lamp_bound);
    elem_bounds(invert(x), shift_bound, lamp_bound);
}

}  // namespace

std::string oracle_mode_name(OracleMode m) {
    return m == OracleMode::certificate ? "certificate" : "exact";
}

OracleMode oracle_mode_from_name(const std::string& s) {
    if (s == "certificate") return OracleMode::certificate;
    if (s == "exact") return OracleMode::exact;
    throw UsageError("unknown oracle mode: " + s);
}

ConstructionState ConstructionState::build(const BuildParams& params) {
    if (is_identity(params.h)) throw UsageError("build: h must not be the identity");
    if (!params.group.icc()) {
        throw UsageError("build: " + params.group.name() +
                         " has finite conjugacy classes; no placement exists");
    }
    if (params.group.kind != GroupKind::lamplighter) {
        throw UsageError("build: certificate placement is implemented for the lamplighter group");
    }
    if (!(params.eps > 0.0 && params.eps < 0.125)) throw UsageError("build: need 0 < eps < 1/8");
    if (params.K < 1 || params.N < 1) throw UsageError("build: need K, N >= 1");
    if (params.h.kind != GroupKind::lamplighter) throw UsageError("build: h from a different group");

    Enumerator en(params.group);
    BigInt shift_bound(0), lamp_bound(0);
    elem_bounds_sym(params.h, shift_bound, lamp_bound);  // accumulated set starts as {e, h, h^-1}

    std::vector<StepRecord> records;
    records.reserve(params.steps);
    for (std::uint64_t j = 1; j <= params.steps; ++j) {
        nat128 n = params.N + j;
        BigInt n_prev = BigInt(dec_string(n - 1));
        StepRecord rec;
        rec.n = n;
        try {
            auto [g, cert] = pick_super_switching_lamplighter(n_prev, shift_bound, lamp_bound);
            rec.g = std::move(g);
            rec.cert = std::move(cert);
        } catch (const std::exception& e) {
            throw VerificationError("build: step " + dec_string(n) + ": " + e.what());
        }
        if (params.mode == OracleMode::exact) {
            // Enumerate the (2n'+1)-fold product set of the accumulated set
            // and run the exhaustive predicate against the placed element.
            BigInt expo = 2 * n_prev + 1;
            if (expo > BigInt(1'000'000)) {
                throw UsageError("build: exact mode needs small padding N (product exponent " +
                                 dec_string(expo) + ")");
            }
            std::vector<GroupElement> base{identity(params.group), params.h, invert(params.h)};
            for (const StepRecord& r : records) {
                base.push_back(r.a);
                base.push_back(invert(r.a));
                base.push_back(r.g);
                base.push_back(invert(r.g));
            }
            SymmetricSet c_prev(params.group, std::move(base));
            SymmetricSet x = product_ball(c_prev, static_cast<std::uint64_t>(expo), params.exact_budget);
            if (!is_super_switching(rec.g, x)) {
                throw VerificationError("build: step " + dec_string(n) +
                                        ": certificate pick failed the exact checker");
            }
            rec.exact_checked = true;
        }
        rec.a = en.at(j);
        elem_bounds_sym(rec.a, shift_bound, lamp_bound);
        elem_bounds_sym(rec.g, shift_bound, lamp_bound);
        rec.shift_bound_after = shift_bound;
        rec.lamp_bound_after = lamp_bound;
        records.push_back(std::move(rec));
    }
    return ConstructionState(params, std::move(records));
}

GroupElement ConstructionState::step_atom(nat128 n, int j) const {
    if (n == 0 || j < 1 || j > 4) throw UsageError("step_atom: bad arguments");
    if (n > n_trunc()) {
        throw OverflowError("step_atom: index " + dec_string(n) + " beyond truncation depth " +
                            dec_string(n_trunc()));
    }
    if (n <= params_.N) return identity(params_.group);
    const StepRecord& rec = records_[static_cast<std::size_t>(n - params_.N - 1)];
    switch (j) {
        case 1: return rec.a;
        case 2: return invert(rec.a);
        case 3: return rec.g;
        default: return invert(rec.g);
    }
}

double ConstructionState::step_weight_formula(double eps, nat128 n, int j) {
    if (n == 0 || j < 1 || j > 4) throw UsageError("step_weight: bad arguments");
    double a_side = eps * std::exp2(-to_double(n));
    return j <= 2 ? 0.5 * a_side : 0.5 * (1.0 - a_side);
}

double ConstructionState::log_step_weight_formula(double eps, nat128 n, int j) {
    if (n == 0 || j < 1 || j > 4) throw UsageError("log_step_weight: bad arguments");
    constexpr double ln2 = 0.6931471805599453;
    if (j <= 2) return std::log(0.5 * eps) - to_double(n) * ln2;
    double a_side = eps * std::exp2(-to_double(n));
    return std::log(0.5) + std::log1p(-a_side);
}

double ConstructionState::step_weight(nat128 n, int j) const {
    if (n != 0 && n > n_trunc()) {
        throw OverflowError("step_weight: index beyond truncation depth");
    }
    return step_weight_formula(params_.eps, n, j);
}

double ConstructionState::log_step_weight(nat128 n, int j) const {
    if (n != 0 && n > n_trunc()) {
        throw OverflowError("log_step_weight: index beyond truncation depth");
    }
    return log_step_weight_formula(params_.eps, n, j);
}

bool ConstructionState::revalidate_certificates() const {
    BigInt shift_bound(0), lamp_bound(0);
    elem_bounds_sym(params_.h, shift_bound, lamp_bound);
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const StepRecord& rec = records_[i];
        if (!rec.cert.revalidate()) return false;
        // The certificate must have been issued against the bounds in force
        // before this step, and those bounds must dominate the set.
        if (rec.cert.shift_bound != shift_bound || rec.cert.lamp_bound != lamp_bound) return false;
        if (rec.g.lamps.size() != 1 || rec.g.lamps[0] != rec.cert.lamp_pos ||
            rec.g.shift != rec.cert.shift) {
            return false;
        }
        elem_bounds_sym(rec.a, shift_bound, lamp_bound);
        elem_bounds_sym(rec.g, shift_bound, lamp_bound);
        if (rec.shift_bound_after != shift_bound || rec.lamp_bound_after != lamp_bound) return false;
    }
    return true;
}

nlohmann::json ConstructionState::to_json() const {
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& rec : records_) {
        steps.push_back(nlohmann::json{
            {"n", dec_string(rec.n)},
            {"a", element_to_json(rec.a)},
            {"g", element_to_json(rec.g)},
            {"certificate", rec.cert.to_json()},
            {"exact_checked", rec.exact_checked},
            {"shift_bound_after", dec_string(rec.shift_bound_after)},
            {"lamp_bound_after", dec_string(rec.lamp_bound_after)},
        });
    }
    return nlohmann::json{
        {"schema_version", 1},
        {"group", descriptor_to_json(params_.group)},
        {"h", element_to_json(params_.h)},
        {"eps", params_.eps},
        {"K", dec_string(params_.K)},
        {"N", dec_string(params_.N)},
        {"steps", params_.steps},
        {"mode", oracle_mode_name(params_.mode)},
        {"records", std::move(steps)},
    };
}

ConstructionState ConstructionState::from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1) throw UsageError("unsupported state schema version");
    BuildParams params;
    params.group = descriptor_from_json(j.at("group"));
    params.h = element_from_json(params.group, j.at("h"));
    params.eps = j.at("eps").get<double>();
    params.K = parse_nat128(j.at("K").get<std::string>());
    params.N = parse_nat128(j.at("N").get<std::string>());
    params.steps = j.at("steps").get<std::uint64_t>();
    params.mode = oracle_mode_from_name(j.at("mode").get<std::string>());
    std::vector<StepRecord> records;
    for (const auto& rj : j.at("records")) {
        StepRecord rec;
        rec.n = parse_nat128(rj.at("n").get<std::string>());
        rec.a = element_from_json(params.group, rj.at("a"));
        rec.g = element_from_json(params.group, rj.at("g"));
        rec.cert = SwitchingCertificate::from_json(rj.at("certificate"));
        rec.exact_checked = rj.at("exact_checked").get<bool>();
        rec.shift_bound_after = parse_bigint(rj.at("shift_bound_after").get<std::string>());
        rec.lamp_bound_after = parse_bigint(rj.at("lamp_bound_after").get<std::string>());
        records.push_back(std::move(rec));
    }
    if (records.size() != params.steps) throw UsageError("state records inconsistent with steps");
    ConstructionState state(params, std::move(records));
    if (!state.revalidate_certificates()) {
        throw VerificationError("state certificates failed revalidation");
    }
    return state;
}

SparseMeasure full_measure(const ConstructionState& state, const HeavyTail& dist, bool renormalize) {
    SparseMeasure mu(state.group());
    GroupElement e = identity(state.group());
    double padding = dist.cdf(state.padding_N()).mid();
    mu.add(e, padding);
    for (const StepRecord& rec : state.records()) {
        double pn = dist.pmf(rec.n);
        double a_side = state.eps() * std::exp2(-to_double(rec.n));
        double wa = 0.5 * a_side * pn;
        double wg = 0.5 * (1.0 - a_side) * pn;
        if (wa > 0.0) {
            mu.add(rec.a, wa);
            mu.add(invert(rec.a), wa);
        }
        mu.add(rec.g, wg);
        mu.add(invert(rec.g), wg);
    }
    double deficit = dist.tail_mass(state.n_trunc() + 1).mid();
    if (renormalize) {
        mu.scale(1.0 / (1.0 - deficit));
    } else {
        mu.add_lost(deficit);
    }
    return mu;
}

OmegaSample sample_omega(const ConstructionState& state, std::uint64_t m, StreamRng& rng,
                         bool truncated, const HeavyTail& dist) {
    if (m < 1) throw UsageError("sample_omega: m must be >= 1");
    OmegaSample out;
    out.truncated = truncated;
    out.s.resize(m);
    out.w.resize(m);
    double log_cond = truncated ? std::log(dist.cdf(state.n_trunc()).mid()) : 0.0;
    for (std::uint64_t i = 0; i < m; ++i) {
        nat128 v = truncated ? dist.sample_truncated(rng, state.n_trunc()) : dist.sample(rng);
        out.s[i] = v;
        bool a_side = rng.bernoulli_eps_pow2(state.eps(), v);
        bool flip = rng.next_bool();
        out.w[i] = a_side ? (flip ? 2 : 1) : (flip ? 4 : 3);
        out.log_prob += dist.log_pmf(v) - log_cond +
                        ConstructionState::log_step_weight_formula(state.eps(), v, out.w[i]);
    }
    return out;
}

std::vector<std::size_t> record_indices(std::span<const nat128> s, nat128 N) {
    std::vector<std::size_t> idx;
    nat128 threshold = 0;
    bool open = false;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!open ? s[j] > N : s[j] >= threshold) {
            idx.push_back(j + 1);
            threshold = s[j];
            open = true;
        }
    }
    return idx;
}

bool in_omega_eps(const OmegaSample& sample, const LemmaParams& params) {
    if (!is_in_E(sample.s, params)) return false;
    for (std::size_t j : record_indices(sample.s, params.N)) {
        if (sample.w[j - 1] < 3) return false;
    }
    return true;
}

GroupElement evaluate_word(const ConstructionState& state, const OmegaSample& sample) {
    GroupElement acc = identity(state.group());
    for (std::size_t i = 0; i < sample.s.size(); ++i) {
        if (sample.s[i] <= state.padding_N()) continue;  // padding atoms are e
        acc = compose(acc, state.step_atom(sample.s[i], sample.w[i]));
    }
    return acc;
}

namespace {

OmegaSample sample_omega_conditioned(const ConstructionState& state, std::uint64_t m,
                                     StreamRng& rng, const HeavyTail& dist,
                                     const LemmaParams& params, std::uint64_t& proposals,
                                     std::uint64_t& accepted) {
    for (;;) {
        OmegaSample cand = sample_omega(state, m, rng, /*truncated=*/true, dist);
        ++proposals;
        if (in_omega_eps(cand, params)) {
            ++accepted;
            return cand;
        }
        if (proposals >= 20'000 && accepted * 1000 < proposals) {
            throw SearchFailure("rejection sampling starved: acceptance " +
                                std::to_string(static_cast<double>(accepted) /
                                               static_cast<double>(proposals)) +
                                " after " + std::to_string(proposals) + " proposals");
        }
    }
}

}  // namespace

ClaimCheckResult verify_claim(const ConstructionState& state, std::uint64_t m,
                              std::uint64_t pair_count, StreamRng& rng, const HeavyTail& dist) {
    nat128 floor = state.padding_K() > state.padding_N() ? state.padding_K() : state.padding_N();
    if (nat128(m) <= floor) {
        throw UsageError("verify_claim: need m > max(K, N)");
    }
    if (nat128(m) * m > state.n_trunc()) {
        throw UsageError("verify_claim: truncated support cannot reach the m^2 running-max floor; "
                         "need N + steps >= m^2");
    }
    LemmaParams params{state.eps(), state.padding_K(), state.padding_N(), m};
    ClaimCheckResult res;
    res.pairs = pair_count;
    res.peeling_envelope = nat128(m) <= 4 * state.padding_N();
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < pair_count; ++i) {
        OmegaSample alpha = sample_omega_conditioned(state, m, rng, dist, params, res.proposals, accepted);
        OmegaSample beta = sample_omega_conditioned(state, m, rng, dist, params, res.proposals, accepted);
        GroupElement lhs = compose(state.h(), evaluate_word(state, alpha));
        GroupElement rhs = evaluate_word(state, beta);
        if (lhs == rhs) ++res.violations;
    }
    res.acceptance = res.proposals > 0
                         ? static_cast<double>(accepted) / static_cast<double>(res.proposals)
                         : 0.0;
    return res;
}

EventBoundResult event_tv_bound(const ConstructionState& state, std::uint64_t m,
                                std::uint64_t samples, StreamRng& rng, const HeavyTail& dist,
                                bool truncated) {
    if (nat128(m) < state.padding_K()) throw UsageError("event_tv_bound: need m >= K");
    if (samples < 1) throw UsageError("event_tv_bound: need samples >= 1");
    LemmaParams params{state.eps(), state.padding_K(), state.padding_N(), m};
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        OmegaSample cand = sample_omega(state, m, rng, truncated, dist);
        if (in_omega_eps(cand, params)) ++hits;
    }
    EventBoundResult res;
    res.samples = samples;
    res.truncated = truncated;
    res.eta_hat = static_cast<double>(hits) / static_cast<double>(samples);
    res.bound = 4.0 * res.eta_hat - 2.0;
    res.ci = 4.0 * 3.0 * std::sqrt(res.eta_hat * (1.0 - res.eta_hat) / static_cast<double>(samples));
    return res;
}

}  // namespace walklab
