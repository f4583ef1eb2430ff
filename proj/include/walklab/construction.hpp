#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "walklab/group.hpp"
#include "walklab/heavytail.hpp"
#include "walklab/measure.hpp"
#include "walklab/switching.hpp"

namespace walklab {

enum class OracleMode { certificate, exact };

std::string oracle_mode_name(OracleMode m);
OracleMode oracle_mode_from_name(const std::string& s);

// One non-padding step of the recursion. Absolute index n = N + j for the
// j-th step; the certificate discharges the two obligations of g_n against
// the stored bounds of the previous accumulated set.
struct StepRecord {
    nat128 n = 0;
    GroupElement a;  // j-th enumerated element
    GroupElement g;  // placed element ({P}, T)
    SwitchingCertificate cert;
    bool exact_checked = false;
    BigInt shift_bound_after;  // bounds of the accumulated set including this step
    BigInt lamp_bound_after;
};

struct BuildParams {
    GroupDescriptor group;
    GroupElement h;
    double eps = 0.05;
    nat128 K = 2;
    nat128 N = 32;
    std::uint64_t steps = 8;
    OracleMode mode = OracleMode::certificate;
    std::size_t exact_budget = 2'000'000;  // ball budget for exact verification
};

// The recursively built data: padding constants (K, N), one certified record
// per real step, and the bound pair of the accumulated symmetric set after
// each step. Immutable once built. Step indices n <= N are padding (atom e);
// indices N+1 .. N+steps are the real steps; anything beyond is truncated.
class ConstructionState {
public:
    static ConstructionState build(const BuildParams& params);

    const BuildParams& params() const { return params_; }
    const GroupDescriptor& group() const { return params_.group; }
    const GroupElement& h() const { return params_.h; }
    double eps() const { return params_.eps; }
    nat128 padding_K() const { return params_.K; }
    nat128 padding_N() const { return params_.N; }
    std::uint64_t steps() const { return params_.steps; }
    nat128 n_trunc() const { return params_.N + params_.steps; }
    const std::vector<StepRecord>& records() const { return records_; }

    // f_n(j), j in {1: a, 2: a^-1, 3: g, 4: g^-1}; e in the padding region.
    GroupElement step_atom(nat128 n, int j) const;
    // nu_n(j); the a-branch weight eps*2^-n underflows to 0 for n > ~1070,
    // which is the honest double rendering.
    double step_weight(nat128 n, int j) const;
    double log_step_weight(nat128 n, int j) const;

    // nu as a pure formula, defined for every index (the weights do not
    // depend on the truncation).
    static double step_weight_formula(double eps, nat128 n, int j);
    static double log_step_weight_formula(double eps, nat128 n, int j);

    bool revalidate_certificates() const;

    nlohmann::json to_json() const;
    static ConstructionState from_json(const nlohmann::json& j);

private:
    ConstructionState(BuildParams params, std::vector<StepRecord> records)
        : params_(std::move(params)), records_(std::move(records)) {}

    BuildParams params_;
    std::vector<StepRecord> records_;
};

// sum_{n <= N+steps} p(n) mu_n. The padding region contributes its whole
// mass at e; the truncation deficit P(X > N+steps) goes to the lost budget,
// or is renormalized away when requested (flagged by the caller).
SparseMeasure full_measure(const ConstructionState& state, const HeavyTail& dist,
                           bool renormalize = false);

struct OmegaSample {
    std::vector<nat128> s;
    std::vector<std::uint8_t> w;  // values in 1..4
    double log_prob = 0.0;
    bool truncated = false;
};

// s_i iid from p (conditioned on s_i <= N+steps in truncated mode, which is
// what word evaluation requires), w_i from nu_{s_i}.
OmegaSample sample_omega(const ConstructionState& state, std::uint64_t m, StreamRng& rng,
                         bool truncated, const HeavyTail& dist);

// Record chain: first index with value > N, then each first index matching
// or exceeding the previous record value. 1-based positions.
std::vector<std::size_t> record_indices(std::span<const nat128> s, nat128 N);

// s in E and w in {3,4} at every record index.
bool in_omega_eps(const OmegaSample& sample, const LemmaParams& params);

// r(s,w) = f_{s_1}(w_1) ... f_{s_m}(w_m). Throws past the truncation depth.
GroupElement evaluate_word(const ConstructionState& state, const OmegaSample& sample);

struct ClaimCheckResult {
    std::uint64_t pairs = 0;
    std::uint64_t violations = 0;
    std::uint64_t proposals = 0;
    double acceptance = 0.0;
    bool peeling_envelope = true;  // m <= 4N, the range the separation argument covers
};

// Samples pairs (alpha, beta) from eta conditioned on Omega_eps (rejection)
// and counts equalities h r(alpha) = r(beta). The contract is zero.
// Acceptance below 1e-3 after a warmup raises a diagnostic error.
ClaimCheckResult verify_claim(const ConstructionState& state, std::uint64_t m,
                              std::uint64_t pair_count, StreamRng& rng, const HeavyTail& dist);

struct EventBoundResult {
    double eta_hat = 0.0;  // estimated eta(Omega_eps)
    double bound = 0.0;    // 4 * eta_hat - 2
    double ci = 0.0;       // 4 * 3 sigma
    std::uint64_t samples = 0;
    bool truncated = false;
};

// Monte Carlo estimate of eta(Omega_eps) and the induced TV lower bound
// 4*eta - 2. Needs no word evaluation, so the default samples s untruncated;
// truncated mode exists for consistency checks against exact convolutions on
// small states.
EventBoundResult event_tv_bound(const ConstructionState& state, std::uint64_t m,
                                std::uint64_t samples, StreamRng& rng, const HeavyTail& dist,
                                bool truncated = false);

}  // namespace walklab
