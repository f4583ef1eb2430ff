#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "walklab/bigint.hpp"
#include "walklab/group.hpp"

namespace walklab {

// g is switching for a finite symmetric X when X and gXg^-1 share at most
// the identity; super-switching additionally clears the four patterns
// gXg, gXg^-1, g^-1Xg, g^-1Xg^-1.
bool is_switching(const GroupElement& g, const SymmetricSet& x);
bool is_super_switching(const GroupElement& g, const SymmetricSet& x);

// Exhaustive check that g^w1 x g^w2 = y with x,y in X and w1,w2 in {-1,+1}
// forces x = y = e. Holds whenever g is super-switching for X; kept as an
// independent brute-force oracle for that implication.
bool sandwich_check(const GroupElement& g, const SymmetricSet& x);

// First g in enumeration order that is super-switching for X and not in
// `exclude`. Throws SearchFailure when the budget runs out (e.g. abelian
// groups, where conjugation fixes X pointwise).
GroupElement find_super_switching_exact(const SymmetricSet& x, const SymmetricSet& exclude,
                                        std::uint64_t budget);

// One recorded threshold inequality of a placement certificate.
struct CertificateCheck {
    std::string name;
    bool satisfied = false;
};

// Certificate that a lamplighter element g = ({P}, T) clears both step
// obligations against a set with bound pair (R_t, R_s) at step index n:
// super-switching for the (2n+1)-fold product set, and not itself a product
// of at most 8n+1 members. All inequalities are recomputable from the
// stored fields.
struct SwitchingCertificate {
    BigInt n = 0;       // step index the bounds refer to
    BigInt shift_bound; // R_t of the base set
    BigInt lamp_bound;  // R_s of the base set
    BigInt rho;         // (2n+1) * (R_t + R_s)
    BigInt lamp_pos;    // P
    BigInt shift;       // T
    std::vector<CertificateCheck> checks;

    bool revalidate() const;  // recompute every inequality from the fields

    nlohmann::json to_json() const;
    static SwitchingCertificate from_json(const nlohmann::json& j);
};

// Deterministic smallest-admissible placement of g = ({P}, T) for the step-n
// obligations, given bounds (R_t, R_s) dominating the base set C:
//
//   rho = (2n+1) * (R_t + R_s)
//   P   = rho + 1
//   T   = max((8n+1) * R_t, 2*rho) + P + 1
//
// Let X be the set of products of at most L = 2n+1 members of C. Any such
// product (f,t) has |t| <= L*R_t <= rho and lamps inside [-rho, rho], since a
// product of L factors displaces each lamp by at most (L-1)*R_t. The four
// conjugation patterns then clear as follows.
//   g x g:      shift t + 2T >= 2T - rho > rho, never lands in X. Same for
//               g^-1 x g^-1 with shift t - 2T.
//   g x g^-1:   equals ({P} xor (f+T) xor {P+t}, t). The lamp at P cancels
//               against f+T only if P-T is in f, impossible because
//               |P-T| > rho; it cancels against {P+t} only if t = 0. So a
//               result inside X forces t = 0, leaving (f+T, 0), whose lamps
//               sit beyond rho unless f is empty. Hence x = e and the result
//               is e.
//   g^-1 x g:   equals ({P-T} xor (f-T) xor {P+t-T}, t); the lamp at P-T
//               survives by the mirrored argument, forcing t = 0, f empty.
// Exclusion: any product of at most 8n+1 members of C has shift at most
// (8n+1)*R_t < T, so g is no such product.
std::pair<GroupElement, SwitchingCertificate> pick_super_switching_lamplighter(
    const BigInt& n, const BigInt& shift_bound, const BigInt& lamp_bound);

}  // namespace walklab
