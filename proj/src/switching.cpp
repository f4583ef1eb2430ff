#include "walklab/switching.hpp"

#include "walklab/errors.hpp"

namespace walklab {

namespace {

// X cap (u X v) subseteq {e} for fixed u, v.
bool pattern_clear(const GroupElement& u, const GroupElement& v, const SymmetricSet& x) {
    for (const GroupElement& a : x.elements()) {
        GroupElement c = compose(compose(u, a), v);
        if (x.contains(c) && !is_identity(c)) return false;
    }
    return true;
}

}  // namespace

bool is_switching(const GroupElement& g, const SymmetricSet& x) {
    return pattern_clear(g, invert(g), x);
}

bool is_super_switching(const GroupElement& g, const SymmetricSet& x) {
    GroupElement gi = invert(g);
    return pattern_clear(g, g, x) && pattern_clear(g, gi, x) &&
           pattern_clear(gi, g, x) && pattern_clear(gi, gi, x);
}

bool sandwich_check(const GroupElement& g, const SymmetricSet& x) {
    GroupElement gi = invert(g);
    const GroupElement* pows[2] = {&g, &gi};
    for (const GroupElement* w1 : pows) {
        for (const GroupElement* w2 : pows) {
            for (const GroupElement& a : x.elements()) {
                GroupElement lhs = compose(compose(*w1, a), *w2);
                if (x.contains(lhs) && !(is_identity(a) && is_identity(lhs))) return false;
            }
        }
    }
    return true;
}

GroupElement find_super_switching_exact(const SymmetricSet& x, const SymmetricSet& exclude,
                                        std::uint64_t budget) {
    Enumerator en(x.descriptor());
    for (std::uint64_t i = 1; i <= budget; ++i) {
        const GroupElement& g = en.at(i);
        if (exclude.contains(g)) continue;
        if (is_super_switching(g, x)) return g;
    }
    throw SearchFailure("no super-switching element among the first " + std::to_string(budget) +
                        " enumerated elements of " + x.descriptor().name());
}

bool SwitchingCertificate::revalidate() const {
    BigInt rho_expected = (2 * n + 1) * (shift_bound + lamp_bound);
    if (rho != rho_expected) return false;
    bool ok = shift > (8 * n + 1) * shift_bound && shift > 2 * rho && lamp_pos > rho &&
              abs(lamp_pos - shift) > rho;
    if (!ok) return false;
    for (const CertificateCheck& c : checks) {
        if (!c.satisfied) return false;
    }
    return true;
}

nlohmann::json SwitchingCertificate::to_json() const {
    nlohmann::json checks_json = nlohmann::json::array();
    for (const CertificateCheck& c : checks) {
        checks_json.push_back({{"name", c.name}, {"satisfied", c.satisfied}});
    }
    return nlohmann::json{
        {"n", dec_string(n)},
        {"shift_bound", dec_string(shift_bound)},
        {"lamp_bound", dec_string(lamp_bound)},
        {"rho", dec_string(rho)},
        {"lamp_pos", dec_string(lamp_pos)},
        {"shift", dec_string(shift)},
        {"checks", std::move(checks_json)},
    };
}

SwitchingCertificate SwitchingCertificate::from_json(const nlohmann::json& j) {
    SwitchingCertificate c;
    c.n = parse_bigint(j.at("n").get<std::string>());
    c.shift_bound = parse_bigint(j.at("shift_bound").get<std::string>());
    c.lamp_bound = parse_bigint(j.at("lamp_bound").get<std::string>());
    c.rho = parse_bigint(j.at("rho").get<std::string>());
    c.lamp_pos = parse_bigint(j.at("lamp_pos").get<std::string>());
    c.shift = parse_bigint(j.at("shift").get<std::string>());
    for (const auto& cj : j.at("checks")) {
        c.checks.push_back({cj.at("name").get<std::string>(), cj.at("satisfied").get<bool>()});
    }
    return c;
}

std::pair<GroupElement, SwitchingCertificate> pick_super_switching_lamplighter(
    const BigInt& n, const BigInt& shift_bound, const BigInt& lamp_bound) {
    SwitchingCertificate cert;
    cert.n = n;
    cert.shift_bound = shift_bound;
    cert.lamp_bound = lamp_bound;
    cert.rho = (2 * n + 1) * (shift_bound + lamp_bound);
    cert.lamp_pos = cert.rho + 1;
    BigInt exclusion_floor = (8 * n + 1) * shift_bound;
    BigInt base = exclusion_floor > 2 * cert.rho ? exclusion_floor : 2 * cert.rho;
    cert.shift = base + cert.lamp_pos + 1;
    cert.checks = {
        {"shift > (8n+1)*shift_bound", cert.shift > exclusion_floor},
        {"shift > 2*rho", cert.shift > 2 * cert.rho},
        {"lamp_pos > rho", cert.lamp_pos > cert.rho},
        {"|lamp_pos - shift| > rho", abs(cert.lamp_pos - cert.shift) > cert.rho},
    };
    for (const CertificateCheck& c : cert.checks) {
        if (!c.satisfied) throw VerificationError("certificate construction failed: " + c.name);
    }
    GroupElement g = lamplighter_element({cert.lamp_pos}, cert.shift);
    return {std::move(g), std::move(cert)};
}

}  // namespace walklab
