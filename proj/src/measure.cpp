#include "walklab/measure.hpp"

#include <chrono>
#include <cmath>

#include "walklab/errors.hpp"

namespace walklab {

void SparseMeasure::add(const GroupElement& x, double mass) {
    if (mass == 0.0) return;
    if (mass < 0.0) throw UsageError("SparseMeasure: negative mass");
    atoms_[x] += mass;
}

double SparseMeasure::mass(const GroupElement& x) const {
    auto it = atoms_.find(x);
    return it == atoms_.end() ? 0.0 : it->second;
}

double SparseMeasure::total_mass() const {
    double t = 0.0;
    for (const auto& [x, m] : atoms_) t += m;
    return t;
}

void SparseMeasure::prune(double threshold) {
    if (threshold <= 0.0) return;
    for (auto it = atoms_.begin(); it != atoms_.end();) {
        if (it->second < threshold) {
            lost_ += it->second;
            it = atoms_.erase(it);
        } else {
            ++it;
        }
    }
}

void SparseMeasure::scale(double factor) {
    for (auto& [x, m] : atoms_) m *= factor;
    lost_ *= factor;
}

SparseMeasure convolve(const SparseMeasure& mu, const SparseMeasure& nu, double prune,
                       std::size_t support_cap) {
    if (!(mu.descriptor() == nu.descriptor())) throw UsageError("convolve: different groups");
    SparseMeasure out(mu.descriptor());
    for (const auto& [x, mx] : mu.atoms()) {
        for (const auto& [y, my] : nu.atoms()) {
            out.add(compose(x, y), mx * my);
            if (out.support_size() > support_cap) {
                throw OverflowError("convolve: support exceeded " + std::to_string(support_cap) +
                                    " atoms (operands " + std::to_string(mu.support_size()) + " x " +
                                    std::to_string(nu.support_size()) + ")");
            }
        }
    }
    out.add_lost(mu.lost_mass() + nu.lost_mass());
    out.prune(prune);
    return out;
}

SparseMeasure convolve_power(const SparseMeasure& mu, std::uint64_t m, double prune,
                             std::size_t support_cap) {
    if (m < 1) throw UsageError("convolve_power: m must be >= 1");
    SparseMeasure out = mu;
    for (std::uint64_t i = 1; i < m; ++i) out = convolve(out, mu, prune, support_cap);
    return out;
}

SparseMeasure translate(const GroupElement& h, const SparseMeasure& mu) {
    SparseMeasure out(mu.descriptor());
    for (const auto& [x, m] : mu.atoms()) out.add(compose(h, x), m);
    out.add_lost(mu.lost_mass());
    return out;
}

TvResult tv_norm(const SparseMeasure& mu, const SparseMeasure& nu) {
    if (!(mu.descriptor() == nu.descriptor())) throw UsageError("tv_norm: different groups");
    TvResult r;
    for (const auto& [x, m] : mu.atoms()) r.tv += std::fabs(m - nu.mass(x));
    for (const auto& [x, m] : nu.atoms()) {
        if (mu.mass(x) == 0.0) r.tv += m;
    }
    r.correction = mu.lost_mass() + nu.lost_mass();
    return r;
}

double measure_entropy(const SparseMeasure& mu) {
    double h = 0.0;
    for (const auto& [x, m] : mu.atoms()) {
        if (m > 0.0) h -= m * std::log(m);
    }
    return h;
}

bool is_symmetric(const SparseMeasure& mu, double tol) {
    for (const auto& [x, m] : mu.atoms()) {
        if (std::fabs(m - mu.mass(invert(x))) > tol) return false;
    }
    return true;
}

std::vector<ProfileRow> tv_profile(const SparseMeasure& mu, const GroupElement& h,
                                   std::uint64_t m_max, double prune, std::size_t support_cap) {
    if (m_max < 1) throw UsageError("tv_profile: m_max must be >= 1");
    std::vector<ProfileRow> rows;
    SparseMeasure power = mu;
    for (std::uint64_t m = 1; m <= m_max; ++m) {
        auto t0 = std::chrono::steady_clock::now();
        TvResult tv = tv_norm(translate(h, power), power);
        auto t1 = std::chrono::steady_clock::now();
        ProfileRow row;
        row.m = m;
        row.tv = tv.tv;
        row.error = 2.0 * power.lost_mass();
        row.support = power.support_size();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rows.push_back(row);
        if (m == m_max) break;
        try {
            power = convolve(power, mu, prune, support_cap);
        } catch (const OverflowError&) {
            break;  // profile truncated at the reached m
        }
    }
    return rows;
}

}  // namespace walklab
