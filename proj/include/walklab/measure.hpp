#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "walklab/group.hpp"

namespace walklab {

// Finitely supported nonnegative measure on a group, with an explicit budget
// of mass lost to truncation and pruning. For measures standing in for
// probabilities, stored + lost stays within 1e-9 of 1; the lost budget feeds
// the error bars of every total-variation figure computed downstream.
class SparseMeasure {
public:
    explicit SparseMeasure(GroupDescriptor desc) : desc_(desc) {}

    static SparseMeasure dirac(const GroupDescriptor& desc, const GroupElement& x) {
        SparseMeasure m(desc);
        m.add(x, 1.0);
        return m;
    }

    const GroupDescriptor& descriptor() const { return desc_; }

    void add(const GroupElement& x, double mass);
    double mass(const GroupElement& x) const;

    double total_mass() const;
    double lost_mass() const { return lost_; }
    void add_lost(double m) { lost_ += m; }

    std::size_t support_size() const { return atoms_.size(); }
    const std::unordered_map<GroupElement, double, GroupElementHash>& atoms() const { return atoms_; }

    // Drops atoms below the threshold, moving their mass into the lost
    // budget. Applied after full accumulation so results do not depend on
    // insertion order.
    void prune(double threshold);

    void scale(double factor);

private:
    GroupDescriptor desc_;
    std::unordered_map<GroupElement, double, GroupElementHash> atoms_;
    double lost_ = 0.0;
};

inline constexpr std::size_t kDefaultSupportCap = 50'000'000;

// (mu * nu)(z) = sum_x mu(x) nu(x^-1 z), computed exactly over support pairs,
// then pruned. lost(out) <= lost(mu) + lost(nu) + pruned mass.
SparseMeasure convolve(const SparseMeasure& mu, const SparseMeasure& nu, double prune,
                       std::size_t support_cap = kDefaultSupportCap);

SparseMeasure convolve_power(const SparseMeasure& mu, std::uint64_t m, double prune,
                             std::size_t support_cap = kDefaultSupportCap);

// Left translation: atom x -> h x, mass preserving.
SparseMeasure translate(const GroupElement& h, const SparseMeasure& mu);

struct TvResult {
    double tv = 0.0;          // sum_g |mu(g) - nu(g)| over stored atoms
    double correction = 0.0;  // worst case from the lost budgets
};

TvResult tv_norm(const SparseMeasure& mu, const SparseMeasure& nu);

double measure_entropy(const SparseMeasure& mu);

bool is_symmetric(const SparseMeasure& mu, double tol);

struct ProfileRow {
    std::uint64_t m = 0;
    double tv = 0.0;
    double error = 0.0;  // |exact - reported| bound from lost mass
    std::size_t support = 0;
    double wall_ms = 0.0;
};

// tv(h mu^*m, mu^*m) for m = 1..m_max. Stops early (with the reached m in
// the result) if a support cap overflows.
std::vector<ProfileRow> tv_profile(const SparseMeasure& mu, const GroupElement& h,
                                   std::uint64_t m_max, double prune,
                                   std::size_t support_cap = kDefaultSupportCap);

}  // namespace walklab
