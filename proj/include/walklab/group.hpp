#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "walklab/bigint.hpp"

namespace walklab {

enum class GroupKind { lamplighter, free_abelian, heisenberg };

// Concrete groups the constructions run on. The lamplighter group Z/2 wr Z
// is the construction target (amenable, all non-trivial conjugacy classes
// infinite); Z^d and the integer Heisenberg group are amenable controls whose
// conjugacy structure rules the construction out.
struct GroupDescriptor {
    GroupKind kind = GroupKind::lamplighter;
    int dim = 1;  // free_abelian only, in {1,2,3}

    bool amenable() const { return true; }
    bool icc() const { return kind == GroupKind::lamplighter; }
    std::string name() const;

    bool operator==(const GroupDescriptor& o) const {
        return kind == o.kind && (kind != GroupKind::free_abelian || dim == o.dim);
    }
};

GroupDescriptor descriptor_from_name(const std::string& name);

// Canonical element of one of the three groups. Lamplighter elements carry a
// strictly increasing list of lit lamp positions and a walker shift; the
// other kinds use a coordinate vector (d entries, or the Heisenberg triple
// (a,b,c) for the unitriangular matrix with a above the diagonal, b to its
// right, c in the corner). Structural equality of the canonical form is group
// equality. Values are immutable once built.
struct GroupElement {
    GroupKind kind = GroupKind::lamplighter;
    std::vector<BigInt> lamps;  // lamplighter only, strictly increasing
    BigInt shift = 0;           // lamplighter only
    std::vector<BigInt> coords; // free_abelian / heisenberg

    bool operator==(const GroupElement& o) const {
        return kind == o.kind && shift == o.shift && lamps == o.lamps && coords == o.coords;
    }
};

GroupElement identity(const GroupDescriptor& desc);
GroupElement lamplighter_element(std::vector<BigInt> lamps, BigInt shift);
GroupElement vector_element(const GroupDescriptor& desc, std::vector<BigInt> coords);

GroupElement compose(const GroupElement& x, const GroupElement& y);
GroupElement invert(const GroupElement& x);
bool is_identity(const GroupElement& x);

// Total order used for deterministic tie-breaking: byte-wise comparison of
// the canonical JSON encoding.
int canonical_compare(const GroupElement& a, const GroupElement& b);

std::size_t element_hash(const GroupElement& x);

struct GroupElementHash {
    std::size_t operator()(const GroupElement& x) const { return element_hash(x); }
};

// Canonical JSON: lamplighter {"lamps":[...],"t":...}, free-abelian and
// heisenberg a plain coordinate array. Integers render as JSON numbers while
// they fit the 53-bit safe range and as decimal strings beyond it.
nlohmann::json element_to_json(const GroupElement& x);
GroupElement element_from_json(const GroupDescriptor& desc, const nlohmann::json& j);
std::string canonical_string(const GroupElement& x);

nlohmann::json descriptor_to_json(const GroupDescriptor& d);
GroupDescriptor descriptor_from_json(const nlohmann::json& j);

// Finite inverse-closed set with cached coordinate bounds. For lamplighter
// sets, shift_bound dominates |t| and lamp_bound dominates |lamp position|
// over all members; for the other kinds shift_bound dominates every
// coordinate and lamp_bound is 0.
class SymmetricSet {
public:
    SymmetricSet(GroupDescriptor desc, std::vector<GroupElement> elems);

    const GroupDescriptor& descriptor() const { return desc_; }
    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    bool contains(const GroupElement& x) const { return lookup_.count(x) > 0; }

    const BigInt& shift_bound() const { return shift_bound_; }
    const BigInt& lamp_bound() const { return lamp_bound_; }

    // Re-derives the bounds from scratch and checks that every member is
    // dominated; used by tests and certificate revalidation.
    bool bounds_dominate() const;

private:
    GroupDescriptor desc_;
    std::vector<GroupElement> elems_;
    std::unordered_set<GroupElement, GroupElementHash> lookup_;
    BigInt shift_bound_ = 0;
    BigInt lamp_bound_ = 0;
};

// Deterministic enumeration of the group: breadth-first over the standard
// generating set (lamplighter {({0},0),(e,+1),(e,-1)}, free-abelian +-e_i,
// heisenberg +-(1,0,0),(0,1,0)), layers ordered by canonical encoding.
// Index 1 is the identity. The cache grows on demand.
class Enumerator {
public:
    explicit Enumerator(GroupDescriptor desc);

    const GroupElement& at(std::uint64_t index1);  // 1-based
    // Number of elements with word length <= radius (forces expansion).
    std::uint64_t ball_count(int radius);

    const GroupDescriptor& descriptor() const { return desc_; }

private:
    void grow_level();

    GroupDescriptor desc_;
    std::vector<GroupElement> generators_;
    std::vector<GroupElement> order_;
    std::vector<std::uint64_t> level_end_;  // cumulative count per radius
    std::vector<GroupElement> frontier_;
    std::unordered_set<GroupElement, GroupElementHash> seen_;
};

// {x1...xj : j <= k, xi in S} together with e, deduplicated. Stops early
// once the set saturates. Throws OverflowError past the budget.
SymmetricSet product_ball(const SymmetricSet& s, std::uint64_t k, std::size_t budget);

// Distinct conjugates g^-1 x g over the first `count` enumerated g. A cheap
// witness for conjugacy-class growth, not a proof of anything.
std::vector<GroupElement> conjugate_probe(const GroupElement& x, std::uint64_t count);

}  // namespace walklab
