#include "walklab/group.hpp"

#include <algorithm>

#include "walklab/errors.hpp"

namespace walklab {

std::string GroupDescriptor::name() const {
    switch (kind) {
        case GroupKind::lamplighter: return "lamplighter";
        case GroupKind::free_abelian: return "z" + std::to_string(dim);
        case GroupKind::heisenberg: return "heisenberg";
    }
    return "?";
}

GroupDescriptor descriptor_from_name(const std::string& name) {
    if (name == "lamplighter") return {GroupKind::lamplighter, 1};
    if (name == "z" || name == "z1") return {GroupKind::free_abelian, 1};
    if (name == "z2") return {GroupKind::free_abelian, 2};
    if (name == "z3") return {GroupKind::free_abelian, 3};
    if (name == "heisenberg") return {GroupKind::heisenberg, 1};
    throw UsageError("unknown group: " + name);
}

GroupElement identity(const GroupDescriptor& desc) {
    GroupElement e;
    e.kind = desc.kind;
    if (desc.kind == GroupKind::free_abelian) e.coords.assign(desc.dim, BigInt(0));
    if (desc.kind == GroupKind::heisenberg) e.coords.assign(3, BigInt(0));
    return e;
}

GroupElement lamplighter_element(std::vector<BigInt> lamps, BigInt shift) {
    std::sort(lamps.begin(), lamps.end());
    for (std::size_t i = 1; i < lamps.size(); ++i) {
        if (lamps[i] == lamps[i - 1]) throw UsageError("duplicate lamp position");
    }
    GroupElement x;
    x.kind = GroupKind::lamplighter;
    x.lamps = std::move(lamps);
    x.shift = std::move(shift);
    return x;
}

GroupElement vector_element(const GroupDescriptor& desc, std::vector<BigInt> coords) {
    std::size_t want = desc.kind == GroupKind::heisenberg ? 3 : static_cast<std::size_t>(desc.dim);
    if (desc.kind == GroupKind::lamplighter || coords.size() != want) {
        throw UsageError("bad coordinate vector for " + desc.name());
    }
    GroupElement x;
    x.kind = desc.kind;
    x.coords = std::move(coords);
    return x;
}

namespace {

// Symmetric difference of f and (g + d), both strictly increasing.
std::vector<BigInt> xor_shifted(const std::vector<BigInt>& f, const std::vector<BigInt>& g, const BigInt& d) {
    std::vector<BigInt> out;
    out.reserve(f.size() + g.size());
    std::size_t i = 0, j = 0;
    while (i < f.size() && j < g.size()) {
        BigInt gj = g[j] + d;
        if (f[i] < gj) {
            out.push_back(f[i++]);
        } else if (gj < f[i]) {
            out.push_back(std::move(gj));
            ++j;
        } else {
            ++i;
            ++j;
        }
    }
    for (; i < f.size(); ++i) out.push_back(f[i]);
    for (; j < g.size(); ++j) out.push_back(g[j] + d);
    return out;
}

}  // namespace

GroupElement compose(const GroupElement& x, const GroupElement& y) {
    if (x.kind != y.kind || x.coords.size() != y.coords.size()) {
        throw UsageError("compose: mixed-descriptor operands");
    }
    GroupElement z;
    z.kind = x.kind;
    switch (x.kind) {
        case GroupKind::lamplighter:
            z.lamps = xor_shifted(x.lamps, y.lamps, x.shift);
            z.shift = x.shift + y.shift;
            break;
        case GroupKind::free_abelian:
            z.coords.resize(x.coords.size());
            for (std::size_t i = 0; i < x.coords.size(); ++i) z.coords[i] = x.coords[i] + y.coords[i];
            break;
        case GroupKind::heisenberg:
            // (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')
            z.coords.resize(3);
            z.coords[0] = x.coords[0] + y.coords[0];
            z.coords[1] = x.coords[1] + y.coords[1];
            z.coords[2] = x.coords[2] + y.coords[2] + x.coords[0] * y.coords[1];
            break;
    }
    return z;
}

GroupElement invert(const GroupElement& x) {
    GroupElement z;
    z.kind = x.kind;
    switch (x.kind) {
        case GroupKind::lamplighter: {
            z.shift = -x.shift;
            z.lamps.reserve(x.lamps.size());
            for (const BigInt& p : x.lamps) z.lamps.push_back(p - x.shift);
            break;
        }
        case GroupKind::free_abelian:
            z.coords.reserve(x.coords.size());
            for (const BigInt& c : x.coords) z.coords.push_back(-c);
            break;
        case GroupKind::heisenberg:
            z.coords = {-x.coords[0], -x.coords[1], -x.coords[2] + x.coords[0] * x.coords[1]};
            break;
    }
    return z;
}

bool is_identity(const GroupElement& x) {
    if (x.kind == GroupKind::lamplighter) return x.lamps.empty() && x.shift == 0;
    for (const BigInt& c : x.coords) {
        if (c != 0) return false;
    }
    return true;
}

std::size_t element_hash(const GroupElement& x) {
    std::size_t h = static_cast<std::size_t>(x.kind) * 0x9e3779b97f4a7c15ULL;
    hash_combine_bigint(h, x.shift);
    boost::hash_combine(h, x.lamps.size());
    for (const BigInt& p : x.lamps) hash_combine_bigint(h, p);
    for (const BigInt& c : x.coords) hash_combine_bigint(h, c);
    return h;
}

namespace {

nlohmann::json int_to_json(const BigInt& v) {
    static const BigInt safe = (BigInt(1) << 53) - 1;
    if (v <= safe && v >= -safe) return nlohmann::json(static_cast<std::int64_t>(v));
    return nlohmann::json(dec_string(v));
}

BigInt int_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_bigint(j.get<std::string>());
    if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
    throw UsageError("expected integer or decimal string");
}

}  // namespace

nlohmann::json element_to_json(const GroupElement& x) {
    if (x.kind == GroupKind::lamplighter) {
        nlohmann::json lamps = nlohmann::json::array();
        for (const BigInt& p : x.lamps) lamps.push_back(int_to_json(p));
        return nlohmann::json{{"lamps", std::move(lamps)}, {"t", int_to_json(x.shift)}};
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const BigInt& c : x.coords) arr.push_back(int_to_json(c));
    return arr;
}

GroupElement element_from_json(const GroupDescriptor& desc, const nlohmann::json& j) {
    if (desc.kind == GroupKind::lamplighter) {
        if (!j.is_object() || !j.contains("lamps") || !j.contains("t")) {
            throw UsageError("bad lamplighter element encoding");
        }
        std::vector<BigInt> lamps;
        for (const auto& p : j.at("lamps")) lamps.push_back(int_from_json(p));
        for (std::size_t i = 1; i < lamps.size(); ++i) {
            if (!(lamps[i - 1] < lamps[i])) throw UsageError("lamps not strictly increasing");
        }
        GroupElement x;
        x.kind = GroupKind::lamplighter;
        x.lamps = std::move(lamps);
        x.shift = int_from_json(j.at("t"));
        return x;
    }
    if (!j.is_array()) throw UsageError("bad vector element encoding");
    std::vector<BigInt> coords;
    for (const auto& c : j) coords.push_back(int_from_json(c));
    return vector_element(desc, std::move(coords));
}

std::string canonical_string(const GroupElement& x) {
    return element_to_json(x).dump();
}

int canonical_compare(const GroupElement& a, const GroupElement& b) {
    return canonical_string(a).compare(canonical_string(b));
}

nlohmann::json descriptor_to_json(const GroupDescriptor& d) {
    return nlohmann::json{{"kind", d.name()}};
}

GroupDescriptor descriptor_from_json(const nlohmann::json& j) {
    return descriptor_from_name(j.at("kind").get<std::string>());
}

SymmetricSet::SymmetricSet(GroupDescriptor desc, std::vector<GroupElement> elems)
    : desc_(desc) {
    std::sort(elems.begin(), elems.end(), [](const GroupElement& a, const GroupElement& b) {
        return canonical_compare(a, b) < 0;
    });
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    elems_ = std::move(elems);
    lookup_.reserve(elems_.size() * 2);
    for (const GroupElement& x : elems_) lookup_.insert(x);
    for (const GroupElement& x : elems_) {
        if (!lookup_.count(invert(x))) {
            throw UsageError("set is not closed under inverse");
        }
        if (desc_.kind == GroupKind::lamplighter) {
            BigInt at = abs(x.shift);
            if (at > shift_bound_) shift_bound_ = at;
            for (const BigInt& p : x.lamps) {
                BigInt ap = abs(p);
                if (ap > lamp_bound_) lamp_bound_ = ap;
            }
        } else {
            for (const BigInt& c : x.coords) {
                BigInt ac = abs(c);
                if (ac > shift_bound_) shift_bound_ = ac;
            }
        }
    }
}

bool SymmetricSet::bounds_dominate() const {
    for (const GroupElement& x : elems_) {
        if (desc_.kind == GroupKind::lamplighter) {
            if (abs(x.shift) > shift_bound_) return false;
            for (const BigInt& p : x.lamps) {
                if (abs(p) > lamp_bound_) return false;
            }
        } else {
            for (const BigInt& c : x.coords) {
                if (abs(c) > shift_bound_) return false;
            }
        }
    }
    return true;
}

Enumerator::Enumerator(GroupDescriptor desc) : desc_(desc) {
    switch (desc_.kind) {
        case GroupKind::lamplighter:
            generators_.push_back(lamplighter_element({BigInt(0)}, BigInt(0)));
            generators_.push_back(lamplighter_element({}, BigInt(1)));
            generators_.push_back(lamplighter_element({}, BigInt(-1)));
            break;
        case GroupKind::free_abelian:
            for (int i = 0; i < desc_.dim; ++i) {
                std::vector<BigInt> v(desc_.dim, BigInt(0));
                v[i] = 1;
                generators_.push_back(vector_element(desc_, v));
                v[i] = -1;
                generators_.push_back(vector_element(desc_, v));
            }
            break;
        case GroupKind::heisenberg:
            generators_.push_back(vector_element(desc_, {BigInt(1), BigInt(0), BigInt(0)}));
            generators_.push_back(vector_element(desc_, {BigInt(-1), BigInt(0), BigInt(0)}));
            generators_.push_back(vector_element(desc_, {BigInt(0), BigInt(1), BigInt(0)}));
            generators_.push_back(vector_element(desc_, {BigInt(0), BigInt(-1), BigInt(0)}));
            break;
    }
    GroupElement e = identity(desc_);
    order_.push_back(e);
    seen_.insert(e);
    frontier_.push_back(std::move(e));
    level_end_.push_back(1);
}

void Enumerator::grow_level() {
    std::vector<GroupElement> next;
    for (const GroupElement& x : frontier_) {
        for (const GroupElement& g : generators_) {
            GroupElement y = compose(x, g);
            if (seen_.insert(y).second) next.push_back(std::move(y));
        }
    }
    std::sort(next.begin(), next.end(), [](const GroupElement& a, const GroupElement& b) {
        return canonical_compare(a, b) < 0;
    });
    for (GroupElement& y : next) order_.push_back(y);
    level_end_.push_back(order_.size());
    frontier_ = std::move(next);
}

const GroupElement& Enumerator::at(std::uint64_t index1) {
    if (index1 == 0) throw UsageError("enumeration index is 1-based");
    while (order_.size() < index1) {
        if (frontier_.empty()) throw OverflowError("enumeration exhausted (finite ball)");
        grow_level();
    }
    return order_[index1 - 1];
}

std::uint64_t Enumerator::ball_count(int radius) {
    while (static_cast<int>(level_end_.size()) <= radius && !frontier_.empty()) grow_level();
    int idx = std::min<int>(radius, static_cast<int>(level_end_.size()) - 1);
    return level_end_[idx];
}

SymmetricSet product_ball(const SymmetricSet& s, std::uint64_t k, std::size_t budget) {
    std::unordered_set<GroupElement, GroupElementHash> ball;
    GroupElement e = identity(s.descriptor());
    ball.insert(e);
    std::vector<GroupElement> frontier{e};
    for (std::uint64_t step = 0; step < k && !frontier.empty(); ++step) {
        std::vector<GroupElement> next;
        for (const GroupElement& x : frontier) {
            for (const GroupElement& g : s.elements()) {
                GroupElement y = compose(x, g);
                if (ball.size() >= budget && !ball.count(y)) {
                    throw OverflowError("product_ball budget exceeded at step " + std::to_string(step + 1) +
                                        " with " + std::to_string(ball.size()) + " elements");
                }
                if (ball.insert(y).second) next.push_back(std::move(y));
            }
        }
        frontier = std::move(next);  // empty frontier means the set saturated
    }
    std::vector<GroupElement> elems(ball.begin(), ball.end());
    return SymmetricSet(s.descriptor(), std::move(elems));
}

std::vector<GroupElement> conjugate_probe(const GroupElement& x, std::uint64_t count) {
    if (count == 0) throw UsageError("conjugate_probe: count must be positive");
    GroupDescriptor desc;
    desc.kind = x.kind;
    if (x.kind == GroupKind::free_abelian) desc.dim = static_cast<int>(x.coords.size());
    Enumerator en(desc);
    std::unordered_set<GroupElement, GroupElementHash> out;
    for (std::uint64_t i = 1; i <= count; ++i) {
        const GroupElement& g = en.at(i);
        out.insert(compose(compose(invert(g), x), g));
    }
    std::vector<GroupElement> v(out.begin(), out.end());
    std::sort(v.begin(), v.end(), [](const GroupElement& a, const GroupElement& b) {
        return canonical_compare(a, b) < 0;
    });
    return v;
}

}  // namespace walklab
