#pragma once

#include <boost/functional/hash.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "walklab/errors.hpp"

namespace walklab {

// Exact integer for group-element coordinates. Constructed elements have
// coordinates growing roughly like prod_k (8k), which leaves 64 bits after a
// handful of steps.
using BigInt = boost::multiprecision::cpp_int;

// Sequence values drawn from the heavy-tailed distribution. 64 bits are not
// enough: a draw exceeds 2^63 about 1.6e-5 of the time, which at 1e8 draws
// would produce thousands of silent saturations and fake ties in the
// running-max statistics. 128 bits push the saturation probability below
// 3e-10 per draw; saturations are counted by the sampler.
using nat128 = unsigned __int128;

inline double to_double(nat128 v) {
    return static_cast<double>(v);
}

inline std::string dec_string(nat128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
        v /= 10;
    }
    return std::string(s.rbegin(), s.rend());
}

inline nat128 parse_nat128(const std::string& s) {
    if (s.empty()) throw UsageError("empty integer literal");
    nat128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw UsageError("bad integer literal: " + s);
        nat128 next = v * 10 + static_cast<unsigned>(c - '0');
        if (next < v) throw OverflowError("integer literal exceeds 128 bits: " + s);
        v = next;
    }
    return v;
}

inline std::string dec_string(const BigInt& v) {
    return v.str();
}

inline BigInt parse_bigint(const std::string& s) {
    try {
        return BigInt(s);
    } catch (const std::exception&) {
        throw UsageError("bad integer literal: " + s);
    }
}

inline void hash_combine_bigint(std::size_t& seed, const BigInt& v) {
    boost::hash_combine(seed, boost::multiprecision::hash_value(v));
}

}  // namespace walklab
