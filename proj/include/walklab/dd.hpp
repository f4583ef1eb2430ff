#pragma once

#include <cmath>
#include <cstdint>

#include "walklab/bigint.hpp"

namespace walklab {

// Minimal double-double arithmetic (~31 significant digits). Used for the
// normalizer, cached prefix sums and tail enclosures of the heavy-tailed
// distribution, where plain doubles would be the limiting error term.
struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

namespace dd_detail {
inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}
inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}
inline dd two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}
}  // namespace dd_detail

inline dd operator+(dd a, dd b) {
    dd s = dd_detail::two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return dd_detail::quick_two_sum(s.hi, s.lo);
}
inline dd operator-(dd a, dd b) {
    return a + dd{-b.hi, -b.lo};
}
inline dd operator*(dd a, dd b) {
    dd p = dd_detail::two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return dd_detail::quick_two_sum(p.hi, p.lo);
}
inline dd operator/(dd a, dd b) {
    double q1 = a.hi / b.hi;
    dd r = a - dd{q1} * b;
    double q2 = r.hi / b.hi;
    r = r - dd{q2} * b;
    double q3 = r.hi / b.hi;
    return dd_detail::quick_two_sum(q1, q2) + dd{q3};
}
inline bool operator<(dd a, dd b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(dd a, dd b) { return b < a; }

inline dd dd_from_nat128(nat128 v) {
    double hi = static_cast<double>(v);
    // hi may round above v; compute the exact remainder in signed space.
    long double rem = static_cast<long double>(v) - static_cast<long double>(hi);
    return dd_detail::quick_two_sum(hi, static_cast<double>(rem));
}

// x^(-1/4) for x >= 1, accurate to double-double precision: seed with the
// double result and run one Newton step for f(y) = y^-4 - x, i.e.
// y <- y * (5 - x*y^4) / 4. Quadratic convergence makes one step enough.
inline dd dd_pow_m14(nat128 x) {
    dd xd = dd_from_nat128(x);
    double y0 = std::pow(static_cast<double>(xd.hi), -0.25);
    dd y{y0};
    for (int i = 0; i < 2; ++i) {
        dd y2 = y * y;
        dd y4 = y2 * y2;
        dd corr = dd{5.0} - xd * y4;
        y = y * corr * dd{0.25};
    }
    return y;
}

// A value with a certified absolute error radius. Arithmetic propagates the
// radius outward; the dd core keeps the propagation itself from dominating.
struct Enclosure {
    dd value;
    double err = 0.0;

    Enclosure() = default;
    Enclosure(dd v, double e) : value(v), err(e) {}
    explicit Enclosure(double v) : value(v), err(0.0) {}

    double mid() const { return value.to_double(); }
    double lower() const { return mid() - err - 4e-16 * std::fabs(mid()); }
    double upper() const { return mid() + err + 4e-16 * std::fabs(mid()); }
    double width() const { return upper() - lower(); }
};

inline Enclosure operator+(const Enclosure& a, const Enclosure& b) {
    dd v = a.value + b.value;
    return {v, a.err + b.err + 1e-31 * std::fabs(v.to_double())};
}
inline Enclosure operator-(const Enclosure& a, const Enclosure& b) {
    dd v = a.value - b.value;
    return {v, a.err + b.err + 1e-31 * (std::fabs(a.value.to_double()) + std::fabs(b.value.to_double()))};
}
inline Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    dd v = a.value * b.value;
    double am = std::fabs(a.value.to_double()), bm = std::fabs(b.value.to_double());
    return {v, a.err * bm + b.err * am + a.err * b.err + 1e-31 * am * bm};
}
inline Enclosure enc_inverse(const Enclosure& a) {
    dd v = dd{1.0} / a.value;
    double am = std::fabs(a.value.to_double());
    double margin = am - a.err;
    double err = margin > 0 ? a.err / (margin * am) : 1e300;
    return {v, err + 1e-31 / am};
}

}  // namespace walklab
