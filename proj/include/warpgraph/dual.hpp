#pragma once

#include <cmath>

namespace warpgraph {

/// Forward-mode dual number: value plus one directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
    constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
inline Dual operator*(Dual a, double s) { return {s * a.v, s * a.d}; }
inline Dual operator/(Dual a, double s) { return {a.v / s, a.d / s}; }
inline Dual operator+(Dual a, double s) { return {a.v + s, a.d}; }
inline Dual operator+(double s, Dual a) { return {a.v + s, a.d}; }
inline Dual operator-(Dual a, double s) { return {a.v - s, a.d}; }
inline Dual operator-(double s, Dual a) { return {s - a.v, -a.d}; }

inline Dual sqrt(Dual a) {
    const double r = std::sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

}  // namespace warpgraph
