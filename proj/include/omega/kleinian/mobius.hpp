#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "omega/core/error.hpp"

namespace omega::kleinian {

using Complex = std::complex<double>;

struct Vec3 {
    double x = 0, y = 0, z = 0;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const { return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x}; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 unit() const { return *this * (1.0 / norm()); }
};

// Point of C ∪ {∞}.
struct BoundaryPoint {
    bool inf = false;
    Complex z{};
    static BoundaryPoint infinity() { return {true, {}}; }
    static BoundaryPoint at(Complex w) { return {false, w}; }
};

// Stereographic identification with the unit sphere; ∞ is the north pole.
// The Poincaré extension sends (0,0,1) to the ball origin under this chart.
inline Vec3 to_sphere(const BoundaryPoint& p) {
    if (p.inf) return {0, 0, 1};
    double n = std::norm(p.z);
    return {2 * p.z.real() / (n + 1), 2 * p.z.imag() / (n + 1), (n - 1) / (n + 1)};
}

inline BoundaryPoint from_sphere(const Vec3& v) {
    if (v.z > 1 - 1e-15) return BoundaryPoint::infinity();
    return BoundaryPoint::at({v.x / (1 - v.z), v.y / (1 - v.z)});
}

inline double chordal(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double chordal(const BoundaryPoint& a, const BoundaryPoint& b) { return chordal(to_sphere(a), to_sphere(b)); }

// Upper half-space point (z, h), h > 0.
struct HPoint {
    Complex z{};
    double h = 1;
};

inline double hyperbolic_distance(const HPoint& a, const HPoint& b) {
    double q = (std::norm(a.z - b.z) + (a.h - b.h) * (a.h - b.h)) / (2 * a.h * b.h);
    return std::acosh(1 + q);
}

struct MobiusMap {
    Complex a{1}, b{0}, c{0}, d{1};

    static MobiusMap make(Complex a, Complex b, Complex c, Complex d) {
        Complex det = a * d - b * c;
        if (std::abs(det) < 1e-300) fail(ErrorKind::Structural, "singular Mobius matrix");
        Complex s = std::sqrt(det);
        return {a / s, b / s, c / s, d / s};
    }
    Complex det() const { return a * d - b * c; }
    bool normalized(double tol = 1e-12) const { return std::abs(det() - 1.0) <= tol; }

    MobiusMap operator*(const MobiusMap& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    MobiusMap inverse() const { return {d, -b, -c, a}; }

    BoundaryPoint operator()(const BoundaryPoint& p) const {
        if (p.inf) {
            if (std::abs(c) < 1e-14 * (std::abs(a) + 1)) return BoundaryPoint::infinity();
            return BoundaryPoint::at(a / c);
        }
        Complex den = c * p.z + d;
        if (std::abs(den) < 1e-14 * (std::abs(a * p.z + b) + 1)) return BoundaryPoint::infinity();
        return BoundaryPoint::at((a * p.z + b) / den);
    }

    // Poincaré extension to H³.
    HPoint operator()(const HPoint& x) const {
        Complex cz_d = c * x.z + d;
        double den = std::norm(cz_d) + std::norm(c) * x.h * x.h;
        Complex w = ((a * x.z + b) * std::conj(cz_d) + a * std::conj(c) * x.h * x.h) / den;
        return {w, x.h / den};
    }
};

// Rotation of the ball fixing x0 = (0,0,1): an SU(2) element.
inline MobiusMap su2(double theta, double phi, double psi) {
    Complex i(0, 1);
    Complex a = std::exp(i * (phi + psi) / 2.0) * std::cos(theta / 2);
    Complex b = std::exp(i * (phi - psi) / 2.0) * std::sin(theta / 2);
    return {a, -std::conj(b), b, std::conj(a)};
}

inline const HPoint kBasepoint{{0, 0}, 1.0};

}  // namespace omega::kleinian
