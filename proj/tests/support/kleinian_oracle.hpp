#pragma once
// Independent references for the hyperbolic geometry: exact Gaussian-integer
// arithmetic for PSL(2,Z[i]) cusps, a ball-to-half-space chart built from a sphere
// inversion, and brute-force scans.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "omega/kleinian/mobius.hpp"

namespace oracle {

struct GInt {
    long re = 0, im = 0;
    GInt operator+(GInt o) const { return {re + o.re, im + o.im}; }
    GInt operator-(GInt o) const { return {re - o.re, im - o.im}; }
    GInt operator*(GInt o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
    long norm() const { return re * re + im * im; }
    bool zero() const { return re == 0 && im == 0; }
    std::complex<double> c() const { return {double(re), double(im)}; }
    bool operator<(GInt o) const { return std::tie(re, im) < std::tie(o.re, o.im); }
    bool operator==(GInt o) const { return re == o.re && im == o.im; }
};

// Nearest-integer quotient.
inline GInt gdiv(GInt a, GInt b) {
    auto q = a.c() / b.c();
    return {std::lround(q.real()), std::lround(q.imag())};
}

// Returns g = gcd and x, y with a x + c y = g.
inline GInt gext(GInt a, GInt c, GInt& x, GInt& y) {
    if (c.zero()) {
        x = {1, 0};
        y = {0, 0};
        return a;
    }
    GInt q = gdiv(a, c), r = a - q * c, x1, y1;
    GInt g = gext(c, r, x1, y1);
    x = y1;
    y = x1 - q * y1;
    return g;
}

inline bool is_unit(GInt u) { return u.norm() == 1; }

// Canonical unit multiple: first nonzero of (c, a) in the open right half-plane plus the positive imaginary axis.
inline std::pair<GInt, GInt> unit_normal(GInt a, GInt c) {
    const GInt units[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (auto u : units) {
        GInt a2 = a * u, c2 = c * u;
        GInt lead = c2.zero() ? a2 : c2;
        if (lead.re > 0 && lead.im >= 0) return {a2, c2};
    }
    return {a, c};
}

// Cusp columns (a, c), coprime, up to units, with |a|^2 + |c|^2 <= nmax.
inline std::vector<std::pair<GInt, GInt>> gaussian_cusps(long nmax) {
    std::map<std::pair<GInt, GInt>, int> seen;
    long R = static_cast<long>(std::sqrt(double(nmax))) + 1;
    for (long ar = -R; ar <= R; ++ar)
        for (long ai = -R; ai <= R; ++ai)
            for (long cr = -R; cr <= R; ++cr)
                for (long ci = -R; ci <= R; ++ci) {
                    GInt a{ar, ai}, c{cr, ci};
                    if (a.norm() + c.norm() > nmax || (a.zero() && c.zero())) continue;
                    GInt x, y;
                    if (!is_unit(gext(a, c, x, y))) continue;
                    seen[unit_normal(a, c)] = 1;
                }
    std::vector<std::pair<GInt, GInt>> out;
    for (auto& [k, v] : seen) out.push_back(k);
    return out;
}

// A PSL(2,Z[i]) matrix with left column (a, c).
inline omega::kleinian::MobiusMap matrix_with_column(GInt a, GInt c) {
    GInt x, y;
    GInt g = gext(a, c, x, y);  // a x + c y = g, a unit
    // [[a, -y/g], [c, x/g]] has determinant (a x + c y)/g = 1.
    auto gi = std::complex<double>(1) / g.c();
    return {a.c(), -y.c() * gi, c.c(), x.c() * gi};
}

// Ball model -> upper half-space via inversion in the sphere of radius sqrt2 about the
// north pole followed by the reflection z -> -z.
inline omega::kleinian::HPoint ball_to_uhs(const omega::kleinian::Vec3& X) {
    omega::kleinian::Vec3 N{0, 0, 1};
    auto d = X - N;
    auto Y = N + d * (2.0 / d.dot(d));
    return {{Y.x, Y.y}, -Y.z};
}

inline bool inside_horoball_euclid(const omega::kleinian::HPoint& x, const omega::kleinian::BoundaryPoint& base,
                                   double size) {
    if (base.inf) return x.h >= size;
    double r = size / 2;
    return std::norm(x.z - base.z) + (x.h - r) * (x.h - r) <= r * r;
}

// Hyperbolic length of the part of the ray toward u lying inside the horoball, by marching.
inline double marched_penetration(const omega::kleinian::Vec3& u, const omega::kleinian::BoundaryPoint& base,
                                  double size, int steps = 200000, double T = 30) {
    double len = 0;
    double dt = T / steps;
    for (int k = 0; k < steps; ++k) {
        double t = (k + 0.5) * dt;
        auto X = u * std::tanh(t / 2);
        if (inside_horoball_euclid(ball_to_uhs(X), base, size)) len += dt;
    }
    return len;
}

// min over horosphere points of the hyperbolic distance to x (golden-section on a grid).
inline double numeric_distance_to_horosphere(const omega::kleinian::HPoint& x, std::complex<double> p, double t) {
    // Horosphere points: p + (t/2) sin(phi) e^{i psi}, height (t/2)(1 - cos(phi)), phi in (0, 2pi).
    auto at = [&](double phi, double psi) {
        omega::kleinian::HPoint y{p + (t / 2) * std::sin(phi) * std::polar(1.0, psi), (t / 2) * (1 - std::cos(phi))};
        return omega::kleinian::hyperbolic_distance(x, y);
    };
    double best = 1e300, bphi = 0, bpsi = 0;
    for (int i = 1; i < 400; ++i)
        for (int j = 0; j < 64; ++j) {
            double phi = 2 * M_PI * i / 400, psi = 2 * M_PI * j / 64;
            double d = at(phi, psi);
            if (d < best) best = d, bphi = phi, bpsi = psi;
        }
    double sp = 2 * M_PI / 400, ss = 2 * M_PI / 64;
    for (int it = 0; it < 60; ++it) {
        for (double dp : {-sp, 0.0, sp})
            for (double ds : {-ss, 0.0, ss}) {
                double d = at(bphi + dp, bpsi + ds);
                if (d < best) best = d, bphi += dp, bpsi += ds;
            }
        sp *= 0.7;
        ss *= 0.7;
    }
    return best;
}

}  // namespace oracle
