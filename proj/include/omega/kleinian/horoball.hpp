#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "omega/kleinian/mobius.hpp"

namespace omega::kleinian {

// Horoball at a finite base with Euclidean diameter `size`, or at ∞ with height `size`.
struct Horoball {
    BoundaryPoint base;
    double size = 1;
};

inline void require_nondegenerate(const Horoball& H) {
    if (!(H.size > 0) || !std::isfinite(H.size)) fail(ErrorKind::Precondition, "degenerate horoball (size must be > 0)");
}

// Signed distance from x to the horosphere: negative inside.
inline double signed_distance(const HPoint& x, const Horoball& H) {
    require_nondegenerate(H);
    if (H.base.inf) return std::log(H.size / x.h);
    return std::log((std::norm(x.z - H.base.z) + x.h * x.h) / (H.size * x.h));
}

inline double distance_to_horoball(const HPoint& x, const Horoball& H) { return std::max(0.0, signed_distance(x, H)); }

inline double shadow_radius(const Horoball& H, const HPoint& x0 = kBasepoint) {
    return std::exp(-distance_to_horoball(x0, H));
}

inline HPoint horosphere_top(const Horoball& H) {
    if (H.base.inf) return {{0, 0}, H.size};
    return {H.base.z, H.size};
}

// g(H), computed by pushing a horosphere point through the Poincaré extension.
inline Horoball image(const MobiusMap& g, const Horoball& H) {
    require_nondegenerate(H);
    HPoint w = g(horosphere_top(H));
    BoundaryPoint q = g(H.base);
    if (q.inf) return {q, w.h};
    return {q, (std::norm(w.z - q.z) + w.h * w.h) / w.h};
}

// Closed horoballs with disjoint interiors (tangency allowed at relative tolerance).
inline bool interiors_disjoint(const Horoball& A, const Horoball& B, double rtol = 1e-9) {
    if (A.base.inf && B.base.inf) return false;
    if (A.base.inf) return B.size <= A.size * (1 + rtol);
    if (B.base.inf) return A.size <= B.size * (1 + rtol);
    return std::norm(A.base.z - B.base.z) >= A.size * B.size * (1 - rtol);
}

// Horosphere as a Euclidean sphere in the ball model: tangent at P = to_sphere(base),
// crossing the diameter through P at s·P with s = tanh(signed distance from origin / 2).
struct BallHorosphere {
    Vec3 P, center;
    double radius = 0;
};

inline BallHorosphere ball_horosphere(const Horoball& H, const HPoint& x0 = kBasepoint) {
    double D = signed_distance(x0, H);
    double s = std::tanh(D / 2);
    Vec3 P = to_sphere(H.base);
    return {P, P * ((1 + s) / 2), (1 - s) / 2};
}

// Hyperbolic length of (ray from x0 toward x) ∩ H; +∞ when x is the base point.
inline double penetration_diameter(const BoundaryPoint& x, const Horoball& H, const HPoint& x0 = kBasepoint) {
    if (std::abs(x0.h - 1) > 1e-15 || std::abs(x0.z) > 1e-15)
        fail(ErrorKind::Precondition, "penetration is computed from the ball origin (0,0,1)");
    auto S = ball_horosphere(H, x0);
    Vec3 u = to_sphere(x);
    if (chordal(u, S.P) < 1e-12) return std::numeric_limits<double>::infinity();
    // |t u - c|^2 = rho^2
    double B = u.dot(S.center), Cq = S.center.dot(S.center) - S.radius * S.radius;
    double disc = B * B - Cq;
    if (disc <= 0) return 0;
    double t1 = B - std::sqrt(disc), t2 = B + std::sqrt(disc);
    t1 = std::max(t1, 0.0);
    t2 = std::min(t2, 1.0);
    if (t2 <= t1) return 0;
    return 2 * (std::atanh(t2) - std::atanh(t1));
}

}  // namespace omega::kleinian
