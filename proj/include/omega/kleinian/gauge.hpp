#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "omega/core/format.hpp"
#include "omega/kleinian/horoball.hpp"

namespace omega::kleinian {

// ---- Morse gauge from a divergence profile ----

template <class T>
struct GaugeBound {
    T R{}, fR{}, D{}, bound{};
};

// profile: (R, f(R)) samples, R increasing, f nondecreasing.
template <class T>
GaugeBound<T> morse_gauge_bound(const std::vector<std::pair<T, T>>& profile, const T& K, const T& C) {
    if (K < T(1)) fail(ErrorKind::Precondition, "K must be >= 1");
    if (C < T(0)) fail(ErrorKind::Precondition, "C must be >= 0");
    for (size_t i = 1; i < profile.size(); ++i)
        if (profile[i].first <= profile[i - 1].first || profile[i].second < profile[i - 1].second)
            fail(ErrorKind::Precondition, "profile must be increasing in R and nondecreasing in f");
    T need = K * K + K;
    for (const auto& [R, f] : profile)
        if (f >= need) {
            GaugeBound<T> g;
            g.R = R;
            g.fR = f;
            g.D = K * C * f + K * f + K * C + C;
            g.bound = R + g.D;
            return g;
        }
    std::string need_s;
    if constexpr (std::is_floating_point_v<T>) need_s = fmt_double(need);
    else need_s = need.str();
    fail(ErrorKind::Range, "divergence profile never reaches the required threshold K^2+K = " + need_s);
}

// ---- visual metric cross-check ----

struct MetricRatio {
    double visual = 0, chordal = 0, ratio = 0;
};

// Point at hyperbolic distance T from the ball origin toward unit vector u (ball model).
inline Vec3 ball_ray_point(const Vec3& u, double T) { return u * std::tanh(T / 2); }

inline double ball_distance(const Vec3& a, const Vec3& b) {
    double q = 2 * (a - b).dot(a - b) / ((1 - a.dot(a)) * (1 - b.dot(b)));
    return std::acosh(1 + q);
}

// e^{-(x,y)} with the Gromov product taken numerically along the two rays.
inline MetricRatio visual_vs_chordal(const BoundaryPoint& x, const BoundaryPoint& y, double T = 14) {
    Vec3 u = to_sphere(x), v = to_sphere(y);
    double ch = chordal(u, v);
    if (ch == 0) fail(ErrorKind::Precondition, "points must differ");
    Vec3 a = ball_ray_point(u, T), b = ball_ray_point(v, T);
    double gp = (2 * T - ball_distance(a, b)) / 2;
    MetricRatio m;
    m.visual = std::exp(-gp);
    m.chordal = ch;
    m.ratio = m.visual / m.chordal;
    return m;
}

// ---- empirical thresholds relating penetration depth and shadow membership ----

struct ThresholdSample {
    double rel_distance = 0;  // chordal(x, p) / r_p
    double penetration = 0;
};

// lambda(C): every sample with penetration <= C lies outside B(p, lambda r_p).
inline double lambda_for_depth(const std::vector<ThresholdSample>& s, double C) {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& x : s)
        if (x.penetration <= C) lam = std::min(lam, x.rel_distance);
    return lam;
}

// C(lambda): every sample outside B(p, lambda r_p) penetrates at most C.
inline double depth_for_lambda(const std::vector<ThresholdSample>& s, double lambda) {
    double C = 0;
    for (const auto& x : s)
        if (x.rel_distance >= lambda) C = std::max(C, x.penetration);
    return C;
}

}  // namespace omega::kleinian
