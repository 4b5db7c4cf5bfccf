#pragma once

// Synthetic spherical arcs with injected loops, for straighten tests and acceptance.

#include <cmath>
#include <random>
#include <vector>

#include "omega/sierpinski/arc.hpp"

namespace omega::synth {

using sierpinski::Vec3;

// Exponential map at c: tangent-plane offset (u, v) in the frame of tangent_basis(c).
inline Vec3 tangent_exp(const Vec3& c, double u, double v) {
    auto [e1, e2] = sierpinski::tangent_basis(c);
    double a = std::hypot(u, v);
    if (a == 0) return c;
    return (c * std::cos(a) + (e1 * (u / a) + e2 * (v / a)) * std::sin(a)).unit();
}

struct SyntheticArc {
    sierpinski::SphericalArc arc;
    double iota = 0;
    int loops = 0;
    bool crossing = false;  // some loop crosses the base path
};

// Straight base path of length ~60 iota with 1..3 loops of diameter 10 iota, each attached
// between base samples at distance s iota / 2 (s = 1/2). With crossing set, each loop
// dips through the base path instead of bulging off it.
inline SyntheticArc synthetic_arc(std::mt19937_64& rng, double iota, bool crossing) {
    std::normal_distribution<double> g;
    Vec3 c = Vec3{g(rng), g(rng), g(rng)}.unit();
    const double h = iota / 20, L = 60 * iota, gap = 0.25 * iota, rad = 5 * iota;
    std::uniform_int_distribution<int> nloops(1, 3);
    const int k = nloops(rng);
    std::vector<double> at;
    for (int j = 0; j < k; ++j) at.push_back(-L / 2 + L * (j + 0.5) / k);
    std::uniform_real_distribution<double> jitter(-2 * iota, 2 * iota), side(0, 1);

    std::vector<std::array<double, 2>> q;
    double u = -L / 2;
    for (int j = 0; j < k; ++j) {
        double u0 = at[j] + jitter(rng) - gap / 2, u1 = u0 + gap;
        for (; u < u0; u += h) q.push_back({u, 0});
        q.push_back({u0, 0});
        double sgn = side(rng) < 0.5 ? 1 : -1, mid = (u0 + u1) / 2;
        if (!crossing) {
            // Circle through (u0, 0) and (u1, 0), traversed the long way round.
            double cy = std::sqrt(rad * rad - gap * gap / 4);
            double t0 = std::atan2(-cy, u0 - mid), t1 = std::atan2(-cy, u1 - mid);
            double sweep = -(2 * M_PI - (t1 - t0));
            int n = static_cast<int>(std::ceil(std::abs(sweep) * rad / h));
            for (int i = 1; i < n; ++i) {
                double t = t0 + sweep * i / n;
                q.push_back({mid + rad * std::cos(t), sgn * (cy + rad * std::sin(t))});
            }
        } else {
            // Full circle hanging below the base path, entered and left through its bottom area.
            double cy = rad - 0.3 * iota;
            int n = static_cast<int>(std::ceil(2 * M_PI * rad / h));
            for (int i = 0; i < n; ++i) {
                double t = -M_PI / 2 + (2 * M_PI - 0.3) * i / n;
                q.push_back({mid + rad * std::cos(t), sgn * (cy + rad * std::sin(t))});
            }
        }
        q.push_back({u1, 0});
        u = u1 + h;
    }
    for (; u < L / 2; u += h) q.push_back({u, 0});
    q.push_back({L / 2, 0});

    SyntheticArc out;
    out.iota = iota;
    out.loops = k;
    out.crossing = crossing;
    std::vector<Vec3> pts;
    for (auto [a, b] : q) pts.push_back(tangent_exp(c, a, b));
    out.arc.pts = sierpinski::densify(pts, h);
    return out;
}

// The fixed 50-arc corpus: alternating bulging and crossing loops.
inline std::vector<SyntheticArc> straighten_corpus(std::uint64_t seed = 20240601, int n = 50) {
    std::mt19937_64 rng(seed);
    std::vector<SyntheticArc> out;
    for (int i = 0; i < n; ++i) out.push_back(synthetic_arc(rng, 1e-3, i % 2 == 1));
    return out;
}

}  // namespace omega::synth
