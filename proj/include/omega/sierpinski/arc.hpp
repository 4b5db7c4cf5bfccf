#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "omega/core/error.hpp"
#include "omega/kleinian/mobius.hpp"

namespace omega::sierpinski {

using kleinian::chordal;
using kleinian::Vec3;

// Ordered samples on the unit sphere; consecutive samples are joined by short geodesics.
struct SphericalArc {
    std::vector<Vec3> pts;
    size_t size() const { return pts.size(); }
    const Vec3& front() const { return pts.front(); }
    const Vec3& back() const { return pts.back(); }
};

// Closed sample loop (first == last) around a reference point p.
struct SphericalCircle {
    std::vector<Vec3> pts;
    Vec3 p;
};

inline double mesh(const std::vector<Vec3>& pts) {
    double m = 0;
    for (size_t i = 1; i < pts.size(); ++i) m = std::max(m, chordal(pts[i - 1], pts[i]));
    return m;
}

inline std::vector<double> arclength_prefix(const std::vector<Vec3>& pts) {
    std::vector<double> L(pts.size(), 0);
    for (size_t i = 1; i < pts.size(); ++i) L[i] = L[i - 1] + chordal(pts[i - 1], pts[i]);
    return L;
}

// Geodesic interpolation between unit vectors.
inline Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
    double w = 2 * std::asin(std::min(1.0, chordal(a, b) / 2));
    if (w < 1e-6) return (a * (1 - t) + b * t).unit();
    double s = std::sin(w);
    return (a * (std::sin((1 - t) * w) / s) + b * (std::sin(t * w) / s)).unit();
}

// Inserts geodesic samples so consecutive gaps are at most h.
inline std::vector<Vec3> densify(const std::vector<Vec3>& pts, double h) {
    if (!(h > 0)) fail(ErrorKind::Precondition, "mesh must be positive");
    if (pts.size() < 2) return pts;
    std::vector<Vec3> out{pts[0]};
    for (size_t i = 1; i < pts.size(); ++i) {
        double d = chordal(pts[i - 1], pts[i]);
        auto k = static_cast<long>(std::ceil(d / h));
        for (long j = 1; j < k; ++j) out.push_back(slerp(pts[i - 1], pts[i], double(j) / double(k)));
        out.push_back(pts[i]);
    }
    return out;
}

inline std::vector<Vec3> geodesic_samples(const Vec3& a, const Vec3& b, double h) { return densify({a, b}, h); }

// Orthonormal e1, e2 completing c to a right-handed frame (e1 x e2 = c).
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& c) {
    Vec3 t = std::abs(c.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 e1 = (t - c * t.dot(c)).unit();
    return {e1, c.cross(e1)};
}

// Point at chordal distance rho from c, at angle theta in the tangent frame.
inline Vec3 circle_point(const Vec3& c, const Vec3& e1, const Vec3& e2, double rho, double theta) {
    double a = 2 * std::asin(std::min(1.0, rho / 2));
    return c * std::cos(a) + (e1 * std::cos(theta) + e2 * std::sin(theta)) * std::sin(a);
}

inline double frame_angle(const Vec3& x, const Vec3& e1, const Vec3& e2) { return std::atan2(x.dot(e2), x.dot(e1)); }

// Samples of the small circle about c from angle t0 sweeping by dt, gaps at most h.
inline std::vector<Vec3> circle_arc(const Vec3& c, double rho, double t0, double dt, double h) {
    auto [e1, e2] = tangent_basis(c);
    double a = 2 * std::asin(std::min(1.0, rho / 2));
    double circumference = 2 * M_PI * std::sin(a);
    auto k = std::max<long>(1, static_cast<long>(std::ceil(std::abs(dt) / (2 * M_PI) * circumference / h)));
    std::vector<Vec3> out;
    for (long j = 0; j <= k; ++j) out.push_back(circle_point(c, e1, e2, rho, t0 + dt * double(j) / double(k)));
    return out;
}

// Stereographic chart from -c onto the tangent plane at c; c maps to the origin.
struct Chart {
    Vec3 c, e1, e2;
    explicit Chart(const Vec3& center) : c(center) { std::tie(e1, e2) = tangent_basis(center); }
    std::array<double, 2> operator()(const Vec3& x) const {
        double k = 2 / (1 + x.dot(c));
        return {k * x.dot(e1), k * x.dot(e2)};
    }
};

inline Chart chart_for(const std::vector<Vec3>& pts) {
    Vec3 m;
    for (const auto& v : pts) m = m + v;
    if (m.norm() < 1e-9) fail(ErrorKind::Precondition, "samples too spread for a single chart");
    return Chart(m.unit());
}

// Total turning angle of a closed loop around x, seen in the chart from -p.
inline double winding_angle(const std::vector<Vec3>& loop, const Vec3& p, const Vec3& x) {
    Chart ch(p);
    auto o = ch(x);
    double sum = 0;
    for (size_t i = 1; i < loop.size(); ++i) {
        auto a = ch(loop[i - 1]), b = ch(loop[i]);
        double ax = a[0] - o[0], ay = a[1] - o[1], bx = b[0] - o[0], by = b[1] - o[1];
        sum += std::atan2(ax * by - ay * bx, ax * bx + ay * by);
    }
    return sum;
}

inline int winding_number(const std::vector<Vec3>& loop, const Vec3& p, const Vec3& x) {
    return static_cast<int>(std::lround(winding_angle(loop, p, x) / (2 * M_PI)));
}

// ---- planar segment geometry in a chart ----

namespace detail {

using P2 = std::array<double, 2>;

inline double orient(const P2& a, const P2& b, const P2& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

// Proper or touching intersection; returns parameter t on [a, b] when they meet.
inline std::optional<double> segments_meet(const P2& a, const P2& b, const P2& c, const P2& d) {
    double lo_ax = std::min(a[0], b[0]), hi_ax = std::max(a[0], b[0]), lo_ay = std::min(a[1], b[1]), hi_ay = std::max(a[1], b[1]);
    if (std::max(c[0], d[0]) < lo_ax || std::min(c[0], d[0]) > hi_ax || std::max(c[1], d[1]) < lo_ay ||
        std::min(c[1], d[1]) > hi_ay)
        return std::nullopt;
    double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
    bool s1 = (d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0);
    bool s2 = (d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0);
    if (s1 && s2) return d1 / (d1 - d2);
    auto on = [](const P2& p, const P2& q, const P2& r) {  // r on segment pq, given collinear
        return std::min(p[0], q[0]) <= r[0] && r[0] <= std::max(p[0], q[0]) && std::min(p[1], q[1]) <= r[1] &&
               r[1] <= std::max(p[1], q[1]);
    };
    auto param = [&](const P2& r) {
        double lx = b[0] - a[0], ly = b[1] - a[1], L = lx * lx + ly * ly;
        return L == 0 ? 0.0 : ((r[0] - a[0]) * lx + (r[1] - a[1]) * ly) / L;
    };
    if (d3 == 0 && on(a, b, c)) return param(c);
    if (d4 == 0 && on(a, b, d)) return param(d);
    if (d1 == 0 && on(c, d, a)) return 0.0;
    if (d2 == 0 && on(c, d, b)) return 1.0;
    return std::nullopt;
}

struct Cell2 {
    std::int64_t x, y;
    bool operator==(const Cell2& o) const { return x == o.x && y == o.y; }
};
struct Cell2Hash {
    size_t operator()(const Cell2& k) const { return std::hash<std::int64_t>()(k.x * 0x9E3779B97F4A7C15LL ^ k.y); }
};

// Segment buckets over a 2D chart; each segment registered in every cell its box touches.
class SegmentGrid {
public:
    SegmentGrid(const std::vector<P2>& q, double cell) : cell_(cell) {
        for (int i = 0; i + 1 < static_cast<int>(q.size()); ++i) each_cell(q[i], q[i + 1], [&](Cell2 k) { grid_[k].push_back(i); });
    }
    template <class F>
    void candidates(const P2& a, const P2& b, F&& f) const {
        std::vector<int> out;
        each_cell(a, b, [&](Cell2 k) {
            auto it = grid_.find(k);
            if (it != grid_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        });
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        for (int j : out) f(j);
    }

private:
    template <class F>
    void each_cell(const P2& a, const P2& b, F&& f) const {
        auto k0 = key(std::min(a[0], b[0]), std::min(a[1], b[1])), k1 = key(std::max(a[0], b[0]), std::max(a[1], b[1]));
        for (auto x = k0.x; x <= k1.x; ++x)
            for (auto y = k0.y; y <= k1.y; ++y) f(Cell2{x, y});
    }
    Cell2 key(double x, double y) const {
        return {static_cast<std::int64_t>(std::floor(x / cell_)), static_cast<std::int64_t>(std::floor(y / cell_))};
    }
    double cell_;
    std::unordered_map<Cell2, std::vector<int>, Cell2Hash> grid_;
};

inline double grid_cell_for(const std::vector<P2>& q) {
    double m = 0;
    for (size_t i = 1; i < q.size(); ++i) m += std::hypot(q[i][0] - q[i - 1][0], q[i][1] - q[i - 1][1]);
    return std::max(2 * m / double(std::max<size_t>(1, q.size() - 1)), 1e-15);
}

}  // namespace detail

struct Crossing {
    int i = 0, j = 0;  // segment indices, i < j
};

// Pairs of non-adjacent segments that meet. For closed loops the first and last
// segments are also adjacent.
inline std::vector<Crossing> self_crossings(const std::vector<Vec3>& pts, bool closed, size_t limit = 1000) {
    std::vector<Crossing> out;
    if (pts.size() < 4) return out;
    auto ch = chart_for(pts);
    std::vector<detail::P2> q;
    q.reserve(pts.size());
    for (const auto& v : pts) q.push_back(ch(v));
    detail::SegmentGrid grid(q, detail::grid_cell_for(q));
    int nseg = static_cast<int>(q.size()) - 1;
    for (int i = 0; i < nseg && out.size() < limit; ++i)
        grid.candidates(q[i], q[i + 1], [&](int j) {
            if (j <= i + 1 || out.size() >= limit) return;
            if (closed && i == 0 && j == nseg - 1) return;
            if (detail::segments_meet(q[i], q[i + 1], q[j], q[j + 1])) out.push_back({i, j});
        });
    return out;
}

// Shortens an arc to a simple one through its own image: walking from the start, whenever
// the current segment meets a later one, jump to the last such segment.
inline std::vector<Vec3> remove_loops(const std::vector<Vec3>& pts, bool closed = false) {
    if (pts.size() < 4) return pts;
    auto ch = chart_for(pts);
    std::vector<detail::P2> q;
    q.reserve(pts.size());
    for (const auto& v : pts) q.push_back(ch(v));
    detail::SegmentGrid grid(q, detail::grid_cell_for(q));
    const int nseg = static_cast<int>(q.size()) - 1;
    std::vector<Vec3> out{pts[0]};
    int i = 0;
    detail::P2 x = q[0];
    bool at_start = true;
    while (i < nseg) {
        int best = -1;
        double best_t = 0;
        grid.candidates(x, q[i + 1], [&](int j) {
            if (j <= i + 1) return;
            if (closed && at_start && j == nseg - 1) return;
            auto hit = detail::segments_meet(q[j], q[j + 1], x, q[i + 1]);
            if (hit && (j > best || (j == best && *hit > best_t))) best = j, best_t = *hit;
        });
        at_start = false;
        if (best < 0) {
            out.push_back(pts[i + 1]);
            x = q[++i];
            continue;
        }
        Vec3 y = (pts[best] * (1 - best_t) + pts[best + 1] * best_t).unit();
        if (chordal(y, out.back()) > 0) out.push_back(y);
        i = best;
        x = ch(y);
    }
    if (closed) out.back() = out.front();
    return out;
}

}  // namespace omega::sierpinski
