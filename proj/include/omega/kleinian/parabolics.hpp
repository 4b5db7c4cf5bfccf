#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "omega/core/format.hpp"
#include "omega/kleinian/preset.hpp"

namespace omega::kleinian {

struct ParabolicPoint {
    BoundaryPoint p;
    Vec3 s;               // on the unit sphere
    double r = 1;         // shadow radius
    int word_length = 0;  // BFS layer where first reached
    Complex a{1}, c{0};   // left column of a representative g with g(∞) = p
    double c_norm2 = 0;   // |c|^2, independent of the representative
    Horoball horoball;
};

struct EnumerateOptions {
    int max_word_length = 256;
    double slack = 2;  // explore left columns with |a|^2+|c|^2 up to slack / (h r_min)
};

namespace detail {

using Cell = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

struct CellHash {
    size_t operator()(const Cell& k) const {
        auto [x, y, z] = k;
        return std::hash<std::int64_t>()(x * 73856093 ^ y * 19349663 ^ z * 83492791);
    }
};

// Points on the sphere deduplicated within `tol`.
class PointSet {
public:
    explicit PointSet(double tol) : tol_(tol) {}
    std::optional<int> find(const Vec3& v) const {
        auto [x, y, z] = key(v);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find({x + dx, y + dy, z + dz});
                    if (it == cells_.end()) continue;
                    for (auto [w, id] : it->second)
                        if (chordal(w, v) <= tol_) return id;
                }
        return std::nullopt;
    }
    void insert(const Vec3& v, int id) { cells_[key(v)].emplace_back(v, id); }

private:
    Cell key(const Vec3& v) const {
        return {std::llround(v.x / tol_), std::llround(v.y / tol_), std::llround(v.z / tol_)};
    }
    double tol_;
    std::unordered_map<Cell, std::vector<std::pair<Vec3, int>>, CellHash> cells_;
};

}  // namespace detail

inline ParabolicPoint parabolic_from_column(Complex a, Complex c, double h, int word_length) {
    ParabolicPoint q;
    q.a = a;
    q.c = c;
    q.c_norm2 = std::norm(c);
    q.word_length = word_length;
    double N = std::norm(a) + std::norm(c);
    bool at_inf = std::abs(c) < 1e-12 * std::sqrt(N);
    q.p = at_inf ? BoundaryPoint::infinity() : BoundaryPoint::at(a / c);
    q.s = to_sphere(q.p);
    // Image of the height-h horoball at ∞ under a matrix with left column (a, c).
    q.horoball = at_inf ? Horoball{q.p, h * std::norm(a)} : Horoball{q.p, 1.0 / (h * std::norm(c))};
    q.r = std::min(1.0, 1.0 / (h * N));
    if (at_inf) q.c_norm2 = 0;
    return q;
}

// Orbit of the cusp at ∞, breadth-first in word length over left columns.
inline std::vector<ParabolicPoint> enumerate_parabolics(const GroupPreset& G, double r_min,
                                                        const EnumerateOptions& opt = {}) {
    if (!(r_min > 0)) fail(ErrorKind::Precondition, "r_min must be positive");
    validate_preset(G);
    std::vector<MobiusMap> moves;
    for (const auto& g : G.generators) {
        moves.push_back(g);
        moves.push_back(g.inverse());
    }
    const double h = G.cusp_height;
    const double n_keep = 1.0 / (h * r_min) * (1 + 1e-12);
    const double n_explore = opt.slack * n_keep;

    std::vector<ParabolicPoint> found;
    detail::PointSet seen(1e-10);
    std::vector<std::pair<Complex, Complex>> frontier{{Complex(1), Complex(0)}};
    found.push_back(parabolic_from_column(1, 0, h, 0));
    seen.insert(found[0].s, 0);
    int layer = 0;
    while (!frontier.empty()) {
        if (layer == opt.max_word_length) {
            double floor = 0;
            for (auto [a, c] : frontier) floor = std::max(floor, std::min(1.0, 1.0 / (h * (std::norm(a) + std::norm(c)))));
            fail(ErrorKind::Budget, "incomplete enumeration: word-length budget " + std::to_string(opt.max_word_length) +
                                        " exhausted; achieved r floor " + fmt_double(floor));
        }
        ++layer;
        std::vector<std::pair<Complex, Complex>> next;
        for (auto [a, c] : frontier)
            for (const auto& m : moves) {
                Complex a2 = m.a * a + m.b * c, c2 = m.c * a + m.d * c;
                double N = std::norm(a2) + std::norm(c2);
                if (N > n_explore) continue;
                auto q = parabolic_from_column(a2, c2, h, layer);
                if (seen.find(q.s)) continue;
                seen.insert(q.s, static_cast<int>(found.size()));
                found.push_back(q);
                next.emplace_back(a2, c2);
            }
        frontier.swap(next);
    }
    std::vector<ParabolicPoint> out;
    for (auto& q : found)
        if (std::norm(q.a) + std::norm(q.c) <= n_keep) out.push_back(q);
    std::sort(out.begin(), out.end(), [](const ParabolicPoint& x, const ParabolicPoint& y) {
        auto kx = std::llround(x.r * 1e12), ky = std::llround(y.r * 1e12);
        if (kx != ky) return kx > ky;
        return std::tie(x.s.z, x.s.x, x.s.y) > std::tie(y.s.z, y.s.x, y.s.y);
    });
    return out;
}

// Parabolic points with r >= r_lo inside the chordal annulus d_lo <= d(x, ∞) <= d_hi, built
// from translates of a reduced set of representatives under the cusp lattice at ∞. Needs
// G.cusp_translations. word_length is -1 for the translated points.
inline std::vector<ParabolicPoint> enumerate_near_infinity(const GroupPreset& G, double r_lo, double d_lo, double d_hi,
                                                           const EnumerateOptions& opt = {}) {
    if (G.cusp_translations.size() != 2) fail(ErrorKind::Precondition, "preset '" + G.name + "' declares no cusp lattice");
    if (!(r_lo > 0)) fail(ErrorKind::Precondition, "r_lo must be positive");
    if (!(d_lo > 0 && d_lo < d_hi && d_hi <= 2)) fail(ErrorKind::Precondition, "annulus radii must satisfy 0 < d_lo < d_hi <= 2");
    const double h = G.cusp_height;
    const Complex w1 = G.cusp_translations[0], w2 = G.cusp_translations[1];
    // |z| range of the annulus: d(z, ∞) = 2 / sqrt(|z|^2 + 1).
    auto modulus = [](double d) { return std::sqrt(std::max(0.0, 4 / (d * d) - 1)); };
    const double z_hi = modulus(d_lo), z_lo = modulus(d_hi);
    const double D = std::abs(w1) + std::abs(w2);
    const double c_max = 1.0 / (h * r_lo * (1 + z_lo * z_lo));
    const double base_rmin = std::min(1.0, 1.0 / (h * c_max * (1 + D * D)));

    const double det = w1.real() * w2.imag() - w1.imag() * w2.real();
    auto coords = [&](Complex z) {
        return std::pair{(z.real() * w2.imag() - z.imag() * w2.real()) / det,
                         (w1.real() * z.imag() - w1.imag() * z.real()) / det};
    };
    std::vector<ParabolicPoint> reps;
    detail::PointSet seen(1e-10);
    for (const auto& q : enumerate_parabolics(G, base_rmin, opt)) {
        if (q.p.inf || q.c_norm2 > c_max * (1 + 1e-9)) continue;
        auto [x, y] = coords(q.p.z);
        Complex shift = std::floor(x) * w1 + std::floor(y) * w2;
        auto red = parabolic_from_column(q.a - shift * q.c, q.c, h, q.word_length);
        if (seen.find(red.s)) continue;
        seen.insert(red.s, static_cast<int>(reps.size()));
        reps.push_back(red);
    }

    std::vector<ParabolicPoint> out;
    // Lattice coefficients reaching |z| <= z_hi + D.
    double m1 = std::abs(w2) * (z_hi + D) / std::abs(det) + 1, m2 = std::abs(w1) * (z_hi + D) / std::abs(det) + 1;
    auto M = static_cast<long>(std::ceil(m1)), Nn = static_cast<long>(std::ceil(m2));
    for (const auto& q : reps) {
        double cn = q.c_norm2;
        for (long m = -M; m <= M; ++m)
            for (long n = -Nn; n <= Nn; ++n) {
                Complex t = double(m) * w1 + double(n) * w2;
                Complex z = q.p.z + t;
                double az = std::abs(z);
                if (az < z_lo || az > z_hi) continue;
                if (1.0 / (h * (std::norm(q.a + t * q.c) + cn)) < r_lo) continue;
                auto tq = parabolic_from_column(q.a + t * q.c, q.c, h, -1);
                double d = chordal(tq.s, Vec3{0, 0, 1});
                if (d < d_lo || d > d_hi) continue;
                out.push_back(tq);
            }
    }
    std::sort(out.begin(), out.end(), [](const ParabolicPoint& x, const ParabolicPoint& y) {
        auto kx = std::llround(x.r * 1e15), ky = std::llround(y.r * 1e15);
        if (kx != ky) return kx > ky;
        return std::tie(x.s.z, x.s.x, x.s.y) > std::tie(y.s.z, y.s.x, y.s.y);
    });
    return out;
}

// ---- shadows ----

// Open chordal ball B(p, rho) as a spherical cap of angular radius alpha.
inline double cap_angle(double rho) { return rho >= 2 ? M_PI : 2 * std::asin(rho / 2); }
inline double angle_between(const Vec3& a, const Vec3& b) {
    return 2 * std::asin(std::min(1.0, chordal(a, b) / 2));
}
inline bool open_balls_meet(const Vec3& p, double rho1, const Vec3& q, double rho2) {
    return angle_between(p, q) < cap_angle(rho1) + cap_angle(rho2);
}

// Parabolics bucketed by dyadic radius tier, each tier on a grid sized to its balls.
class ShadowIndex {
public:
    ShadowIndex(const std::vector<ParabolicPoint>& pts, double lambda) : pts_(&pts), lambda_(lambda) {
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
            int t = tier(pts[i].r);
            auto& T = tiers_[t];
            T.cell = std::max(1e-9, 2 * lambda * std::ldexp(1.0, -t));
            T.grid[key(pts[i].s, T.cell)].push_back(i);
            T.members.push_back(i);
        }
    }
    // Indices i with chordal(x, p_i) < lambda r_i + pad, among tiers that can hold
    // r_lo <= r_i < r_hi.
    template <class F>
    void near(const Vec3& x, double pad, F&& visit, double r_lo = 0, double r_hi = 2) const {
        for (const auto& [t, T] : tiers_) {
            if (std::ldexp(1.0, -t) < r_lo || std::ldexp(1.0, -t - 1) >= r_hi) continue;
            double reach = lambda_ * std::ldexp(1.0, -t) + pad;
            std::int64_t span = static_cast<std::int64_t>(std::ceil(reach / T.cell));
            auto test = [&](int i) {
                if (chordal(x, (*pts_)[i].s) < lambda_ * (*pts_)[i].r + pad) visit(i);
            };
            if (std::pow(2.0 * span + 1, 3) > static_cast<double>(T.members.size())) {
                for (int i : T.members) test(i);
                continue;
            }
            auto [cx, cy, cz] = key(x, T.cell);
            for (auto dx = -span; dx <= span; ++dx)
                for (auto dy = -span; dy <= span; ++dy)
                    for (auto dz = -span; dz <= span; ++dz) {
                        auto it = T.grid.find({cx + dx, cy + dy, cz + dz});
                        if (it == T.grid.end()) continue;
                        for (int i : it->second) test(i);
                    }
        }
    }

private:
    struct Tier {
        double cell = 1;
        std::vector<int> members;
        std::unordered_map<detail::Cell, std::vector<int>, detail::CellHash> grid;
    };
    static int tier(double r) { return std::max(0, static_cast<int>(std::floor(-std::log2(r)))); }
    static detail::Cell key(const Vec3& v, double cell) {
        return {static_cast<std::int64_t>(std::floor(v.x / cell)), static_cast<std::int64_t>(std::floor(v.y / cell)),
                static_cast<std::int64_t>(std::floor(v.z / cell))};
    }
    const std::vector<ParabolicPoint>* pts_;
    double lambda_;
    std::map<int, Tier> tiers_;
};

struct ShadowComplement {
    double lambda = 1;
    double r_min = 0;
    std::vector<ParabolicPoint> points;  // sorted by r descending
};

inline ShadowComplement make_shadow_complement(const GroupPreset& G, double lambda, double r_min,
                                               const EnumerateOptions& opt = {}) {
    if (!(lambda > 0 && lambda <= 1)) fail(ErrorKind::Precondition, "lambda must lie in (0, 1]");
    return {lambda, r_min, enumerate_parabolics(G, r_min, opt)};
}

struct ShadowQuery {
    bool in_complement = true;
    bool resolution_limited = false;
    std::optional<int> blocker;  // index of a listed p with d(x,p) < lambda r_p
};

inline ShadowQuery in_shadow_complement(const ShadowComplement& V, const ShadowIndex& index, const Vec3& x) {
    ShadowQuery q;
    index.near(x, 0, [&](int i) {
        if (!q.blocker || i < *q.blocker) q.blocker = i;
    });
    q.in_complement = !q.blocker;
    bool close = false;
    for (const auto& p : V.points)
        if (chordal(x, p.s) < V.lambda * V.r_min) {
            close = true;
            break;
        }
    q.resolution_limited = !close;
    return q;
}

inline ShadowQuery in_shadow_complement(const ShadowComplement& V, const Vec3& x) {
    ShadowIndex idx(V.points, V.lambda);
    return in_shadow_complement(V, idx, x);
}

// ---- separation ----

struct SeparationFailure {
    int i = 0, j = 0;
    double angle = 0, cap_sum = 0;
};

struct SeparationReport {
    double lambda = 0;
    double ratio = 100;
    long pairs_checked = 0;
    std::vector<SeparationFailure> failures;
    bool pass() const { return failures.empty(); }
};

// Pairs with r_p / r_p' strictly inside (1/ratio, ratio) must have disjoint open balls
// B(p, lambda r_p). `keep` restricts which points take part.
template <class Keep>
SeparationReport check_separation(const std::vector<ParabolicPoint>& pts, double lambda, Keep&& keep,
                                  double ratio = 100, size_t max_failures = 64) {
    SeparationReport rep;
    rep.lambda = lambda;
    rep.ratio = ratio;
    std::vector<ParabolicPoint> sub;
    std::vector<int> back;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
        if (keep(pts[i])) {
            sub.push_back(pts[i]);
            back.push_back(i);
        }
    ShadowIndex idx(sub, lambda);
    // Centre each query on the smaller ball so grid spans stay bounded.
    for (int j = 0; j < static_cast<int>(sub.size()); ++j) {
        double b = sub[j].r;
        idx.near(sub[j].s, lambda * b, [&](int i) {
            double a = sub[i].r;
            if (i == j || a < b || (a == b && i > j)) return;
            if (!(b > a / ratio && a > b / ratio)) return;
            ++rep.pairs_checked;
            double th = angle_between(sub[i].s, sub[j].s);
            double cs = cap_angle(lambda * a) + cap_angle(lambda * b);
            if (th < cs && rep.failures.size() < max_failures) rep.failures.push_back({back[i], back[j], th, cs});
        }, b, ratio * b);
    }
    return rep;
}

inline SeparationReport check_separation(const std::vector<ParabolicPoint>& pts, double lambda, double ratio = 100) {
    return check_separation(pts, lambda, [](const ParabolicPoint&) { return true; }, ratio);
}

// Largest lambda in (0, 1] (to bisection tolerance) passing check_separation.
template <class Keep>
double find_lambda0(const std::vector<ParabolicPoint>& pts, Keep&& keep, double ratio = 100, int iterations = 30) {
    if (check_separation(pts, 1.0, keep, ratio, 1).pass()) return 1.0;
    double lo = 0, hi = 1;
    for (int it = 0; it < iterations; ++it) {
        double mid = (lo + hi) / 2;
        (check_separation(pts, mid, keep, ratio, 1).pass() ? lo : hi) = mid;
    }
    if (lo <= 0) fail(ErrorKind::Separation, "no separating lambda found");
    return lo;
}

// ---- exports ----

inline std::string parabolics_csv(const std::vector<ParabolicPoint>& pts) {
    std::string out = "p_re,p_im,p_inf,r_p,word_length\n";
    for (const auto& q : pts) {
        out += q.p.inf ? "0,0,1," : fmt_double(q.p.z.real()) + "," + fmt_double(q.p.z.imag()) + ",0,";
        out += fmt_double(q.r) + "," + std::to_string(q.word_length) + "\n";
    }
    return out;
}

}  // namespace omega::kleinian
