#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "omega/sierpinski/circles.hpp"

namespace omega::sierpinski {

inline std::vector<Vec3> fibonacci_sphere(int n) {
    std::vector<Vec3> out;
    out.reserve(n);
    const double golden = M_PI * (3 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1 - (2 * i + 1.0) / n, r = std::sqrt(std::max(0.0, 1 - z * z)), t = golden * i;
        out.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    return out;
}

struct ContainmentReport {
    int samples = 0;
    int in_V_lambda = 0, in_S = 0, in_V_quarter = 0;
    int lower_failures = 0;  // x in V_lambda but not in S
    int upper_failures = 0;  // x in S but not in V_{lambda/4}
    bool ok() const { return lower_failures == 0 && upper_failures == 0; }
};

struct SierpinskiApprox {
    double lambda = 0;
    int depth = 0;
    std::string preset;
    double r_floor = 0;
    std::vector<PeripheralCircle> circles;  // one per enumerated parabolic, enumeration order
    std::vector<int> retained;              // circles bounding the excluded disks
    std::vector<std::pair<int, int>> nested;  // (outer, inner) pairs resolved by discarding inner
    std::vector<std::string> warnings;
    std::optional<ContainmentReport> containment;
    bool diameters_decreasing = true;
};

struct SierpinskiOptions {
    CircleOptions circle;
    int grid_samples = 10000;  // 0 skips the containment sampling
    int threads = 0;           // 0: hardware concurrency
};

namespace detail {

// Closest pair between two sampled loops, with crossings counted as distance 0.
struct LoopGap {
    double distance = std::numeric_limits<double>::infinity();
    int i = -1, j = -1;
};

inline LoopGap loop_gap(const std::vector<Vec3>& A, const std::vector<Vec3>& B, double tol = 0) {
    LoopGap g;
    double h = std::max({mesh(A), mesh(B), tol, 1e-15});
    PointGrid grid(B, h);
    for (int i = 0; i < static_cast<int>(A.size()); ++i)
        grid.within(A[i], h, [&](int j, double d) {
            if (d < g.distance) g = {d, i, j};
        });
    if (g.i < 0) {
        // Nothing within one mesh, so the loops are apart; the reported gap is over at most
        // 256 samples of each and may exceed the true one by a mesh.
        const int sa = std::max<int>(1, static_cast<int>(A.size()) / 256), sb = std::max<int>(1, static_cast<int>(B.size()) / 256);
        for (int i = 0; i < static_cast<int>(A.size()); i += sa)
            for (int j = 0; j < static_cast<int>(B.size()); j += sb) {
                double d = chordal(A[i], B[j]);
                if (d < g.distance) g = {d, i, j};
            }
        return g;
    }
    // Close enough that segments could cross: test in a shared chart.
    std::vector<Vec3> both = A;
    both.insert(both.end(), B.begin(), B.end());
    auto ch = chart_for(both);
    std::vector<P2> qa, qb;
    for (const auto& v : A) qa.push_back(ch(v));
    for (const auto& v : B) qb.push_back(ch(v));
    SegmentGrid sg(qb, grid_cell_for(qb));
    for (int i = 0; i + 1 < static_cast<int>(qa.size()); ++i) {
        bool hit = false;
        sg.candidates(qa[i], qa[i + 1], [&](int j) {
            if (!hit && segments_meet(qa[i], qa[i + 1], qb[j], qb[j + 1])) hit = true, g = {0, i, j};
        });
        if (hit) break;
    }
    return g;
}

// Bounding caps of the circles, for candidate-pair search.
inline std::vector<ParabolicPoint> cap_proxies(const std::vector<PeripheralCircle>& cs, double& lam) {
    std::vector<ParabolicPoint> out;
    lam = 0;
    for (const auto& c : cs) {
        out.push_back(c.p);
        lam = std::max(lam, c.max_d / c.p.r);
    }
    lam *= 1 + 1e-9;
    return out;
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, std::max(1, n));
    std::vector<std::exception_ptr> errs(n);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) try {
                    f(i);
                } catch (...) {
                    errs[i] = std::current_exception();
                }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);  // lowest index first, independent of scheduling
}

}  // namespace detail

// Grid check of V_lambda ⊆ S ⊆ V_{lambda/4}.
inline ContainmentReport check_containment(const SierpinskiApprox& S, const std::vector<ParabolicPoint>& pts, int n) {
    ContainmentReport rep;
    rep.samples = n;
    kleinian::ShadowIndex full(pts, S.lambda), quarter(pts, S.lambda / 4);
    std::vector<PeripheralCircle> kept;
    for (int i : S.retained) kept.push_back(S.circles[i]);
    double lam = 0;
    auto proxies = detail::cap_proxies(kept, lam);
    kleinian::ShadowIndex disks(proxies, std::max(lam, 1e-12));
    for (const auto& x : fibonacci_sphere(n)) {
        bool inV = true, inQ = true, inS = true;
        full.near(x, 0, [&](int) { inV = false; });
        quarter.near(x, 0, [&](int) { inQ = false; });
        disks.near(x, 0, [&](int k) { inS = inS && !inside_disk(kept[k], x); });
        rep.in_V_lambda += inV, rep.in_S += inS, rep.in_V_quarter += inQ;
        if (inV && !inS) ++rep.lower_failures;
        if (inS && !inQ) ++rep.upper_failures;
    }
    return rep;
}

// One peripheral circle per parabolic; nested disks keep only the outer one.
inline SierpinskiApprox build_sierpinski(double lambda, const std::vector<ParabolicPoint>& pts,
                                         const SierpinskiOptions& opt = {}, const std::string& preset = "") {
    if (pts.empty()) fail(ErrorKind::Precondition, "no parabolic points supplied");
    SierpinskiApprox S;
    S.lambda = lambda;
    S.depth = opt.circle.depth;
    S.preset = preset;
    S.r_floor = opt.circle.r_floor;
    const int n = static_cast<int>(pts.size());
    S.circles.resize(n);

    kleinian::ShadowIndex idx(pts, lambda);
    detail::parallel_for(n, opt.threads, [&](int i) {
        std::vector<ParabolicPoint> near;
        idx.near(pts[i].s, lambda * pts[i].r, [&](int j) {
            if (j != i) near.push_back(pts[j]);
        }, 0, 2 * pts[i].r);
        S.circles[i] = build_peripheral_circle(pts[i], lambda, near, opt.circle, i);
    });

    // Pairwise: intersections are fatal, nesting discards the inner disk.
    double lam = 0;
    auto proxies = detail::cap_proxies(S.circles, lam);
    kleinian::ShadowIndex caps(proxies, lam);
    std::vector<char> inner(n, 0);
    for (int i = 0; i < n; ++i) {
        const auto& A = S.circles[i];
        caps.near(A.p.s, A.max_d, [&](int j) {
            if (j <= i) return;
            const auto& B = S.circles[j];
            auto gap = detail::loop_gap(A.gamma.pts, B.gamma.pts, opt.circle.tol);
            if (gap.distance <= opt.circle.tol)
                fail(ErrorKind::Construction, "peripheral circles " + std::to_string(i) + " and " + std::to_string(j) +
                                                  " intersect (gap " + fmt_double(gap.distance) + ")");
            if (inside_disk(A, B.gamma.pts[0])) {
                inner[j] = 1;
                S.nested.emplace_back(i, j);
            } else if (inside_disk(B, A.gamma.pts[0])) {
                inner[i] = 1;
                S.nested.emplace_back(j, i);
            }
        });
    }
    for (int i = 0; i < n; ++i)
        if (!inner[i]) S.retained.push_back(i);
    for (const auto& c : S.circles)
        for (const auto& w : c.warnings)
            if (std::find(S.warnings.begin(), S.warnings.end(), w) == S.warnings.end()) S.warnings.push_back(w);

    double prev = std::numeric_limits<double>::infinity();
    for (int i : S.retained) {
        double d = S.circles[i].diameter;
        if (d > prev + opt.circle.tol) S.diameters_decreasing = false;
        prev = std::min(prev, d);
    }
    if (opt.grid_samples > 0) S.containment = check_containment(S, pts, opt.grid_samples);
    return S;
}

// ---- entwinement ----

struct EntwinedReport {
    bool entwined = true;
    int pairs_checked = 0;
    double closest = std::numeric_limits<double>::infinity();
    int circle1 = -1, circle2 = -1;  // closest pair (circle indices in S1, S2)
};

namespace detail {

inline EntwinedReport circle_scan(const SierpinskiApprox& S1, const SierpinskiApprox& S2, double tol) {
    EntwinedReport rep;
    std::vector<PeripheralCircle> kept2;
    for (int j : S2.retained) kept2.push_back(S2.circles[j]);
    if (kept2.empty()) return rep;
    double lam = 0;
    auto proxies = cap_proxies(kept2, lam);
    kleinian::ShadowIndex caps(proxies, lam);
    for (int i : S1.retained) {
        const auto& A = S1.circles[i];
        caps.near(A.p.s, A.max_d, [&](int k) {
            ++rep.pairs_checked;
            auto gap = loop_gap(A.gamma.pts, kept2[k].gamma.pts, tol);
            if (gap.distance < rep.closest) rep.closest = gap.distance, rep.circle1 = i, rep.circle2 = S2.retained[k];
        });
    }
    rep.entwined = !(rep.closest <= tol);
    return rep;
}

}  // namespace detail

// S1 at lambda1, S2 at lambda2 <= lambda1 / 4: no peripheral circle of one meets one of the other.
inline EntwinedReport check_entwined(const SierpinskiApprox& S1, const SierpinskiApprox& S2, double tol = 1e-6) {
    if (!(S2.lambda <= S1.lambda / 4 * (1 + 1e-12)))
        fail(ErrorKind::Schedule, "entwinement needs lambda2 <= lambda1/4; got lambda1 = " + fmt_double(S1.lambda) +
                                      ", lambda2 = " + fmt_double(S2.lambda));
    if (S1.preset != S2.preset) fail(ErrorKind::Precondition, "strata come from different presets");
    return detail::circle_scan(S1, S2, tol);
}

// ---- decomposition ----

// Sample data for a candidate piecewise map: pieces[0] is C_0; each piece is an ordered
// polyline of domain samples with matching image samples.
struct PiecewiseSamples {
    std::vector<std::vector<Vec3>> domain, image;
};

struct PiecewiseReport {
    std::array<bool, 5> conditions{};  // covering, meets C_0, diam -> 0, image diam -> 0, continuity
    std::vector<int> failing() const {
        std::vector<int> f;
        for (int k = 0; k < 5; ++k)
            if (!conditions[k]) f.push_back(k + 1);
        return f;
    }
};

namespace detail {

inline double point_set_diameter(const std::vector<Vec3>& s) {
    auto d = downsample(s, 512);
    double m = 0;
    for (size_t a = 0; a < d.size(); ++a)
        for (size_t b = a + 1; b < d.size(); ++b) m = std::max(m, chordal(d[a], d[b]));
    return m;
}

// Finite form of "tends to 0": the largest value in the second half is at most half the
// largest value in the first half.
inline bool tail_halves(const std::vector<double>& v) {
    if (v.size() < 2) return true;
    size_t mid = v.size() / 2;
    double head = *std::max_element(v.begin(), v.begin() + mid), tail = *std::max_element(v.begin() + mid, v.end());
    return tail <= head / 2;
}

}  // namespace detail

// covering_points: samples of X that must each lie within `mesh` of some piece sample.
inline PiecewiseReport check_piecewise(const PiecewiseSamples& f, const std::vector<Vec3>& covering_points, double mesh_tol,
                                       double jump_tol) {
    if (f.domain.size() != f.image.size() || f.domain.empty())
        fail(ErrorKind::Precondition, "piecewise samples need matching, nonempty domain and image lists");
    for (size_t i = 0; i < f.domain.size(); ++i)
        if (f.domain[i].size() != f.image[i].size() || f.domain[i].empty())
            fail(ErrorKind::Precondition, "piece " + std::to_string(i) + " has mismatched samples");
    PiecewiseReport rep;
    std::vector<Vec3> all;
    for (const auto& p : f.domain) all.insert(all.end(), p.begin(), p.end());
    PointGrid g(all, mesh_tol);
    bool cover = true;
    for (const auto& x : covering_points) {
        bool near = false;
        g.within(x, mesh_tol, [&](int, double) { near = true; });
        cover = cover && near;
    }
    rep.conditions[0] = cover;
    PointGrid g0(f.domain[0], mesh_tol);
    bool meets = true;
    for (size_t i = 1; i < f.domain.size(); ++i) {
        bool m = false;
        for (const auto& x : f.domain[i]) g0.within(x, mesh_tol, [&](int, double) { m = true; });
        meets = meets && m;
    }
    rep.conditions[1] = meets;
    std::vector<double> dd, di;
    for (size_t i = 1; i < f.domain.size(); ++i) {
        dd.push_back(detail::point_set_diameter(f.domain[i]));
        di.push_back(detail::point_set_diameter(f.image[i]));
    }
    rep.conditions[2] = detail::tail_halves(dd);
    rep.conditions[3] = detail::tail_halves(di);
    bool cont = true;
    for (const auto& im : f.image)
        for (size_t k = 1; k < im.size(); ++k) cont = cont && chordal(im[k - 1], im[k]) <= jump_tol;
    rep.conditions[4] = cont;
    return rep;
}

struct Piece {
    int circle = -1;          // retained circle of the inner curve
    bool trivial = false;     // the outer curve has the same circle, so the piece is just the circle
    std::vector<int> holes;   // retained outer circles inside the disk
    double diameter = 0;
};

struct DecompositionReport {
    bool entwined = false;
    std::vector<Piece> pieces;
    bool disjoint = true;            // no grid point in two pieces
    bool covering = true;            // inner curve inside the outer curve on the grid
    bool single_attachment = true;   // each outer hole inside exactly one inner disk
    bool diameters_decreasing = true;
    int nontrivial = 0;
    std::optional<PiecewiseReport> piecewise;
    bool ok() const { return disjoint && covering && single_attachment && diameters_decreasing; }
};

// Pieces of the outer curve attached along each peripheral circle of the inner one.
inline DecompositionReport verify_decomposition(const SierpinskiApprox& outer, const SierpinskiApprox& inner,
                                                const PiecewiseSamples* candidate = nullptr, double tol = 1e-6,
                                                int grid = 2000) {
    DecompositionReport rep;
    rep.entwined = detail::circle_scan(inner, outer, tol).entwined;
    std::vector<PeripheralCircle> kept_in, kept_out;
    for (int i : inner.retained) kept_in.push_back(inner.circles[i]);
    for (int j : outer.retained) kept_out.push_back(outer.circles[j]);
    double lam_in = 0, lam_out = 0;
    auto prox_in = detail::cap_proxies(kept_in, lam_in), prox_out = detail::cap_proxies(kept_out, lam_out);
    kleinian::ShadowIndex idx_in(prox_in, std::max(lam_in, 1e-12)), idx_out(prox_out, std::max(lam_out, 1e-12));

    std::vector<int> owner(outer.circles.size(), -1);
    for (int i : inner.retained) {
        const auto& g = inner.circles[i];
        Piece pc;
        pc.circle = i;
        pc.diameter = g.diameter;
        idx_out.near(g.p.s, g.max_d, [&](int k) {
            const int j = outer.retained[k];
            const auto& h = kept_out[k];
            bool same = h.gamma.pts.size() == g.gamma.pts.size();
            for (size_t t = 0; same && t < h.gamma.pts.size(); ++t) same = chordal(h.gamma.pts[t], g.gamma.pts[t]) <= tol;
            if (same) {
                pc.trivial = true;
                return;
            }
            // gamma must lie in the outer curve.
            for (size_t t = 0; t < g.gamma.pts.size(); t += std::max<size_t>(1, g.gamma.pts.size() / 64))
                if (inside_disk(h, g.gamma.pts[t]))
                    fail(ErrorKind::Decomposition, "peripheral circle " + std::to_string(i) +
                                                       " of the inner curve is not contained in the outer curve");
            if (inside_disk(g, h.gamma.pts[0])) {
                pc.holes.push_back(j);
                if (owner[j] >= 0) rep.single_attachment = false;
                owner[j] = i;
            }
        });
        std::sort(pc.holes.begin(), pc.holes.end());
        rep.nontrivial += !pc.trivial;
        rep.pieces.push_back(std::move(pc));
    }
    // Grid: the inner curve lies in the outer one, and no point lies in two pieces.
    for (const auto& x : fibonacci_sphere(grid)) {
        bool in_outer = true;
        idx_out.near(x, 0, [&](int k) { in_outer = in_outer && !inside_disk(kept_out[k], x); });
        int disks = 0;
        idx_in.near(x, 0, [&](int k) { disks += inside_disk(kept_in[k], x); });
        if (disks == 0 && !in_outer) rep.covering = false;
        if (disks > 1) rep.disjoint = false;
    }
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& pc : rep.pieces) {
        if (pc.diameter > prev + tol) rep.diameters_decreasing = false;
        prev = std::min(prev, pc.diameter);
    }
    if (candidate) {
        std::vector<Vec3> cover;
        for (const auto& p : candidate->domain) cover.insert(cover.end(), p.begin(), p.end());
        rep.piecewise = check_piecewise(*candidate, cover, tol, 0.25);
    }
    return rep;
}

}  // namespace omega::sierpinski
