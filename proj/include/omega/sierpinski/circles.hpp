#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "omega/kleinian/parabolics.hpp"
#include "omega/sierpinski/straighten.hpp"

namespace omega::sierpinski {

using kleinian::ParabolicPoint;

struct CircleOptions {
    int depth = 3;
    double lambda0 = 0;  // separation constant; 0 skips the check
    double r_floor = 0;  // the supplied parabolics are complete for r >= r_floor
    QuasiArcParams params;
    int initial_samples = 64;  // per half circle
    double tol = 1e-6;
    int snapshot_points = 256;
};

inline double stage_scale(int n, double lambda, double r_p) { return std::pow(50.0, -n) * lambda * r_p; }

struct StageReport {
    int n = 0;
    double iota = 0;       // 50^-n lambda r_p; detour balls have radius 2 iota
    int band_size = 0;     // stage-n parabolics near the arcs
    std::vector<int> detoured;  // candidate indices whose detour ball met the arcs
    bool changed = false;
    FollowWitness follow, follow_prime;  // at 5 iota; identity when unchanged
    double min_clearance = std::numeric_limits<double>::infinity();  // min d(arcs, p') / iota over the band
    bool avoid_ok = true;
    bool cqa_ok = true;
    size_t samples = 0;
};

// Samples at chordal distance < rho from x.
namespace detail {

class MultiGrid {
public:
    explicit MultiGrid(const std::vector<Vec3>& pts) : pts_(&pts) {}
    template <class F>
    void within(const Vec3& x, double radius, F&& f) {
        int t = static_cast<int>(std::ceil(std::log2(std::max(radius, 1e-300))));
        auto& g = grids_[t];
        if (!g) g = std::make_unique<PointGrid>(*pts_, std::ldexp(1.0, t));
        g->within(x, radius, f);
    }

private:
    const std::vector<Vec3>* pts_;
    std::map<int, std::unique_ptr<PointGrid>> grids_;
};

// Point where the geodesic a -> b crosses the sphere d(., q) = R, a inside, b outside (or reverse).
inline Vec3 boundary_crossing(const Vec3& a, const Vec3& b, const Vec3& q, double R) {
    bool a_in = chordal(a, q) < R;
    double lo = 0, hi = 1;
    for (int it = 0; it < 80; ++it) {
        double mid = (lo + hi) / 2;
        bool in = chordal(slerp(a, b, mid), q) < R;
        (in == a_in ? lo : hi) = mid;
    }
    return slerp(a, b, hi);
}

// Shorter arc of the circle d(., q) = R from x to y; ties go the positive way.
inline std::vector<Vec3> boundary_arc(const Vec3& q, double R, const Vec3& x, const Vec3& y, double h) {
    auto [e1, e2] = tangent_basis(q);
    double tx = frame_angle(x, e1, e2), ty = frame_angle(y, e1, e2);
    double dt = std::remainder(ty - tx, 2 * M_PI);
    if (dt == -M_PI) dt = M_PI;
    auto arc = circle_arc(q, R, tx, dt, h);
    arc.front() = x;
    arc.back() = y;
    return arc;
}

struct Run {
    int ball, first, last;
};

inline std::vector<Run> runs_inside(const std::vector<int>& label) {
    std::vector<Run> out;
    for (int i = 0; i < static_cast<int>(label.size());) {
        if (label[i] < 0) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < static_cast<int>(label.size()) && label[j + 1] == label[i]) ++j;
        out.push_back({label[i], i, j});
        i = j + 1;
    }
    return out;
}

}  // namespace detail

// One detour step at stage n around the peripheral point p. Candidates are other
// parabolics; those in the stage-n band whose ball B(p', 2 iota) meets J or J' are detoured
// around, then both arcs are straightened at iota.
inline std::pair<SphericalArc, SphericalArc> detour_stage(const SphericalArc& J, const SphericalArc& Jp, int n,
                                                          const ParabolicPoint& p, double lambda,
                                                          const std::vector<ParabolicPoint>& candidates,
                                                          const CircleOptions& opt, StageReport* report = nullptr) {
    if (chordal(J.front(), Jp.front()) != 0 || chordal(J.back(), Jp.back()) != 0)
        fail(ErrorKind::Precondition, "J and J' must share endpoints");
    StageReport rep;
    rep.n = n;
    const double iota = stage_scale(n, lambda, p.r), R = 2 * iota;
    rep.iota = iota;
    const double r_hi = std::pow(50.0, -n) * p.r, r_lo = std::pow(50.0, -n - 1) * p.r;

    double dmin = 2, dmax = 0, mesh_now = std::max(mesh(J.pts), mesh(Jp.pts));
    for (const auto* A : {&J, &Jp})
        for (const auto& x : A->pts) {
            double d = chordal(x, p.s);
            dmin = std::min(dmin, d), dmax = std::max(dmax, d);
        }
    std::vector<int> band;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
        const auto& q = candidates[i];
        if (!(q.r > r_lo && q.r <= r_hi)) continue;
        double d = chordal(q.s, p.s);
        if (d < dmin - R - mesh_now || d > dmax + R + mesh_now) continue;
        band.push_back(i);
    }
    rep.band_size = static_cast<int>(band.size());
    auto identity = [&]() {
        FollowWitness w;
        w.ok = true;
        w.iota = 5 * iota;
        return w;
    };
    auto finish_unchanged = [&]() {
        rep.follow = identity();
        rep.follow_prime = identity();
        rep.samples = J.size() + Jp.size();
        if (report) *report = rep;
        return std::pair{J, Jp};
    };
    if (band.empty()) return finish_unchanged();

    const double h = iota / 10;
    SphericalArc Jd{densify(J.pts, h)}, Jpd{densify(Jp.pts, h)};

    // Balls met by the sampled arcs.
    std::vector<int> hit;
    {
        std::vector<Vec3> both = Jd.pts;
        both.insert(both.end(), Jpd.pts.begin(), Jpd.pts.end());
        PointGrid g(both, R);
        for (int i : band) {
            bool meets = false;
            g.within(candidates[i].s, R, [&](int, double d) { meets = meets || d < R; });
            if (meets) hit.push_back(i);
        }
    }
    if (hit.empty()) {
        // Nothing to detour; only the clearance needs recording.
        for (int i : band)
            for (const auto* A : {&J, &Jp})
                for (const auto& x : A->pts) rep.min_clearance = std::min(rep.min_clearance, chordal(x, candidates[i].s) / iota);
        rep.avoid_ok = rep.min_clearance >= 1;
        auto out = finish_unchanged();
        if (report) report->min_clearance = rep.min_clearance, report->avoid_ok = rep.avoid_ok;
        return out;
    }
    for (size_t a = 0; a < hit.size(); ++a)
        for (size_t b = a + 1; b < hit.size(); ++b) {
            const auto &x = candidates[hit[a]], &y = candidates[hit[b]];
            if (kleinian::open_balls_meet(x.s, R, y.s, R))
                fail(ErrorKind::Separation, "stage " + std::to_string(n) + " detour balls overlap: candidates " +
                                                std::to_string(hit[a]) + " and " + std::to_string(hit[b]) +
                                                " at distance " + fmt_double(chordal(x.s, y.s)) + " with radius " +
                                                fmt_double(R) + " (lambda above the separation range)");
        }
    rep.detoured = hit;

    auto labels = [&](const std::vector<Vec3>& pts) {
        std::vector<int> lab(pts.size(), -1);
        PointGrid g(pts, R);
        for (int i : hit)
            g.within(candidates[i].s, R, [&](int k, double d) {
                if (d < R) lab[k] = i;
            });
        return lab;
    };
    auto lab = labels(Jd.pts), labp = labels(Jpd.pts);
    auto runs = detail::runs_inside(lab), runsp = detail::runs_inside(labp);
    const int nJ = static_cast<int>(Jd.size()), nJp = static_cast<int>(Jpd.size());

    auto exit_point = [&](const std::vector<Vec3>& pts, const detail::Run& r) {
        return detail::boundary_crossing(pts[r.last], pts[r.last + 1], candidates[r.ball].s, R);
    };
    auto entry_point = [&](const std::vector<Vec3>& pts, const detail::Run& r) {
        return detail::boundary_crossing(pts[r.first - 1], pts[r.first], candidates[r.ball].s, R);
    };
    // Shared endpoints: J's crossing point becomes the common endpoint.
    std::optional<Vec3> new_start, new_end;
    if (!runs.empty() && runs.front().first == 0) new_start = exit_point(Jd.pts, runs.front());
    if (!runs.empty() && runs.back().last == nJ - 1) new_end = entry_point(Jd.pts, runs.back());

    auto rebuild = [&](const std::vector<Vec3>& pts, const std::vector<detail::Run>& rs, bool primary) {
        std::vector<Vec3> out;
        int at = 0;
        const int N = static_cast<int>(pts.size());
        for (const auto& r : rs) {
            const Vec3& q = candidates[r.ball].s;
            if (r.first == 0) {
                Vec3 x = exit_point(pts, r);
                if (primary) {
                    out.push_back(x);
                } else {
                    auto arc = detail::boundary_arc(q, R, *new_start, x, h);
                    out.insert(out.end(), arc.begin(), arc.end());
                }
                at = r.last + 1;
                continue;
            }
            out.insert(out.end(), pts.begin() + at, pts.begin() + r.first);
            Vec3 e = entry_point(pts, r);
            if (r.last == N - 1) {
                if (primary) {
                    out.push_back(e);
                } else {
                    auto arc = detail::boundary_arc(q, R, e, *new_end, h);
                    out.insert(out.end(), arc.begin(), arc.end());
                }
                at = N;
                continue;
            }
            Vec3 f = exit_point(pts, r);
            auto arc = detail::boundary_arc(q, R, e, f, h);
            out.insert(out.end(), arc.begin(), arc.end());
            at = r.last + 1;
        }
        out.insert(out.end(), pts.begin() + at, pts.end());
        return out;
    };
    if (!runsp.empty() && runsp.front().first == 0 && !new_start)
        fail(ErrorKind::Construction, "shared start point inside a detour ball for J' only");
    if (!runsp.empty() && runsp.back().last == nJp - 1 && !new_end)
        fail(ErrorKind::Construction, "shared end point inside a detour ball for J' only");
    auto K = rebuild(Jd.pts, runs, true), Kp = rebuild(Jpd.pts, runsp, false);
    K = densify(remove_loops(K), h);
    Kp = densify(remove_loops(Kp), h);

    SphericalArc out1 = straighten(SphericalArc{K}, iota, opt.params);
    SphericalArc out2 = straighten(SphericalArc{Kp}, iota, opt.params);
    rep.changed = true;
    rep.follow = iota_follows(out1, Jd, 5 * iota);
    rep.follow_prime = iota_follows(out2, Jpd, 5 * iota);
    rep.cqa_ok = check_cqa(out1.pts, opt.params.s, opt.params.S, iota, 1).ok &&
                 check_cqa(out2.pts, opt.params.s, opt.params.S, iota, 1).ok;
    for (const auto* A : {&out1, &out2}) {
        PointGrid g(A->pts, iota);
        for (int i : band) {
            double best = std::numeric_limits<double>::infinity();
            g.within(candidates[i].s, iota, [&](int, double d) { best = std::min(best, d); });
            rep.min_clearance = std::min(rep.min_clearance, best / iota);
        }
    }
    rep.avoid_ok = rep.min_clearance >= 1;
    rep.samples = out1.size() + out2.size();
    if (report) *report = std::move(rep);
    return {std::move(out1), std::move(out2)};
}

struct PeripheralCircle {
    int id = -1;  // index in the parabolic list, -1 if external
    ParabolicPoint p;
    double lambda = 0;
    int depth = 0;
    SphericalCircle gamma;
    std::vector<StageReport> stages;
    std::vector<std::vector<Vec3>> snapshots;  // loop after stage k = 0..depth, downsampled

    double min_d = 0, max_d = 0;  // range of d(x, p) over gamma
    bool annulus_ok = false;
    double winding_angle = 0;
    int winding = 0;
    bool winding_ok = false;
    bool avoidance_ok = false;
    int avoidance_checked = 0;
    std::optional<ParabolicPoint> avoidance_witness;  // a parabolic whose ball gamma meets
    double drift = 0;
    bool drift_ok = false;
    double diameter = 0;  // over up to 512 evenly spaced samples
    std::vector<std::string> warnings;

    bool stages_ok() const {
        for (const auto& s : stages)
            if (!(s.follow.ok && s.avoid_ok && s.cqa_ok)) return false;
        return true;
    }
    bool certified() const { return annulus_ok && winding_ok && avoidance_ok && drift_ok && stages_ok(); }
};

namespace detail {

inline std::vector<Vec3> downsample(const std::vector<Vec3>& pts, int k) {
    if (static_cast<int>(pts.size()) <= k || k < 2) return pts;
    std::vector<Vec3> out;
    for (int i = 0; i < k; ++i) out.push_back(pts[static_cast<size_t>(double(i) * double(pts.size() - 1) / double(k - 1))]);
    return out;
}

inline std::vector<Vec3> join_loop(const SphericalArc& J, const SphericalArc& Jp) {
    std::vector<Vec3> loop = J.pts;
    for (int i = static_cast<int>(Jp.size()) - 2; i >= 0; --i) loop.push_back(Jp.pts[i]);
    return loop;
}

}  // namespace detail

// Distance from x to the round circle of chordal radius rho about p.
inline double distance_to_round_circle(const Vec3& x, const Vec3& p, double rho) {
    double ax = kleinian::angle_between(x, p), a = kleinian::cap_angle(rho);
    return 2 * std::sin(std::abs(ax - a) / 2);
}

inline std::vector<std::string> resolution_warnings(double r_floor, double r_p, int depth) {
    std::vector<std::string> w;
    for (int n = 1; n <= depth; ++n) {
        double lo = std::pow(50.0, -n - 1) * r_p, hi = std::pow(50.0, -n) * r_p;
        if (r_floor > lo)
            w.push_back("incomplete avoidance: stage " + std::to_string(n) + " radii (" + fmt_double(lo) + ", " +
                        fmt_double(hi) + "] enumerated only down to " + fmt_double(r_floor));
    }
    return w;
}

// Peripheral circle about p: round circle of radius lambda r_p / 2, detoured stage by stage.
inline PeripheralCircle build_peripheral_circle(const ParabolicPoint& p, double lambda,
                                               const std::vector<ParabolicPoint>& parabolics,
                                               const CircleOptions& opt = {}, int id = -1) {
    if (!(lambda > 0 && lambda <= 1)) fail(ErrorKind::Precondition, "lambda must lie in (0, 1]");
    if (opt.lambda0 > 0 && lambda > opt.lambda0)
        fail(ErrorKind::Precondition, "lambda = " + fmt_double(lambda) + " exceeds lambda0 = " + fmt_double(opt.lambda0));
    if (opt.depth < 0) fail(ErrorKind::Precondition, "depth must be nonnegative");
    validate(opt.params);

    PeripheralCircle C;
    C.id = id;
    C.p = p;
    C.lambda = lambda;
    C.depth = opt.depth;
    C.warnings = resolution_warnings(opt.r_floor, p.r, opt.depth);

    // Parabolics other than p that any stage or the avoidance check can see.
    const double reach = lambda * p.r;
    std::vector<ParabolicPoint> near;
    for (const auto& q : parabolics) {
        if (chordal(q.s, p.s) < 1e-12 || q.r > p.r) continue;
        if (chordal(q.s, p.s) < reach + 3 * lambda * q.r / 4) near.push_back(q);
    }

    const double rho = lambda * p.r / 2;
    const double h0 = M_PI * rho / opt.initial_samples;
    SphericalArc J{circle_arc(p.s, rho, 0, M_PI, h0)}, Jp{circle_arc(p.s, rho, 0, -M_PI, h0)};
    Jp.pts.front() = J.pts.front();
    Jp.pts.back() = J.pts.back();
    C.snapshots.push_back(detail::downsample(detail::join_loop(J, Jp), opt.snapshot_points));
    for (int n = 1; n <= opt.depth; ++n) {
        StageReport rep;
        std::tie(J, Jp) = detour_stage(J, Jp, n, p, lambda, near, opt, &rep);
        C.stages.push_back(std::move(rep));
        C.snapshots.push_back(detail::downsample(detail::join_loop(J, Jp), opt.snapshot_points));
    }
    C.gamma.p = p.s;
    C.gamma.pts = remove_loops(detail::join_loop(J, Jp), true);

    // Certificates.
    C.min_d = 2, C.max_d = 0;
    for (const auto& x : C.gamma.pts) {
        double d = chordal(x, p.s);
        C.min_d = std::min(C.min_d, d), C.max_d = std::max(C.max_d, d);
        C.drift = std::max(C.drift, distance_to_round_circle(x, p.s, rho));
    }
    {
        auto ds = detail::downsample(C.gamma.pts, 512);
        for (size_t a = 0; a < ds.size(); ++a)
            for (size_t b = a + 1; b < ds.size(); ++b) C.diameter = std::max(C.diameter, chordal(ds[a], ds[b]));
    }
    C.annulus_ok = C.min_d > lambda * p.r / 4 && C.max_d < 3 * lambda * p.r / 4;
    C.drift_ok = C.drift <= lambda * p.r / 9;
    C.winding_angle = winding_angle(C.gamma.pts, p.s, p.s);
    C.winding = static_cast<int>(std::lround(C.winding_angle / (2 * M_PI)));
    C.winding_ok = std::abs(std::abs(C.winding_angle) - 2 * M_PI) < 1e-6;

    const double r_cut = std::pow(50.0, -opt.depth - 1) * p.r;
    detail::MultiGrid mg(C.gamma.pts);
    C.avoidance_ok = true;
    for (int i = 0; i < static_cast<int>(near.size()); ++i) {
        const auto& q = near[i];
        if (!(q.r > r_cut)) continue;
        ++C.avoidance_checked;
        double rad = 3 * lambda * q.r / 4;
        bool meets = false;
        if (rad > reach / 10) {
            for (const auto& x : C.gamma.pts) meets = meets || chordal(x, q.s) < rad;
        } else {
            mg.within(q.s, rad, [&](int, double d) { meets = meets || d < rad; });
        }
        if (meets && C.avoidance_ok) {
            C.avoidance_ok = false;
            C.avoidance_witness = q;
        }
    }
    return C;
}

// Is x in the open disk bounded by the circle that contains p?
inline bool inside_disk(const PeripheralCircle& C, const Vec3& x) {
    double d = chordal(x, C.p.s);
    if (d < C.min_d) return true;
    if (d > C.max_d) return false;
    return winding_number(C.gamma.pts, C.p.s, x) != 0;
}

}  // namespace omega::sierpinski
