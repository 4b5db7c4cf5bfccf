#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../support/synthetic_arcs.hpp"
#include "omega/sierpinski/approx.hpp"

using namespace omega;
using namespace omega::sierpinski;
using kleinian::ParabolicPoint;

namespace {

Vec3 north() { return {0, 0, 1}; }

ParabolicPoint synthetic_point(const Vec3& s, double r) {
    ParabolicPoint q;
    q.s = s.unit();
    q.r = r;
    q.p = kleinian::from_sphere(q.s);
    return q;
}

SphericalArc great_arc(const Vec3& a, const Vec3& b, double h) { return {geodesic_samples(a.unit(), b.unit(), h)}; }

// Every sample of B[x, y] lies within iota of some sample of A[p(x), p(y)], for all x <= y.
bool follow_oracle(const SphericalArc& B, const SphericalArc& A, const std::vector<int>& p, double iota) {
    const int n = static_cast<int>(B.size());
    if (static_cast<int>(p.size()) != n || p.front() != 0 || p.back() != static_cast<int>(A.size()) - 1) return false;
    for (int x = 0; x < n; ++x)
        for (int y = x; y < n; ++y) {
            int lo = std::min(p[x], p[y]), hi = std::max(p[x], p[y]);
            for (int z = x; z <= y; ++z) {
                bool near = false;
                for (int a = lo; a <= hi && !near; ++a) near = chordal(B.pts[z], A.pts[a]) <= iota;
                if (!near) return false;
            }
        }
    return true;
}

// Exhaustive pair scan with exact sample diameters.
bool cqa_oracle(const std::vector<Vec3>& pts, double s, double S, double iota) {
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i) {
        double diam = 0;
        std::vector<Vec3> seg{pts[i]};
        for (int j = i + 1; j < n; ++j) {
            for (const auto& v : seg) diam = std::max(diam, chordal(v, pts[j]));
            seg.push_back(pts[j]);
            if (chordal(pts[i], pts[j]) < s * iota && diam >= S * iota) return false;
        }
    }
    return true;
}

const std::vector<ParabolicPoint>& zi_near_infinity() {
    static const auto pts = kleinian::enumerate_near_infinity(kleinian::psl2_zi(), 8e-6, 0.02 / 4, 3 * 0.02 / 4);
    return pts;
}

ParabolicPoint zi_infinity() {
    for (const auto& q : kleinian::enumerate_parabolics(kleinian::psl2_zi(), 0.9))
        if (q.p.inf) return q;
    throw std::runtime_error("no cusp at infinity");
}

const PeripheralCircle& circle_at_infinity() {
    static const PeripheralCircle C = [] {
        CircleOptions o;
        o.depth = 2;
        o.r_floor = 8e-6;
        return build_peripheral_circle(zi_infinity(), 0.02, zi_near_infinity(), o);
    }();
    return C;
}

}  // namespace

// ---------------- iota_follows ----------------

TEST(IotaFollows, IdentityWitness) {
    auto A = great_arc({1, 0, 0}, {1, 0.05, 0}, 1e-4);
    auto w = iota_follows(A, A, 1e-3);
    ASSERT_TRUE(w.ok);
    for (int k = 0; k < static_cast<int>(A.size()); ++k) EXPECT_EQ(w.map[k], k);
    EXPECT_EQ(w.max_displacement, 0);
}

TEST(IotaFollows, TranslatedArcFails) {
    const double iota = 1e-3;
    auto A = great_arc({1, 0, 0}, {1, 0.05, 0}, iota / 20);
    SphericalArc B = A;
    // Rotate about the y-axis so every sample moves by chordal 2 iota.
    double t = 2 * std::asin(iota);
    for (auto& v : B.pts) v = Vec3{v.x * std::cos(t) - v.z * std::sin(t), v.y, v.x * std::sin(t) + v.z * std::cos(t)};
    auto w = iota_follows(B, A, iota);
    ASSERT_FALSE(w.ok);
    ASSERT_TRUE(w.failure.has_value());
    const auto& off = B.pts[w.failure->offending];
    double best = 1;
    for (const auto& a : A.pts) best = std::min(best, chordal(off, a));
    EXPECT_GT(best, iota);
}

TEST(IotaFollows, CoarseMeshIsResolutionError) {
    auto A = great_arc({1, 0, 0}, {1, 0.05, 0}, 1e-3);
    try {
        iota_follows(A, A, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resolution);
    }
}

TEST(IotaFollows, RandomPerturbationsAgreeWithOracle) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const double iota = 1e-3;
    int accepted = 0, rejected = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto A = great_arc({1, 0, 0}, {1, 0.004, 0.001 * g(rng)}, iota / 12);
        SphericalArc B = A;
        double amp = iota * (trial % 2 ? 0.4 : 1.6);
        for (size_t k = 1; k + 1 < B.size(); ++k) B.pts[k] = (B.pts[k] + Vec3{0, 0, amp * std::sin(0.3 * k)}).unit();
        B.pts = densify(B.pts, iota / 12);
        auto w = iota_follows(B, A, iota);
        if (w.ok) {
            ++accepted;
            EXPECT_TRUE(follow_oracle(B, A, w.map, iota)) << "trial " << trial;
            EXPECT_LE(w.max_displacement, iota);
        } else {
            ++rejected;
            // No sample map can exist when some sample has nothing within iota.
            const auto& off = B.pts[w.failure->offending];
            double best = 1;
            for (const auto& a : A.pts) best = std::min(best, chordal(off, a));
            EXPECT_GT(best, iota) << "trial " << trial;
        }
    }
    EXPECT_GT(accepted, 0);
    EXPECT_GT(rejected, 0);
}

// ---------------- quasi-arc parameters and certificates ----------------

TEST(QuasiArcParams, DefaultsCompatible) {
    QuasiArcParams P;
    EXPECT_TRUE(params_compatible(P));
    QuasiArcParams bad = P;
    bad.delta = 1.0 / 10;
    EXPECT_FALSE(params_compatible(bad));
    EXPECT_THROW(validate(bad), Error);
    // The bound s/(4+2S) = 1/40 is met exactly by delta = 1/40.
    QuasiArcParams edge = P;
    edge.delta = 1.0 / 40;
    EXPECT_FALSE(params_compatible(edge));  // 0.025 in binary is slightly above 1/40
    edge.delta = 0.0249;
    EXPECT_TRUE(params_compatible(edge));
}

TEST(Certificates, TailSumAndClearance) {
    EXPECT_EQ(follow_tail_sum(), Rational(5, 49));
    auto certs = circle_certificates();
    ASSERT_EQ(certs.size(), 4u);
    for (const auto& c : certs) EXPECT_TRUE(c.holds) << c.name;
    EXPECT_EQ(certs[0].lhs, Rational(5, 49));
    EXPECT_EQ(certs[0].rhs, Rational(1, 9));
    EXPECT_EQ(certs[1].rhs, Rational(9, 10));
    // The per-stage drift 5/49 exceeds 1/10.
    EXPECT_GT(Rational(5, 49), Rational(1, 10));
}

// ---------------- straighten ----------------

TEST(Straighten, ShortArcUnchanged) {
    const double iota = 1e-3;
    auto A = great_arc({1, 0, 0}, {1, 0.0004, 0}, iota / 20);  // shorter than s iota
    auto J = straighten(A, iota, {});
    ASSERT_EQ(J.size(), A.size());
    for (size_t k = 0; k < A.size(); ++k) EXPECT_EQ(chordal(J.pts[k], A.pts[k]), 0);
}

TEST(Straighten, BulgeLoopRemoved) {
    std::mt19937_64 rng(11);
    auto S = synth::synthetic_arc(rng, 1e-3, false);
    QuasiArcParams P;
    ASSERT_FALSE(check_cqa(S.arc.pts, P.s, P.S, S.iota).ok);
    auto J = straighten(S.arc, S.iota, P);
    EXPECT_EQ(chordal(J.front(), S.arc.front()), 0);
    EXPECT_EQ(chordal(J.back(), S.arc.back()), 0);
    EXPECT_TRUE(check_cqa(J.pts, P.s, P.S, S.iota).ok);
    EXPECT_TRUE(self_crossings(J.pts, false).empty());
    EXPECT_TRUE(iota_follows(J, SphericalArc{densify(S.arc.pts, S.iota / 10)}, S.iota).ok);
}

TEST(Straighten, CrossingLoopRemoved) {
    std::mt19937_64 rng(12);
    auto S = synth::synthetic_arc(rng, 1e-3, true);
    EXPECT_FALSE(self_crossings(S.arc.pts, false).empty());
    auto J = straighten(S.arc, S.iota, {});
    EXPECT_TRUE(self_crossings(J.pts, false).empty());
    EXPECT_TRUE(check_cqa(J.pts, 0.5, 8, S.iota).ok);
}

TEST(Straighten, PairScanMatchesOracle) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 4; ++t) {
        auto S = synth::synthetic_arc(rng, 1e-3, t % 2);
        auto sub = S.arc.pts;
        sub.resize(std::min<size_t>(sub.size(), 500));
        EXPECT_EQ(check_cqa(sub, 0.5, 8, S.iota).ok, cqa_oracle(sub, 0.5, 8, S.iota)) << t;
        auto J = straighten(S.arc, S.iota, {});
        auto head = J.pts;
        head.resize(std::min<size_t>(head.size(), 500));
        EXPECT_TRUE(cqa_oracle(head, 0.5, 8, S.iota)) << t;
    }
}

TEST(Straighten, Idempotent) {
    std::mt19937_64 rng(14);
    auto S = synth::synthetic_arc(rng, 1e-3, false);
    auto J1 = straighten(S.arc, S.iota, {});
    auto J2 = straighten(J1, S.iota, {});
    ASSERT_EQ(J1.size(), J2.size());
    for (size_t k = 0; k < J1.size(); ++k) EXPECT_LE(chordal(J1.pts[k], J2.pts[k]), 1e-12);
}

TEST(Straighten, BudgetExhausted) {
    std::mt19937_64 rng(15);
    auto S = synth::synthetic_arc(rng, 1e-3, false);
    try {
        straighten(S.arc, S.iota, {}, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Budget);
        EXPECT_NE(std::string(e.what()).find("violations remain"), std::string::npos);
    }
}

TEST(Straighten, CorpusContract) {
    auto corpus = synth::straighten_corpus();
    ASSERT_EQ(corpus.size(), 50u);
    QuasiArcParams P;
    for (size_t i = 0; i < corpus.size(); ++i) {
        const auto& S = corpus[i];
        auto J = straighten(S.arc, S.iota, P);
        EXPECT_TRUE(check_cqa(J.pts, P.s, P.S, S.iota).ok) << i;
        EXPECT_TRUE(iota_follows(J, SphericalArc{densify(S.arc.pts, S.iota / 10)}, S.iota).ok) << i;
    }
}

// ---------------- remove_loops / winding ----------------

TEST(Arc, RemoveLoopsOnFigureEight) {
    // Planar-ish figure eight near the north pole.
    std::vector<Vec3> pts;
    for (int k = 0; k < 400; ++k) {
        double t = 2 * M_PI * (k + 0.3) / 400;
        pts.push_back(synth::tangent_exp(north(), 0.01 * std::sin(t), 0.01 * std::sin(t) * std::cos(t)));
    }
    pts.push_back(pts.front());
    EXPECT_FALSE(self_crossings(pts, true).empty());
    auto out = remove_loops(pts, true);
    EXPECT_TRUE(self_crossings(out, true).empty());
}

TEST(Arc, WindingOfRoundCircle) {
    auto loop = circle_arc(north(), 0.1, 0, 2 * M_PI, 0.005);
    EXPECT_NEAR(std::abs(winding_angle(loop, north(), north())), 2 * M_PI, 1e-9);
    EXPECT_EQ(winding_number(loop, north(), synth::tangent_exp(north(), 0.2, 0)), 0);
}

// ---------------- detour_stage ----------------

namespace {

struct Halves {
    SphericalArc J, Jp;
};

Halves initial_halves(const ParabolicPoint& p, double lambda, int samples = 64) {
    double rho = lambda * p.r / 2, h0 = M_PI * rho / samples;
    Halves H{{circle_arc(p.s, rho, 0, M_PI, h0)}, {circle_arc(p.s, rho, 0, -M_PI, h0)}};
    H.Jp.pts.front() = H.J.pts.front();
    H.Jp.pts.back() = H.J.pts.back();
    return H;
}

}  // namespace

TEST(DetourStage, NoBandUnchanged) {
    auto p = synthetic_point(north(), 1);
    auto H = initial_halves(p, 0.02);
    StageReport rep;
    auto [K, Kp] = detour_stage(H.J, H.Jp, 1, p, 0.02, {}, {}, &rep);
    EXPECT_FALSE(rep.changed);
    EXPECT_EQ(rep.band_size, 0);
    ASSERT_EQ(K.size(), H.J.size());
    for (size_t k = 0; k < K.size(); ++k) EXPECT_EQ(chordal(K.pts[k], H.J.pts[k]), 0);
}

TEST(DetourStage, OneBallRerouted) {
    const double lambda = 0.02;
    auto p = synthetic_point(north(), 1);
    auto H = initial_halves(p, lambda);
    auto [e1, e2] = tangent_basis(north());
    // A stage-1 parabolic sitting on J (angle pi/2), radius in (r_p/2500, r_p/50].
    auto q = synthetic_point(circle_point(north(), e1, e2, lambda / 2, M_PI / 2), 0.01);
    StageReport rep;
    auto [K, Kp] = detour_stage(H.J, H.Jp, 1, p, lambda, {q}, {}, &rep);
    const double iota = stage_scale(1, lambda, 1);
    EXPECT_TRUE(rep.changed);
    ASSERT_EQ(rep.detoured.size(), 1u);
    EXPECT_TRUE(rep.follow.ok && rep.follow_prime.ok);
    EXPECT_TRUE(rep.avoid_ok);
    EXPECT_TRUE(rep.cqa_ok);
    for (const auto& x : K.pts) EXPECT_GE(chordal(x, q.s), iota * (1 - 1e-9));
    // J' is untouched apart from densification.
    EXPECT_EQ(chordal(Kp.front(), K.front()), 0);
    EXPECT_EQ(chordal(Kp.back(), K.back()), 0);
    // Direct neighbourhood scan for the witness over a subsample.
    SphericalArc Jd{densify(H.J.pts, iota / 10)};
    double worst = 0;
    for (size_t k = 0; k < K.size(); k += 7) worst = std::max(worst, chordal(K.pts[k], Jd.pts[rep.follow.map[k]]));
    EXPECT_LE(worst, 5 * iota);
}

TEST(DetourStage, EndpointInBall) {
    const double lambda = 0.02;
    auto p = synthetic_point(north(), 1);
    auto H = initial_halves(p, lambda);
    auto q = synthetic_point(H.J.front(), 0.01);
    StageReport rep;
    auto [K, Kp] = detour_stage(H.J, H.Jp, 1, p, lambda, {q}, {}, &rep);
    EXPECT_TRUE(rep.changed);
    EXPECT_LE(chordal(K.front(), Kp.front()), 1e-12);
    EXPECT_LE(chordal(K.back(), Kp.back()), 1e-12);
    const double iota = stage_scale(1, lambda, 1);
    EXPECT_GE(chordal(K.front(), q.s), iota);
    EXPECT_TRUE(rep.follow.ok && rep.follow_prime.ok && rep.avoid_ok);
}

TEST(DetourStage, OverlappingBallsAreSeparationError) {
    const double lambda = 0.02;
    auto p = synthetic_point(north(), 1);
    auto H = initial_halves(p, lambda);
    auto [e1, e2] = tangent_basis(north());
    const double iota = stage_scale(1, lambda, 1);
    double t = M_PI / 2, dt = 2 * iota / (lambda / 2);  // neighbours 2 iota apart, radius 2 iota each
    auto q1 = synthetic_point(circle_point(north(), e1, e2, lambda / 2, t), 0.01);
    auto q2 = synthetic_point(circle_point(north(), e1, e2, lambda / 2, t + dt), 0.01);
    try {
        detour_stage(H.J, H.Jp, 1, p, lambda, {q1, q2}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Separation);
    }
}

TEST(DetourStage, SharedEndpointsRequired) {
    auto p = synthetic_point(north(), 1);
    auto H = initial_halves(p, 0.02);
    H.Jp.pts.back() = H.Jp.pts[H.Jp.size() - 2];
    EXPECT_THROW(detour_stage(H.J, H.Jp, 1, p, 0.02, {}, {}), Error);
}

// ---------------- build_peripheral_circle ----------------

TEST(PeripheralCircle, IsolatedPointGivesRoundCircle) {
    auto p = synthetic_point(Vec3{0.3, -0.2, 0.9}, 0.5);
    CircleOptions o;
    auto C = build_peripheral_circle(p, 0.1, {}, o);
    EXPECT_TRUE(C.certified());
    EXPECT_EQ(std::abs(C.winding), 1);
    EXPECT_LT(C.drift, 1e-12);
    const double rho = 0.1 * 0.5 / 2;
    for (const auto& x : C.gamma.pts) EXPECT_NEAR(chordal(x, p.s), rho, 1e-12);
    EXPECT_EQ(chordal(C.gamma.pts.front(), C.gamma.pts.back()), 0);
}

TEST(PeripheralCircle, LambdaAboveLambda0Rejected) {
    CircleOptions o;
    o.lambda0 = 0.05;
    try {
        build_peripheral_circle(synthetic_point(north(), 1), 0.1, {}, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    }
}

TEST(PeripheralCircle, ResolutionWarnings) {
    auto w = resolution_warnings(1e-4, 1, 3);
    // Stage 1 radii (1/2500, 1/50] are complete above 1e-4? 1/2500 = 4e-4 > 1e-4, so only stages 2, 3 warn.
    ASSERT_EQ(w.size(), 2u);
    EXPECT_NE(w[0].find("stage 2"), std::string::npos);
    EXPECT_NE(w[1].find("stage 3"), std::string::npos);
    EXPECT_TRUE(resolution_warnings(0, 1, 3).empty());
}

TEST(PeripheralCircle, AvoidanceWitnessReported) {
    // An equal-radius neighbour at the circle: avoidance must fail.
    auto p = synthetic_point(north(), 1);
    auto [e1, e2] = tangent_basis(north());
    auto q = synthetic_point(circle_point(north(), e1, e2, 0.01, 1.0), 0.5);
    auto C = build_peripheral_circle(p, 0.02, {q}, {});
    EXPECT_FALSE(C.avoidance_ok);
    ASSERT_TRUE(C.avoidance_witness.has_value());
    EXPECT_LT(chordal(C.avoidance_witness->s, q.s), 1e-15);
    EXPECT_FALSE(C.certified());
}

TEST(PeripheralCircle, GaussianCuspAtInfinityDepthTwo) {
    const auto& C = circle_at_infinity();
    ASSERT_EQ(C.stages.size(), 2u);
    EXPECT_EQ(C.stages[0].band_size, 0);
    EXPECT_FALSE(C.stages[0].changed);
    EXPECT_TRUE(C.stages[1].changed);
    EXPECT_GT(C.stages[1].detoured.size(), 0u);
    for (const auto& s : C.stages) {
        EXPECT_TRUE(s.follow.ok) << s.n;
        EXPECT_TRUE(s.follow_prime.ok) << s.n;
        EXPECT_TRUE(s.avoid_ok) << s.n;
        EXPECT_TRUE(s.cqa_ok) << s.n;
        EXPECT_NEAR(s.follow.iota, 5 * stage_scale(s.n, 0.02, 1), 1e-18);
    }
    EXPECT_TRUE(C.annulus_ok);
    EXPECT_LT(std::abs(std::abs(C.winding_angle) - 2 * M_PI), 1e-6);
    EXPECT_TRUE(C.avoidance_ok);
    EXPECT_TRUE(C.drift_ok);
    EXPECT_TRUE(C.certified());
    EXPECT_TRUE(C.warnings.empty());
    EXPECT_EQ(C.snapshots.size(), 3u);
}

TEST(PeripheralCircle, AvoidanceAgreesWithAngularScan) {
    const auto& C = circle_at_infinity();
    const auto& pts = zi_near_infinity();
    // Samples sorted by longitude; each ball is checked against the samples in its longitude window.
    std::vector<std::pair<double, int>> lon;
    for (int k = 0; k < static_cast<int>(C.gamma.pts.size()); ++k)
        lon.emplace_back(std::atan2(C.gamma.pts[k].y, C.gamma.pts[k].x), k);
    std::sort(lon.begin(), lon.end());
    const double cut = std::pow(50.0, -3), rho = std::hypot(C.gamma.pts[0].x, C.gamma.pts[0].y);
    double worst = 1e9;
    int checked = 0;
    for (const auto& q : pts) {
        if (!(q.r > cut)) continue;
        const double rad = 0.75 * 0.02 * q.r;
        const double a = std::atan2(q.s.y, q.s.x), w = 4 * rad / rho + 1e-9;
        for (double shift : {-2 * M_PI, 0.0, 2 * M_PI}) {
            auto lo = std::lower_bound(lon.begin(), lon.end(), std::pair{a - w + shift, -1});
            for (auto it = lo; it != lon.end() && it->first <= a + w + shift; ++it)
                worst = std::min(worst, chordal(C.gamma.pts[it->second], q.s) / rad);
        }
        ++checked;
    }
    EXPECT_EQ(checked, C.avoidance_checked);
    EXPECT_GE(worst, 1.0);
}

TEST(EnumerateNearInfinity, MatchesGlobalEnumeration) {
    const double r_lo = 0.005, d_lo = 0.05, d_hi = 0.4;
    auto local = kleinian::enumerate_near_infinity(kleinian::psl2_zi(), r_lo, d_lo, d_hi);
    std::vector<Vec3> global;
    for (const auto& q : kleinian::enumerate_parabolics(kleinian::psl2_zi(), r_lo)) {
        double d = chordal(q.s, north());
        if (q.r >= r_lo && d >= d_lo && d <= d_hi) global.push_back(q.s);
    }
    ASSERT_EQ(local.size(), global.size());
    for (const auto& q : local) {
        bool found = false;
        for (const auto& g : global) found = found || chordal(g, q.s) < 1e-12;
        EXPECT_TRUE(found);
    }
    for (size_t i = 1; i < local.size(); ++i) EXPECT_GE(local[i - 1].r, local[i].r * (1 - 1e-12));
}

// ---------------- build_sierpinski ----------------

namespace {

SierpinskiOptions stratum_options(int depth, double r_floor) {
    SierpinskiOptions o;
    o.circle.depth = depth;
    o.circle.r_floor = r_floor;
    o.grid_samples = 4000;
    return o;
}

const std::vector<ParabolicPoint>& zi_points(double r_min) {
    static std::map<double, std::vector<ParabolicPoint>> cache;
    auto it = cache.find(r_min);
    if (it == cache.end()) it = cache.emplace(r_min, kleinian::enumerate_parabolics(kleinian::psl2_zi(), r_min)).first;
    return it->second;
}

const std::vector<SierpinskiApprox>& zi_strata() {
    static const auto S = [] {
        std::vector<SierpinskiApprox> out;
        for (double lam : {0.02, 0.004, 0.0008})
            out.push_back(build_sierpinski(lam, zi_points(0.05), stratum_options(1, 0.05), "psl2_zi"));
        return out;
    }();
    return S;
}

}  // namespace

TEST(BuildSierpinski, SingleParabolic) {
    auto p = synthetic_point(Vec3{0.1, 0.2, 0.97}, 1);
    auto S = build_sierpinski(0.1, {p}, stratum_options(1, 0));
    ASSERT_EQ(S.circles.size(), 1u);
    EXPECT_EQ(S.retained, std::vector<int>{0});
    EXPECT_TRUE(S.nested.empty());
    ASSERT_TRUE(S.containment.has_value());
    EXPECT_TRUE(S.containment->ok());
    EXPECT_TRUE(inside_disk(S.circles[0], p.s));
    EXPECT_FALSE(inside_disk(S.circles[0], Vec3{0, 0, -1}));
}

TEST(BuildSierpinski, NestedDiskDiscarded) {
    auto big = synthetic_point(north(), 1);
    auto small = synthetic_point(synth::tangent_exp(north(), 0.001, 0), 0.001);
    auto S = build_sierpinski(0.02, {big, small}, stratum_options(1, 0));
    EXPECT_EQ(S.retained, std::vector<int>{0});
    ASSERT_EQ(S.nested.size(), 1u);
    EXPECT_EQ(S.nested[0], std::make_pair(0, 1));
}

TEST(BuildSierpinski, IntersectingCirclesAreConstructionError) {
    auto a = synthetic_point(north(), 1);
    auto b = synthetic_point(synth::tangent_exp(north(), 0.01, 0), 1);
    try {
        build_sierpinski(0.02, {a, b}, stratum_options(0, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Construction);
        EXPECT_NE(std::string(e.what()).find("0 and 1"), std::string::npos);
    }
}

TEST(BuildSierpinski, GaussianStrata) {
    const auto& S = zi_strata();
    for (const auto& s : S) {
        EXPECT_EQ(s.circles.size(), zi_points(0.05).size());
        EXPECT_EQ(s.retained.size(), s.circles.size());
        EXPECT_TRUE(s.diameters_decreasing) << s.lambda;
        ASSERT_TRUE(s.containment.has_value());
        EXPECT_TRUE(s.containment->ok()) << s.lambda;
        for (const auto& c : s.circles) EXPECT_TRUE(c.certified()) << s.lambda << " " << c.id;
    }
}

TEST(BuildSierpinski, ShrinkingLambdaShrinksDisks) {
    const auto& S = zi_strata();
    // Every circle at lambda/5 lies in the disk of the same p at lambda.
    for (size_t i = 0; i < S[0].circles.size(); ++i)
        for (size_t k = 0; k < S[1].circles[i].gamma.pts.size(); k += 5)
            EXPECT_TRUE(inside_disk(S[0].circles[i], S[1].circles[i].gamma.pts[k])) << i;
}

TEST(BuildSierpinski, DeterministicAcrossThreadCounts) {
    auto o1 = stratum_options(1, 0.05), o4 = o1;
    o1.threads = 1;
    o4.threads = 4;
    auto A = build_sierpinski(0.02, zi_points(0.1), o1), B = build_sierpinski(0.02, zi_points(0.1), o4);
    ASSERT_EQ(A.circles.size(), B.circles.size());
    for (size_t i = 0; i < A.circles.size(); ++i) {
        ASSERT_EQ(A.circles[i].gamma.pts.size(), B.circles[i].gamma.pts.size());
        for (size_t k = 0; k < A.circles[i].gamma.pts.size(); ++k)
            EXPECT_EQ(chordal(A.circles[i].gamma.pts[k], B.circles[i].gamma.pts[k]), 0);
    }
}

// ---------------- check_entwined ----------------

TEST(CheckEntwined, ScheduleErrors) {
    const auto& S = zi_strata();
    for (const auto* second : {&S[0]}) {
        try {
            check_entwined(S[0], *second);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Schedule);
        }
    }
    SierpinskiApprox half = S[1];
    half.lambda = S[0].lambda / 2;
    EXPECT_THROW(check_entwined(S[0], half), Error);
}

TEST(CheckEntwined, GaussianStrataPairwise) {
    const auto& S = zi_strata();
    for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
        auto rep = check_entwined(S[a], S[b]);
        EXPECT_TRUE(rep.entwined) << a << b;
        EXPECT_GT(rep.pairs_checked, 0);
        EXPECT_GT(rep.closest, 1e-6);
    }
}

TEST(CheckEntwined, IntersectionReportedWithClosestPair) {
    // S2 has a circle crossing one of S1's: not entwined, witness is that pair.
    auto a = synthetic_point(north(), 1);
    auto S1 = build_sierpinski(0.04, {a}, stratum_options(0, 0));
    auto b = synthetic_point(synth::tangent_exp(north(), 0.02, 0), 1);
    auto S2 = build_sierpinski(0.01, {b}, stratum_options(0, 0));
    auto rep = check_entwined(S1, S2);
    EXPECT_FALSE(rep.entwined);
    EXPECT_EQ(rep.circle1, 0);
    EXPECT_EQ(rep.circle2, 0);
    EXPECT_LE(rep.closest, 1e-6);
}

// ---------------- verify_decomposition ----------------

TEST(VerifyDecomposition, OneExtraDisk) {
    auto a = synthetic_point(north(), 1);
    auto b = synthetic_point(Vec3{0, 0, -1}, 1);
    auto outer = build_sierpinski(0.05, {a}, stratum_options(0, 0));
    auto inner = build_sierpinski(0.05, {a, b}, stratum_options(0, 0));
    auto rep = verify_decomposition(outer, inner);
    ASSERT_EQ(rep.pieces.size(), 2u);
    EXPECT_EQ(rep.nontrivial, 1);
    EXPECT_TRUE(rep.pieces[0].trivial);
    EXPECT_FALSE(rep.pieces[1].trivial);
    EXPECT_FALSE(rep.entwined);  // same lambda: the shared circle meets itself
    EXPECT_TRUE(rep.disjoint && rep.covering && rep.single_attachment);
}

TEST(VerifyDecomposition, GaussianStrata) {
    const auto& S = zi_strata();
    auto rep = verify_decomposition(S[1], S[0]);
    EXPECT_TRUE(rep.entwined);
    EXPECT_EQ(rep.pieces.size(), S[0].retained.size());
    EXPECT_TRUE(rep.ok());
    EXPECT_TRUE(rep.diameters_decreasing);
    for (const auto& pc : rep.pieces) EXPECT_EQ(pc.holes.size(), 1u);
}

TEST(VerifyDecomposition, UnmatchedCircleIsDecompositionError) {
    auto a = synthetic_point(north(), 1);
    auto outer = build_sierpinski(0.02, {a}, stratum_options(0, 0));
    auto b = synthetic_point(synth::tangent_exp(north(), 0.001, 0), 0.01);
    auto inner = build_sierpinski(0.02, {b}, stratum_options(0, 0));
    try {
        verify_decomposition(outer, inner);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Decomposition);
        EXPECT_NE(std::string(e.what()).find("circle 0"), std::string::npos);
    }
}

TEST(VerifyDecomposition, PiecewiseConditionFourFails) {
    // Domain pieces shrink geometrically; image pieces stay the same size.
    PiecewiseSamples f;
    std::vector<Vec3> c0;
    for (int k = 0; k <= 200; ++k) c0.push_back(synth::tangent_exp(north(), -0.1 + 0.001 * k, 0));
    f.domain.push_back(c0);
    f.image.push_back(c0);
    for (int i = 1; i <= 8; ++i) {
        double size = 0.05 * std::pow(0.5, i), u = -0.1 + 0.02 * i;
        std::vector<Vec3> dom, img;
        for (int k = 0; k <= 20; ++k) {
            dom.push_back(synth::tangent_exp(north(), u, size * k / 20));
            img.push_back(synth::tangent_exp(north(), u, 0.01 * k / 20));
        }
        f.domain.push_back(dom);
        f.image.push_back(img);
    }
    auto rep = check_piecewise(f, c0, 0.002, 0.01);
    EXPECT_EQ(rep.failing(), std::vector<int>{4});
}
