#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "omega/sierpinski/follow.hpp"

namespace omega::sierpinski {

using Rational = boost::multiprecision::cpp_rational;

// s, S: quasi-arc constants; delta: per-stage scale ratio; epsilon: initial scale.
struct QuasiArcParams {
    double s = 0.5;
    double S = 8;
    double delta = 1.0 / 50;
    double epsilon = 1;
};

// delta <= min(s / (4 + 2S), 1/10), decided exactly on the binary values.
inline bool params_compatible(const QuasiArcParams& P) {
    Rational s(P.s), S(P.S), d(P.delta);
    Rational bound = s / (Rational(4) + 2 * S);
    if (Rational(1, 10) < bound) bound = Rational(1, 10);
    return d <= bound;
}

inline void validate(const QuasiArcParams& P) {
    if (!(P.s > 0 && P.S > 0 && P.delta > 0 && P.epsilon > 0))
        fail(ErrorKind::Precondition, "quasi-arc parameters must be positive");
    if (!params_compatible(P))
        fail(ErrorKind::Precondition, "delta = " + fmt_double(P.delta) + " exceeds min(s/(4+2S), 1/10) for s = " +
                                          fmt_double(P.s) + ", S = " + fmt_double(P.S));
}

struct CqaViolation {
    int i = 0, j = 0;
    double d = 0;
    double diam = 0;  // a lower bound >= S iota
};

struct CqaReport {
    bool ok = true;
    size_t pairs_checked = 0;
    std::vector<CqaViolation> violations;
};

namespace detail {

// diam(pts[i..j]) >= bound ?  Returns a witness lower bound or -1.
inline double diam_at_least(const std::vector<Vec3>& pts, int i, int j, double bound) {
    double far = 0;
    for (int k = i; k <= j; ++k) far = std::max(far, chordal(pts[i], pts[k]));
    if (far >= bound) return far;
    if (2 * far < bound) return -1;
    for (int a = i; a <= j; ++a)
        for (int b = a + 1; b <= j; ++b) {
            double d = chordal(pts[a], pts[b]);
            if (d >= bound) return d;
        }
    return -1;
}

}  // namespace detail

// Every sample pair with d(x, y) < s iota must have diam(J[x, y]) < S iota.
inline CqaReport check_cqa(const std::vector<Vec3>& pts, double s, double S, double iota,
                           size_t limit = std::numeric_limits<size_t>::max()) {
    CqaReport rep;
    if (pts.size() < 2) return rep;
    const double near = s * iota, big = S * iota;
    auto L = arclength_prefix(pts);
    PointGrid grid(pts, near);
    std::vector<int> js;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        js.clear();
        grid.within(pts[i], near, [&](int j, double d) {
            if (j > i && d < near) js.push_back(j);
        });
        std::sort(js.begin(), js.end());
        rep.pairs_checked += js.size();
        for (int j : js) {
            if (L[j] - L[i] < big) continue;
            double w = detail::diam_at_least(pts, i, j, big);
            if (w < 0) continue;
            rep.ok = false;
            if (rep.violations.size() < limit) rep.violations.push_back({i, j, chordal(pts[i], pts[j]), w});
        }
    }
    return rep;
}

// Shortcuts violating pairs, closest first, then removes self-crossings. The result keeps
// A's endpoints, satisfies the pair condition at (s, S, iota) and iota-follows A.
inline SphericalArc straighten(const SphericalArc& A, double iota, const QuasiArcParams& P, int budget = 10000) {
    validate(P);
    if (!(iota > 0)) fail(ErrorKind::Precondition, "iota must be positive");
    if (A.size() < 2) return A;
    if (check_cqa(A.pts, P.s, P.S, iota, 0).ok && self_crossings(A.pts, false, 1).empty()) return A;

    const double h = iota / 10;
    SphericalArc base{densify(A.pts, h)};
    std::vector<Vec3> pts = base.pts;
    for (int round = 0;; ++round) {
        auto rep = check_cqa(pts, P.s, P.S, iota);
        if (rep.ok) break;
        if (round >= budget)
            fail(ErrorKind::Budget, "straighten did not settle within " + std::to_string(budget) + " rounds; " +
                                        std::to_string(rep.violations.size()) + " violations remain");
        auto& v = rep.violations;
        std::sort(v.begin(), v.end(), [](const CqaViolation& a, const CqaViolation& b) {
            return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
        });
        std::vector<std::pair<int, int>> cuts;
        for (const auto& x : v) {
            bool clash = false;
            for (auto [a, b] : cuts)
                if (!(x.j < a || x.i > b)) clash = true;
            if (!clash) cuts.emplace_back(x.i, x.j);
        }
        std::sort(cuts.begin(), cuts.end());
        std::vector<Vec3> next;
        int at = 0;
        for (auto [a, b] : cuts) {
            next.insert(next.end(), pts.begin() + at, pts.begin() + a);
            auto g = geodesic_samples(pts[a], pts[b], h);
            next.insert(next.end(), g.begin(), g.end() - 1);
            at = b;
        }
        next.insert(next.end(), pts.begin() + at, pts.end());
        pts.swap(next);
    }
    SphericalArc J{remove_loops(pts)};
    if (!check_cqa(J.pts, P.s, P.S, iota, 1).ok) fail(ErrorKind::Construction, "straighten output violates the pair condition");
    auto w = iota_follows(J, base, iota);
    if (!w.ok) fail(ErrorKind::Construction, "straighten output does not iota-follow its input");
    return J;
}

// ---- exact certificates ----

struct RationalCertificate {
    std::string name;
    Rational lhs, rhs;
    bool holds = false;  // lhs <= rhs
};

inline RationalCertificate certify_le(std::string name, const Rational& lhs, const Rational& rhs) {
    return {std::move(name), lhs, rhs, lhs <= rhs};
}

// 5 * sum_{k >= 1} 50^-k, summed in closed form and cross-checked by partial sums.
inline Rational follow_tail_sum() {
    Rational r(1, 50);
    Rational closed = Rational(5) * r / (Rational(1) - r);
    Rational partial = 0, term = r;
    for (int k = 1; k <= 40; ++k, term *= r) partial += 5 * term;
    if (!(partial < closed && closed - partial < term * 10))
        fail(ErrorKind::Construction, "geometric tail does not match its partial sums");
    return closed;
}

inline std::vector<RationalCertificate> circle_certificates(const QuasiArcParams& P = {}) {
    std::vector<RationalCertificate> out;
    out.push_back(certify_le("drift tail 5/49 <= 1/9", follow_tail_sum(), Rational(1, 9)));
    // Stage clearance: (1 - 1/10) >= 3/4, written as 3/4 <= 9/10.
    out.push_back(certify_le("clearance 3/4 <= 1 - 1/10", Rational(3, 4), Rational(1) - Rational(1, 10)));
    // The clearance actually available after the remaining stages: 1 - 5/49.
    out.push_back(certify_le("clearance 3/4 <= 1 - 5/49", Rational(3, 4), Rational(1) - follow_tail_sum()));
    Rational s(P.s), S(P.S);
    Rational bound = s / (Rational(4) + 2 * S);
    if (Rational(1, 10) < bound) bound = Rational(1, 10);
    out.push_back(certify_le("delta <= min(s/(4+2S), 1/10)", Rational(P.delta), bound));
    return out;
}

}  // namespace omega::sierpinski
