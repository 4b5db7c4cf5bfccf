#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "omega/core/format.hpp"
#include "omega/sierpinski/arc.hpp"

namespace omega::sierpinski {

// Sphere samples bucketed in 3D cells; radius queries up to `cell` touch 27 buckets.
class PointGrid {
public:
    PointGrid(const std::vector<Vec3>& pts, double cell) : pts_(&pts), cell_(cell) {
        if (!(cell > 0)) fail(ErrorKind::Precondition, "grid cell must be positive");
        grid_.reserve(pts.size() / 4 + 1);
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) grid_[key(pts[i])].push_back(i);
    }
    // Calls f(i, d) for every sample with d = chordal(x, pts[i]) <= radius.
    template <class F>
    void within(const Vec3& x, double radius, F&& f) const {
        auto span = static_cast<std::int64_t>(std::ceil(radius / cell_));
        auto k = key(x);
        for (auto dx = -span; dx <= span; ++dx)
            for (auto dy = -span; dy <= span; ++dy)
                for (auto dz = -span; dz <= span; ++dz) {
                    auto it = grid_.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid_.end()) continue;
                    for (int i : it->second) {
                        double d = chordal(x, (*pts_)[i]);
                        if (d <= radius) f(i, d);
                    }
                }
    }

private:
    struct Key {
        std::int64_t x, y, z;
        bool operator==(const Key& o) const { return x == o.x && y == o.y && z == o.z; }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return std::hash<std::int64_t>()(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
        }
    };
    Key key(const Vec3& v) const {
        return {static_cast<std::int64_t>(std::floor(v.x / cell_)), static_cast<std::int64_t>(std::floor(v.y / cell_)),
                static_cast<std::int64_t>(std::floor(v.z / cell_))};
    }
    const std::vector<Vec3>* pts_;
    double cell_;
    std::unordered_map<Key, std::vector<int>, KeyHash> grid_;
};

struct FollowFailure {
    int x = 0, y = 0;    // B-samples whose segment B[x, y] cannot be matched
    int offending = 0;   // the B-sample left without an admissible image
};

struct FollowWitness {
    bool ok = false;
    double iota = 0;
    std::vector<int> map;  // B-sample -> A-sample, nondecreasing, endpoints to endpoints
    double max_displacement = 0;
    std::optional<FollowFailure> failure;
};

inline void require_follow_mesh(const std::vector<Vec3>& pts, double iota, const char* which) {
    double m = mesh(pts);
    if (m > iota / 10 * (1 + 1e-9))
        fail(ErrorKind::Resolution, std::string(which) + " arc mesh " + fmt_double(m) + " exceeds iota/10 = " + fmt_double(iota / 10));
}

// A nondecreasing endpoint-respecting sample map with displacement at most iota. With a
// monotone map every B[x, y] lies in the iota-neighbourhood of A[p(x), p(y)], since each
// sample z between x and y has p(z) in [p(x), p(y)].
inline FollowWitness iota_follows(const SphericalArc& B, const SphericalArc& A, double iota) {
    if (!(iota > 0)) fail(ErrorKind::Precondition, "iota must be positive");
    if (A.pts.empty() || B.pts.empty()) fail(ErrorKind::Precondition, "arcs must be nonempty");
    require_follow_mesh(A.pts, iota, "leading");
    require_follow_mesh(B.pts, iota, "following");
    FollowWitness w;
    w.iota = iota;
    const int n = static_cast<int>(B.size()), m = static_cast<int>(A.size());
    auto fail_at = [&](int x, int y, int off) {
        w.ok = false;
        w.failure = FollowFailure{x, y, off};
        w.map.clear();
        return w;
    };
    if (chordal(B.front(), A.front()) > iota) return fail_at(0, 0, 0);
    if (chordal(B.back(), A.back()) > iota) return fail_at(n - 1, n - 1, n - 1);
    PointGrid grid(A.pts, iota);

    // Backward pass: U[k] = largest admissible image not exceeding U[k+1].
    std::vector<int> U(n);
    U[n - 1] = m - 1;
    for (int k = n - 2; k >= 0; --k) {
        int best = -1;
        grid.within(B.pts[k], iota, [&](int a, double) {
            if (a <= U[k + 1] && a > best) best = a;
        });
        if (k == 0) best = (best >= 0) ? 0 : -1;
        if (best < 0) return fail_at(k, k + 1, k);
        U[k] = best;
    }
    // Forward pass: nearest admissible image inside [previous, U[k]].
    w.map.assign(n, 0);
    w.map[n - 1] = m - 1;
    for (int k = 1; k < n - 1; ++k) {
        int lo = w.map[k - 1], best = -1;
        double bd = 0;
        grid.within(B.pts[k], iota, [&](int a, double d) {
            if (a < lo || a > U[k]) return;
            if (best < 0 || d < bd || (d == bd && a < best)) best = a, bd = d;
        });
        if (best < 0) return fail_at(k - 1, k, k);
        w.map[k] = best;
    }
    if (n > 1 && w.map[n - 2] > m - 1) return fail_at(n - 2, n - 1, n - 1);
    for (int k = 0; k < n; ++k) w.max_displacement = std::max(w.max_displacement, chordal(B.pts[k], A.pts[w.map[k]]));
    w.ok = true;
    return w;
}

}  // namespace omega::sierpinski
