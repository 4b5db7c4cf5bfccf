#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_map>

#include "omega/bass_serre/group.hpp"
#include "omega/core/format.hpp"

namespace omega::bass_serre {

inline constexpr int kMaxBallRadius = 14;

struct CayleyBall {
    int radius = 0;
    std::vector<Word> elements;  // normal forms in BFS order
    std::vector<int> dist;
    std::vector<int> parent;     // BFS tree; -1 at the identity
    std::vector<char> parent_letter;
    std::vector<std::pair<int, int>> edges;  // generator edges inside the ball, u < v
    std::vector<int> tree_point;             // id of the edge coset gC, a point of T
    std::vector<Word> tree_points;           // coset keys by id
    std::unordered_map<Word, int> index;

    int find(const Word& normal_form) const {
        auto it = index.find(normal_form);
        return it == index.end() ? -1 : it->second;
    }
    // Geodesic word to element i along the BFS tree.
    Word geodesic_word(int i) const {
        Word w;
        for (; parent[i] >= 0; i = parent[i]) w.push_back(parent_letter[i]);
        return {w.rbegin(), w.rend()};
    }
    std::vector<size_t> sphere_sizes() const {
        std::vector<size_t> s(radius + 1, 0);
        for (int d : dist) ++s[d];
        return s;
    }
};

inline CayleyBall bfs_ball(const Amalgam& G, int R, size_t max_elements = 4'000'000) {
    if (R < 0) fail(ErrorKind::Precondition, "radius must be nonnegative");
    if (R > kMaxBallRadius)
        fail(ErrorKind::Size, "radius " + std::to_string(R) + " exceeds the budget guard " + std::to_string(kMaxBallRadius));
    CayleyBall B;
    B.radius = R;
    auto add = [&](Word w, int d, int par, char x) {
        B.index.emplace(w, static_cast<int>(B.elements.size()));
        B.elements.push_back(std::move(w));
        B.dist.push_back(d);
        B.parent.push_back(par);
        B.parent_letter.push_back(x);
    };
    add("", 0, -1, 0);
    size_t begin = 0, prev_layer = 0;
    for (int d = 1; d <= R; ++d) {
        size_t end = B.elements.size(), layer = end - begin;
        // Projected size if the next sphere grows like the last one.
        double growth = prev_layer ? double(layer) / double(prev_layer) : double(G.alphabet().size());
        double projected = double(end) + double(layer) * growth;
        if (projected > double(max_elements))
            fail(ErrorKind::Size, "ball of radius " + std::to_string(R) + " in " + G.preset().name + " projected to exceed " +
                                      std::to_string(max_elements) + " elements at radius " + std::to_string(d) + " (projected " +
                                      fmt_fixed(projected, 0) + ")");
        // The Cayley graph is bipartite (relators have even length), so every edge joins
        // consecutive spheres and is seen once, from its inner end.
        B.index.reserve(static_cast<size_t>(projected * 1.1) + 16);
        for (size_t i = begin; i < end; ++i)
            for (char x : G.alphabet()) {
                Word w = G.normal_form(B.elements[i] + x);
                if (static_cast<int>(w.size()) != d) continue;
                auto it = B.index.find(w);
                if (it != B.index.end()) {
                    B.edges.emplace_back(static_cast<int>(i), it->second);
                    continue;
                }
                B.edges.emplace_back(static_cast<int>(i), static_cast<int>(B.elements.size()));
                add(std::move(w), d, static_cast<int>(i), x);
            }
        prev_layer = layer;
        begin = end;
    }
    std::sort(B.edges.begin(), B.edges.end());
    std::unordered_map<Word, int> tp;
    for (const auto& g : B.elements) {
        Word k = G.edge_coset(g);
        auto [it, fresh] = tp.emplace(k, static_cast<int>(B.tree_points.size()));
        if (fresh) B.tree_points.push_back(k);
        B.tree_point.push_back(it->second);
    }
    return B;
}

// ---- coset intersections ----

namespace detail {

// Prefixes i < j of a geodesic lie in one coset of G_v exactly when every letter between
// them is in G_v, so diam(X_v ∩ gamma) is the longest run of such letters.
class RunTracker {
public:
    explicit RunTracker(const Amalgam& G) : G_(&G) {}
    int push(char x) {
        Mark m{run_, D_};
        for (int v = 0; v < 2; ++v) {
            run_[v] = G_->in_vertex(v, x) ? run_[v] + 1 : 0;
            D_ = std::max(D_, run_[v]);
        }
        marks_.push_back(m);
        return D_;
    }
    void pop() {
        run_ = marks_.back().run;
        D_ = marks_.back().D;
        marks_.pop_back();
    }
    int D() const { return D_; }

private:
    struct Mark {
        std::array<int, 2> run;
        int D;
    };
    const Amalgam* G_;
    std::array<int, 2> run_{};
    int D_ = 0;
    std::vector<Mark> marks_;
};

}  // namespace detail

// Checks gamma is geodesic against the ball's BFS distances.
inline void require_geodesic(const Amalgam& G, const CayleyBall& ball, const Word& gamma) {
    for (char x : gamma)
        if (!G.valid_letter(x)) fail(ErrorKind::Precondition, std::string("letter '") + x + "' is not in the preset alphabet");
    if (static_cast<int>(gamma.size()) > ball.radius)
        fail(ErrorKind::Range, "word of length " + std::to_string(gamma.size()) + " leaves the ball of radius " + std::to_string(ball.radius));
    int i = ball.find(G.normal_form(gamma));
    if (i < 0) fail(ErrorKind::Range, "endpoint of '" + gamma + "' is outside the ball");
    if (ball.dist[i] < static_cast<int>(gamma.size()))
        fail(ErrorKind::Precondition, "'" + gamma + "' is not geodesic: length " + std::to_string(gamma.size()) +
                                          ", shorter path '" + ball.geodesic_word(i) + "' of length " + std::to_string(ball.dist[i]));
}

// Largest diameter of gamma ∩ X_v over the vertex spaces X_v it visits.
inline int vertex_intersection_diameter(const Amalgam& G, const CayleyBall& ball, const Word& gamma) {
    require_geodesic(G, ball, gamma);
    detail::RunTracker t(G);
    for (char x : gamma) t.push(x);
    return t.D();
}

// All geodesic words of length 1..L from the identity, in alphabet order, skipping any
// whose prefix already has D above prune_D (D only grows along a geodesic).
inline std::vector<Word> geodesic_family(const Amalgam& G, int L, int prune_D = std::numeric_limits<int>::max()) {
    std::vector<Word> out;
    detail::RunTracker t(G);
    Word w;
    std::function<void()> dfs = [&] {
        if (static_cast<int>(w.size()) == L) return;
        for (char x : G.alphabet()) {
            // Geodesic extension: x must not cancel against the word.
            bool cancels = false;
            for (int k = static_cast<int>(w.size()) - 1; k >= 0; --k) {
                if (w[k] == inverse(x)) {
                    cancels = true;
                    break;
                }
                if (!G.commute(w[k], x) || w[k] == x) break;
            }
            if (cancels) continue;
            w.push_back(x);
            if (t.push(x) <= prune_D) {
                out.push_back(w);
                dfs();
            }
            t.pop();
            w.pop_back();
        }
    };
    dfs();
    return out;
}

// ---- quasi-isometry fit ----

struct QuasiIsomFit {
    double K = 1;
    size_t sample_size = 0;  // (member, s, t) triples checked
    size_t members = 0;
    std::vector<std::pair<Word, int>> filtered;  // members over the D bound, with their D
    std::vector<std::string> notices;
    Word worst_word;
    int worst_s = 0, worst_t = 0;
    // Morse probe over sampled (2,2)-quasi-geodesic detours.
    double excursion_max = 0;
    int detours_accepted = 0, detours_rejected = 0;
};

struct FitOptions {
    std::uint64_t seed = 1;
    int morse_samples = 256;
    int max_detour = 3;
    int threads = 1;
};

// Least K with d/K - K <= d_T <= K d + K, i.e. K^2 + d_T K - d >= 0 and K >= d_T / (d + 1).
inline double pair_K(int d, int dT) {
    double a = (-double(dT) + std::sqrt(double(dT) * dT + 4.0 * d)) / 2;
    return std::max(a, double(dT) / (d + 1));
}

namespace detail {

struct MemberFit {
    double K = 1;
    int s = 0, t = 0;
    size_t pairs = 0;
};

// Syllable count of each subword, straight from the letter classes: gamma is reduced.
inline MemberFit fit_member(const Amalgam& G, const Word& gamma) {
    MemberFit m;
    const int n = static_cast<int>(gamma.size());
    std::vector<int> cls(n);
    for (int i = 0; i < n; ++i) cls[i] = G.in_edge(gamma[i]) ? -1 : (G.in_vertex(0, gamma[i]) ? 0 : 1);
    for (int s = 0; s < n; ++s) {
        int syl = 0, last = -1;
        for (int t = s + 1; t <= n; ++t) {
            int c = cls[t - 1];
            if (c >= 0 && c != last) ++syl, last = c;
            double k = pair_K(t - s, syl);
            ++m.pairs;
            if (k > m.K) m.K = k, m.s = s, m.t = t;
        }
    }
    return m;
}

// Random reduced word of length len.
inline Word random_reduced(const Amalgam& G, std::mt19937_64& rng, int len) {
    std::uniform_int_distribution<size_t> pick(0, G.alphabet().size() - 1);
    Word w;
    for (int guard = 0; static_cast<int>(w.size()) < len && guard < 100 * len; ++guard) {
        Word c = w + G.alphabet()[pick(rng)];
        if (G.length(c) == static_cast<int>(c.size())) w = c;
    }
    return w;
}

inline bool is_22_quasi_geodesic(const Amalgam& G, const Word& path) {
    const int n = static_cast<int>(path.size());
    for (int s = 0; s < n; ++s)
        for (int t = s + 1; t <= n; ++t)
            if (t - s > 2 * G.length(path.substr(s, t - s)) + 2) return false;
    return true;
}

}  // namespace detail

inline QuasiIsomFit fit_quasi_geodesic(const Amalgam& G, const CayleyBall& ball, const std::vector<Word>& family, int D_bound,
                                       const FitOptions& opt = {}) {
    if (family.empty()) fail(ErrorKind::Precondition, "geodesic family is empty");
    QuasiIsomFit fit;
    std::vector<const Word*> kept;
    for (const auto& w : family) {
        int D = vertex_intersection_diameter(G, ball, w);
        if (D > D_bound) {
            fit.filtered.emplace_back(w, D);
            continue;
        }
        kept.push_back(&w);
    }
    if (!fit.filtered.empty())
        fit.notices.push_back(std::to_string(fit.filtered.size()) + " member(s) exceed D <= " + std::to_string(D_bound) +
                              " and were filtered (first: '" + fit.filtered.front().first + "', D = " +
                              std::to_string(fit.filtered.front().second) + ")");
    if (kept.empty()) fail(ErrorKind::Precondition, "no family member satisfies D <= " + std::to_string(D_bound));
    fit.members = kept.size();

    const int nt = std::max(1, opt.threads);
    std::vector<detail::MemberFit> part(kept.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (size_t i = t; i < kept.size(); i += nt) part[i] = detail::fit_member(G, *kept[i]);
        });
    for (auto& th : pool) th.join();
    for (size_t i = 0; i < kept.size(); ++i) {
        fit.sample_size += part[i].pairs;
        if (part[i].K > fit.K) fit.K = part[i].K, fit.worst_word = *kept[i], fit.worst_s = part[i].s, fit.worst_t = part[i].t;
    }

    // Morse probe: detour through gamma(i) w, back to gamma(j) geodesically.
    std::mt19937_64 rng(opt.seed);
    for (int k = 0; k < opt.morse_samples; ++k) {
        const Word& g = *kept[std::uniform_int_distribution<size_t>(0, kept.size() - 1)(rng)];
        int n = static_cast<int>(g.size());
        int i = std::uniform_int_distribution<int>(0, n)(rng), j = std::uniform_int_distribution<int>(0, n)(rng);
        if (i > j) std::swap(i, j);
        int len = std::uniform_int_distribution<int>(1, std::max(1, opt.max_detour))(rng);
        Word w = detail::random_reduced(G, rng, len);
        Word seg = g.substr(i, j - i);
        Word path = w + G.reduce(inverse(w) + seg);
        if (!detail::is_22_quasi_geodesic(G, path)) {
            ++fit.detours_rejected;
            continue;
        }
        ++fit.detours_accepted;
        Word head = g.substr(0, i);
        for (size_t m = 0; m <= path.size(); ++m) {
            Word x = head + path.substr(0, m);
            int best = std::numeric_limits<int>::max();
            for (int q = 0; q <= n; ++q) best = std::min(best, G.distance(x, g.substr(0, q)));
            fit.excursion_max = std::max(fit.excursion_max, double(best));
        }
    }
    return fit;
}

// ---- invariants on the ball ----

struct BallCheck {
    bool lipschitz = true;  // |pi(g) - pi(gs)|_T <= 1 on every edge
    bool star = true;       // each edge image crossing a vertex of T has both ends in its vertex space
    size_t edges_checked = 0;
};

// pi sends g to the midpoint of the edge gC. A generator edge (g, gs) with s outside C maps
// across the vertex gA or gB containing s; the points of the edge over that vertex's open
// star are within 1 of X_v exactly when both ends lie in the coset.
inline BallCheck check_ball(const Amalgam& G, const CayleyBall& ball) {
    BallCheck c;
    for (auto [u, v] : ball.edges) {
        ++c.edges_checked;
        const Word &g = ball.elements[u], &h = ball.elements[v];
        int dT = G.tree_distance(g, h);
        if (dT > 1) c.lipschitz = false;
        if (dT == 0) {
            if (ball.tree_point[u] != ball.tree_point[v]) c.star = false;
            continue;
        }
        bool shared = false;
        for (int w = 0; w < 2; ++w) shared = shared || G.vertex_coset(g, w) == G.vertex_coset(h, w);
        if (!shared) c.star = false;
    }
    return c;
}

// ---- CSV ----

struct FitRow {
    std::string preset;
    int R = 0;
    int D_bound = 0;
    QuasiIsomFit fit;
};

inline std::string fit_csv(const std::vector<FitRow>& rows) {
    std::string s = "preset,R,D_bound,K,excursion_max,members,filtered,pairs\n";
    for (const auto& r : rows)
        s += r.preset + "," + std::to_string(r.R) + "," + std::to_string(r.D_bound) + "," + fmt_double(r.fit.K) + "," +
             fmt_double(r.fit.excursion_max) + "," + std::to_string(r.fit.members) + "," + std::to_string(r.fit.filtered.size()) +
             "," + std::to_string(r.fit.sample_size) + "\n";
    return s;
}

}  // namespace omega::bass_serre
