#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "omega/cantor/entwined.hpp"

namespace omega::cantor {

struct ExtendOptions {
    int max_depth = 40;
    std::size_t max_nodes = 4'000'000;
};

namespace detail {

// C-words of X unfolded along C until each has length >= m.
inline std::vector<Word> unfold_to(const SubPresentation& S, const ClopenSet& X, size_t m) {
    std::vector<Word> out, todo = X.words;
    while (!todo.empty()) {
        Word w = std::move(todo.back());
        todo.pop_back();
        if (w.size() >= m) {
            out.push_back(std::move(w));
            continue;
        }
        for (auto [l, t] : S.C->out[S.C->walk(w)]) {
            Word e = w;
            e.push_back(l);
            todo.push_back(std::move(e));
        }
    }
    return out;
}

// Shortest D-word inside A that is not a C-path (breadth-first over C-paths).
inline std::optional<Word> find_escape(const SubPresentation& S, const ClopenSet& A, size_t max_nodes) {
    std::deque<std::pair<Word, int>> q{{Word{}, S.C->root}};
    size_t nodes = 0;
    while (!q.empty()) {
        auto [v, c] = std::move(q.front());
        q.pop_front();
        if (++nodes > max_nodes) fail(ErrorKind::Resolution, "escape search exceeded its node budget");
        bool inside = false, towards = false;
        for (const auto& a : A.words) {
            if (is_prefix(a, v)) inside = true;
            else if (is_prefix(v, a)) towards = true;
        }
        if (!inside && !towards) continue;
        if (inside && S.leaks(c))
            for (auto [l, t] : S.D->out[S.cmap[c]])
                if (!S.C->out[c].count(l)) {
                    v.push_back(l);
                    return v;
                }
        for (auto [l, t] : S.C->out[c]) {
            Word e = v;
            e.push_back(l);
            q.emplace_back(std::move(e), t);
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Relative form of the clopen extension: A is a D-clopen with A ∩ C = C0 ⊔ C1.
// Returns D0, D1 ⊆ A with D_i ∩ C = C_i, D0 ∩ D1 = ∅, D0 ∪ D1 ⊊ A and D_i inside
// the closed 2^-m neighbourhood of C_i. D_i is the D-hull of C_i unfolded to
// length m, cut to A; one escape cylinder is removed when the hulls fill A.
inline std::pair<ClopenSet, ClopenSet> extend_clopen_within(const SubPresentation& S, const ClopenSet& A,
                                                            const ClopenSet& C0, const ClopenSet& C1, int m,
                                                            const ExtendOptions& opt = {}) {
    if (C0.empty() || C1.empty()) fail(ErrorKind::Precondition, "both pieces must be non-empty");
    if (m < 0) fail(ErrorKind::Precondition, "epsilon exponent must be non-negative");
    if (m > opt.max_depth)
        fail(ErrorKind::Resolution, "epsilon 2^-" + std::to_string(m) + " needs unfolding beyond depth budget " +
                                        std::to_string(opt.max_depth));
    auto c0 = reinterpret(C0, S.C), c1 = reinterpret(C1, S.C);
    if (!disjoint(c0, c1)) fail(ErrorKind::Precondition, "pieces overlap");
    if (!(unite(c0, c1) == restrict_to_sub(S, A)))
        fail(ErrorKind::Precondition, "pieces do not cover the sub-space inside the ambient clopen");
    auto d0 = intersect(make_clopen(S.D, detail::unfold_to(S, c0, m)), A);
    auto d1 = intersect(make_clopen(S.D, detail::unfold_to(S, c1, m)), A);
    if (unite(d0, d1) == A) {
        auto e = detail::find_escape(S, A, opt.max_nodes);
        if (!e) fail(ErrorKind::Precondition, "sub-space has interior inside the ambient clopen");
        auto cut = cylinder(S.D, *e);
        d0 = subtract(d0, cut);
        d1 = subtract(d1, cut);
    }
    return {d0, d1};
}

// Whole-space form: the ambient clopen is D itself. eps = 2^-m.
inline std::pair<ClopenSet, ClopenSet> extend_clopen(const SubPresentation& S, const ClopenSet& C0,
                                                     const ClopenSet& C1, int m, const ExtendOptions& opt = {}) {
    auto ent = is_entwined(S);
    if (!ent.entwined)
        fail(ErrorKind::Precondition, "sub presentation is not entwined; D-cylinder " + word_string(*ent.witness) +
                                          " lies inside it");
    return extend_clopen_within(S, whole(S.D), C0, C1, m, opt);
}

struct ExtendCheck {
    bool restricts = false;     // D_i ∩ C = C_i
    bool disjoint = false;      // D_0 ∩ D_1 = ∅
    bool proper = false;        // D_0 ∪ D_1 ⊊ D
    bool near = false;          // D_i ⊆ N_eps(C_i)
    bool entwined = false;      // C_i has empty interior in D_i
    bool all() const { return restricts && disjoint && proper && near && entwined; }
};

// Every point of X lies within 2^-m of C_i iff every depth-m D-word meeting X
// also meets C_i (words shorter than m are unfolded first).
inline bool within_closed_neighbourhood(const SubPresentation& S, const ClopenSet& X, const ClopenSet& Ci, int m) {
    auto ci = reinterpret(Ci, S.D);
    auto meets = [&](const Word& p) { return !restrict_to_sub(S, intersect(cylinder(S.D, p), ci)).empty(); };
    for (const auto& w : X.words) {
        if (static_cast<int>(w.size()) >= m) {
            if (!meets(Word(w.begin(), w.begin() + m))) return false;
            continue;
        }
        std::vector<Word> frontier{w};
        while (static_cast<int>(frontier.front().size()) < m) {
            std::vector<Word> nxt;
            for (const auto& u : frontier)
                for (auto [l, t] : S.D->out[S.D->walk(u)]) {
                    Word e = u;
                    e.push_back(l);
                    nxt.push_back(e);
                }
            frontier.swap(nxt);
        }
        for (const auto& u : frontier)
            if (!meets(u)) return false;
    }
    return true;
}

inline ExtendCheck check_extension(const SubPresentation& S, const ClopenSet& A, const ClopenSet& C0,
                                   const ClopenSet& C1, const ClopenSet& D0, const ClopenSet& D1, int m) {
    ExtendCheck r;
    auto c0 = reinterpret(C0, S.C), c1 = reinterpret(C1, S.C);
    r.restricts = restrict_to_sub(S, D0) == c0 && restrict_to_sub(S, D1) == c1;
    r.disjoint = disjoint(D0, D1);
    auto u = unite(D0, D1);
    r.proper = subset_of(u, A) && !(u == A);
    r.near = within_closed_neighbourhood(S, D0, c0, m) && within_closed_neighbourhood(S, D1, c1, m);
    r.entwined = nowhere_dense(S, c0) && nowhere_dense(S, c1);
    return r;
}

// ---- nested clopen systems ----

using Index = std::string;  // binary word over {'0','1'}; "" is the empty word

struct NestedClopenSystem {
    int depth = 0;
    std::map<Index, ClopenSet> C, D, K;
};

// Number of splits after which canonical pieces have halved their diameter.
inline int split_period(const TreePresentation& P) {
    int r = std::max(2, P.max_out_degree()), s = 0;
    while ((1 << s) < r) ++s;
    return s;
}

inline std::map<Index, ClopenSet> canonical_subsystem(const ClopenSet& X, int depth) {
    std::map<Index, ClopenSet> out;
    out.emplace("", X);
    std::vector<Index> level{""};
    for (int d = 0; d < depth; ++d) {
        std::vector<Index> nxt;
        for (const auto& w : level) {
            auto [a, b] = split_canonical(out.at(w));
            out.emplace(w + "0", a);
            out.emplace(w + "1", b);
            nxt.push_back(w + "0");
            nxt.push_back(w + "1");
        }
        level.swap(nxt);
    }
    return out;
}

// D-side of a nested system for a prescribed C-side.
inline NestedClopenSystem build_nested_system(const SubPresentation& S, const std::map<Index, ClopenSet>& Cside,
                                              int depth, const ExtendOptions& opt = {}) {
    auto ent = is_entwined(S);
    if (!ent.entwined)
        fail(ErrorKind::Precondition, "sub presentation is not entwined; D-cylinder " + word_string(*ent.witness) +
                                          " lies inside it");
    NestedClopenSystem sys;
    sys.depth = depth;
    sys.D.emplace("", whole(S.D));
    std::vector<Index> level{""};
    for (int d = 0; d <= depth; ++d) {
        for (const auto& w : level) {
            auto it = Cside.find(w);
            if (it == Cside.end()) fail(ErrorKind::Structural, "C-side index '" + w + "' missing");
            sys.C.emplace(w, reinterpret(it->second, S.C));
        }
        if (d == depth) break;
        std::vector<Index> nxt;
        for (const auto& w : level) {
            auto c0 = Cside.find(w + "0"), c1 = Cside.find(w + "1");
            if (c0 == Cside.end() || c1 == Cside.end())
                fail(ErrorKind::Structural, "C-side children of '" + w + "' missing");
            if (c0->second.empty() || c1->second.empty())
                fail(ErrorKind::Precondition, "perfectness violation: C-piece '" + w + "' cannot be split");
            auto [d0, d1] = extend_clopen_within(S, sys.D.at(w), c0->second, c1->second, d + 1, opt);
            sys.K.emplace(w, subtract(sys.D.at(w), unite(d0, d1)));
            sys.D.emplace(w + "0", d0);
            sys.D.emplace(w + "1", d1);
            nxt.push_back(w + "0");
            nxt.push_back(w + "1");
        }
        level.swap(nxt);
    }
    return sys;
}

inline NestedClopenSystem build_nested_system(const SubPresentation& S, int depth, const ExtendOptions& opt = {}) {
    return build_nested_system(S, canonical_subsystem(whole(S.C), depth), depth, opt);
}

// Invariant sweep; returns human-readable violations (empty when all hold).
inline std::vector<std::string> check_nested_system(const SubPresentation& S, const NestedClopenSystem& sys) {
    std::vector<std::string> bad;
    auto note = [&](const Index& w, const std::string& what) { bad.push_back("[" + (w.empty() ? "e" : w) + "] " + what); };
    if (!(sys.C.at("") == whole(S.C))) note("", "C_e differs from C");
    if (!(sys.D.at("") == whole(S.D))) note("", "D_e differs from D");
    int sC = split_period(*S.C);
    for (const auto& [w, Dw] : sys.D) {
        if (!(restrict_to_sub(S, Dw) == sys.C.at(w))) note(w, "D_w ∩ C differs from C_w");
        double bound = std::ldexp(1.0, -static_cast<int>(w.size()) / sC);
        if (diameter(sys.C.at(w)) > bound) note(w, "C_w diameter above schedule");
        if (diameter(Dw) > bound) note(w, "D_w diameter above schedule");
        if (static_cast<int>(w.size()) < sys.depth) {
            const auto &D0 = sys.D.at(w + "0"), &D1 = sys.D.at(w + "1");
            const auto &C0 = sys.C.at(w + "0"), &C1 = sys.C.at(w + "1");
            if (!disjoint(C0, C1) || !(unite(C0, C1) == sys.C.at(w))) note(w, "C_w is not C_w0 ⊔ C_w1");
            if (!disjoint(D0, D1)) note(w, "D_w0, D_w1 overlap");
            if (!subset_of(D0, Dw) || !subset_of(D1, Dw)) note(w, "children escape D_w");
            const auto& Kw = sys.K.at(w);
            if (Kw.empty()) note(w, "K_w empty");
            if (!(Kw == subtract(Dw, unite(D0, D1)))) note(w, "K_w mismatch");
        }
    }
    return bad;
}

}  // namespace omega::cantor
