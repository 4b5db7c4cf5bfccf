#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "omega/cantor/presentation.hpp"

namespace omega::cantor {

// Finite union of cylinders, kept in canonical form: the sorted list of maximal
// cylinders contained in the set. Canonical form makes == set equality.
struct ClopenSet {
    PresentationPtr P;
    std::vector<Word> words;

    bool empty() const { return words.empty(); }
    size_t size() const { return words.size(); }
    bool operator==(const ClopenSet& o) const { return words == o.words; }

    size_t max_length() const {
        size_t m = 0;
        for (const auto& w : words) m = std::max(m, w.size());
        return m;
    }
};

namespace detail {

inline bool is_prefix(const Word& p, const Word& w) {
    return p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin());
}

using Range = std::pair<size_t, size_t>;

// Words in ws[r] all extend prefix (sorted). Returns whether [prefix] is covered.
inline bool covers_prefix(const std::vector<Word>& ws, Range r, size_t depth) {
    for (size_t i = r.first; i < r.second; ++i)
        if (ws[i].size() == depth) return true;
    return false;
}

inline Range child_range(const std::vector<Word>& ws, Range r, size_t depth, Label l) {
    size_t lo = r.first, hi = r.second;
    while (lo < r.second && (ws[lo].size() <= depth || ws[lo][depth] < l)) ++lo;
    hi = lo;
    while (hi < r.second && ws[hi].size() > depth && ws[hi][depth] == l) ++hi;
    return {lo, hi};
}

// Generic boolean combination on the cylinder trie. aAll/bAll mark a side already
// known to cover the current cylinder.
inline bool combine_rec(const TreePresentation& P, int state, Word& prefix, const std::vector<Word>& A, Range ra,
                        bool aAll, const std::vector<Word>& B, Range rb, bool bAll,
                        const std::function<bool(bool, bool)>& f, std::vector<Word>& out) {
    size_t d = prefix.size();
    bool aFull = aAll || (ra.first != ra.second && covers_prefix(A, ra, d));
    bool bFull = bAll || (rb.first != rb.second && covers_prefix(B, rb, d));
    bool aKnown = aFull || ra.first == ra.second;
    bool bKnown = bFull || rb.first == rb.second;
    auto decided = [&](bool v) {
        if (v) out.push_back(prefix);
        return v;
    };
    if (aKnown && bKnown) return decided(f(aFull, bFull));
    if (aKnown && f(aFull, false) == f(aFull, true)) return decided(f(aFull, false));
    if (bKnown && f(false, bFull) == f(true, bFull)) return decided(f(false, bFull));
    size_t mark = out.size();
    bool all = true;
    for (auto [l, t] : P.out[state]) {
        Range ca = aFull ? Range{0, 0} : child_range(A, ra, d, l);
        Range cb = bFull ? Range{0, 0} : child_range(B, rb, d, l);
        prefix.push_back(l);
        bool full = combine_rec(P, t, prefix, A, ca, aFull, B, cb, bFull, f, out);
        prefix.pop_back();
        all = all && full;
    }
    if (all) {
        out.resize(mark);
        out.push_back(prefix);
        return true;
    }
    return false;
}

inline std::vector<Word> sorted_unique(std::vector<Word> ws) {
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    return ws;
}

inline std::vector<Word> combine(const TreePresentation& P, const std::vector<Word>& A, const std::vector<Word>& B,
                                 const std::function<bool(bool, bool)>& f) {
    Word prefix;
    std::vector<Word> out;
    combine_rec(P, P.root, prefix, A, {0, A.size()}, false, B, {0, B.size()}, false, f, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline ClopenSet make_clopen(PresentationPtr P, std::vector<Word> words) {
    for (const auto& w : words)
        if (!P->is_path(w)) {
            std::string s;
            for (auto l : w) s += std::to_string(l) + ".";
            fail(ErrorKind::Structural, "word " + s + " is not a path of the presentation");
        }
    auto ws = detail::sorted_unique(std::move(words));
    // Union with the empty set canonicalises.
    ClopenSet X{P, detail::combine(*P, ws, {}, [](bool a, bool) { return a; })};
    return X;
}

inline ClopenSet whole(PresentationPtr P) { return ClopenSet{P, {Word{}}}; }
inline ClopenSet nothing(PresentationPtr P) { return ClopenSet{P, {}}; }
inline ClopenSet cylinder(PresentationPtr P, const Word& w) { return make_clopen(P, {w}); }

inline ClopenSet unite(const ClopenSet& A, const ClopenSet& B) {
    return {A.P, detail::combine(*A.P, A.words, B.words, [](bool a, bool b) { return a || b; })};
}
inline ClopenSet intersect(const ClopenSet& A, const ClopenSet& B) {
    return {A.P, detail::combine(*A.P, A.words, B.words, [](bool a, bool b) { return a && b; })};
}
inline ClopenSet subtract(const ClopenSet& A, const ClopenSet& B) {
    return {A.P, detail::combine(*A.P, A.words, B.words, [](bool a, bool b) { return a && !b; })};
}
inline bool subset_of(const ClopenSet& A, const ClopenSet& B) { return subtract(A, B).empty(); }
inline bool disjoint(const ClopenSet& A, const ClopenSet& B) { return intersect(A, B).empty(); }

// Same word list read in another presentation (C-cylinder hull inside D).
inline ClopenSet reinterpret(const ClopenSet& X, PresentationPtr Q) { return make_clopen(std::move(Q), X.words); }

// X ∩ C for X a D-clopen, as a C-clopen.
inline ClopenSet restrict_to_sub(const SubPresentation& S, const ClopenSet& X) {
    std::vector<Word> ws;
    for (const auto& w : X.words)
        if (S.C->is_path(w)) ws.push_back(w);
    return make_clopen(S.C, std::move(ws));
}

// Extend w along the forced (out-degree 1) path.
inline Word forced_extension(const TreePresentation& P, Word w) {
    int s = P.walk(w);
    int guard = 0;
    while (s >= 0 && P.out_degree(s) == 1 && guard++ <= P.size() + 1) {
        auto [l, t] = *P.out[s].begin();
        w.push_back(l);
        s = t;
    }
    return w;
}

// Length of the longest common prefix of all points of X; -1 for the empty set.
inline int point_lcp(const ClopenSet& X) {
    if (X.empty()) return -1;
    if (X.words.size() == 1) return static_cast<int>(forced_extension(*X.P, X.words[0]).size());
    size_t lcp = X.words[0].size();
    for (size_t i = 1; i < X.words.size(); ++i) {
        size_t k = 0;
        const auto &a = X.words[0], &b = X.words[i];
        while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
        lcp = std::min(lcp, k);
    }
    return static_cast<int>(lcp);
}

// Diameter in the metric d(x,y) = 2^-|x∧y|.
inline double diameter(const ClopenSet& X) {
    int l = point_lcp(X);
    return l < 0 ? 0.0 : std::ldexp(1.0, -l);
}

// Split into two non-empty clopens at the first branching: label groups at the
// branch position, the first ceil(r/2) groups going left.
inline std::pair<ClopenSet, ClopenSet> split_canonical(const ClopenSet& X) {
    if (X.empty()) fail(ErrorKind::Precondition, "cannot split the empty set");
    std::vector<Word> ws = X.words;
    if (ws.size() == 1) {
        Word w = forced_extension(*X.P, ws[0]);
        int s = X.P->walk(w);
        if (X.P->out_degree(s) < 2)
            fail(ErrorKind::Precondition, "perfectness violation: no branching below a cylinder");
        ws.clear();
        for (auto [l, t] : X.P->out[s]) {
            Word c = w;
            c.push_back(l);
            ws.push_back(c);
        }
    }
    size_t pos = static_cast<size_t>(point_lcp(ClopenSet{X.P, ws}));
    std::vector<Label> labels;
    for (const auto& w : ws) labels.push_back(w[pos]);
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    size_t cut = (labels.size() + 1) / 2;
    Label pivot = labels[cut];
    std::vector<Word> left, right;
    for (const auto& w : ws) (w[pos] < pivot ? left : right).push_back(w);
    return {make_clopen(X.P, left), make_clopen(X.P, right)};
}

inline std::string word_string(const Word& w) {
    if (w.empty()) return "e";
    std::string s;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(w[i]);
    }
    return s;
}

inline nlohmann::json to_json(const ClopenSet& X) {
    auto j = nlohmann::json::array();
    for (const auto& w : X.words) j.push_back(w);
    return j;
}

}  // namespace omega::cantor
