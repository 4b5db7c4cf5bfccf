#pragma once

#include <deque>
#include <optional>

#include "omega/cantor/clopen.hpp"

namespace omega::cantor {

struct EntwinedResult {
    bool entwined = false;
    std::optional<Word> witness;  // a D-cylinder contained in C
};

namespace detail {

// full[c]: the D-cylinder below any C-path ending at c lies inside C,
// i.e. no leaking C-state is reachable from c.
inline std::vector<char> full_states(const SubPresentation& S) {
    const auto& C = *S.C;
    std::vector<std::vector<int>> rev(C.size());
    for (int c = 0; c < C.size(); ++c)
        for (auto [l, t] : C.out[c]) rev[t].push_back(c);
    std::vector<char> tainted(C.size(), 0);
    std::deque<int> q;
    for (int c = 0; c < C.size(); ++c)
        if (S.leaks(c)) {
            tainted[c] = 1;
            q.push_back(c);
        }
    while (!q.empty()) {
        int t = q.front();
        q.pop_front();
        for (int s : rev[t])
            if (!tainted[s]) {
                tainted[s] = 1;
                q.push_back(s);
            }
    }
    std::vector<char> full(C.size());
    for (int c = 0; c < C.size(); ++c) full[c] = !tainted[c];
    return full;
}

}  // namespace detail

inline EntwinedResult is_entwined(const SubPresentation& S) {
    require_valid_perfect(*S.D, "ambient presentation");
    require_valid_perfect(*S.C, "sub presentation");
    auto full = detail::full_states(S);
    const auto& C = *S.C;
    if (full[C.root]) fail(ErrorKind::Precondition, "sub presentation equals the ambient one; entwinement needs C ⊊ D");
    // Shortest C-path to a full state (BFS in label order) is the witness.
    std::vector<int> parent(C.size(), -2);
    std::vector<Label> via(C.size(), -1);
    std::deque<int> q{C.root};
    parent[C.root] = -1;
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        if (full[s]) {
            Word w;
            for (int c = s; parent[c] != -1; c = parent[c]) w.push_back(via[c]);
            std::reverse(w.begin(), w.end());
            return {false, w};
        }
        for (auto [l, t] : C.out[s])
            if (parent[t] == -2) {
                parent[t] = s;
                via[t] = l;
                q.push_back(t);
            }
    }
    return {true, std::nullopt};
}

// X (a C-clopen) has empty interior in D, hence in any D-open set containing it.
inline bool nowhere_dense(const SubPresentation& S, const ClopenSet& X) {
    auto full = detail::full_states(S);
    for (const auto& w : X.words) {
        // Every C-state reachable below w must not be full.
        int s0 = S.C->walk(w);
        std::vector<char> seen(S.C->size(), 0);
        std::deque<int> q{s0};
        seen[s0] = 1;
        while (!q.empty()) {
            int s = q.front();
            q.pop_front();
            if (full[s]) return false;
            for (auto [l, t] : S.C->out[s])
                if (!seen[t]) {
                    seen[t] = 1;
                    q.push_back(t);
                }
        }
    }
    return true;
}

}  // namespace omega::cantor
