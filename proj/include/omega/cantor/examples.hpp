#pragma once

#include <string>

#include "omega/cantor/homeo.hpp"

namespace omega::cantor::examples {

inline TreePresentation full_shift(int letters = 2) {
    TreePresentation T;
    T.add_state("s");
    for (int l = 0; l < letters; ++l) T.add_edge(0, l, 0);
    return T;
}

inline TreePresentation single_point() {
    TreePresentation T;
    T.add_state("s");
    T.add_edge(0, 0, 0);
    return T;
}

// Rooted binary tree: the Cantor set C.
inline TreePresentation binary_tree() {
    TreePresentation T;
    T.add_state("t");
    T.add_edge(0, 0, 0);
    T.add_edge(0, 1, 0);
    return T;
}

// Binary tree with a fresh binary tree glued at every vertex. `order` permutes
// the four labels at t: the tree's own children get order[0], order[1].
inline TreePresentation glued_tree(std::array<int, 4> order = {0, 1, 2, 3}) {
    TreePresentation T;
    T.add_state("t");
    T.add_state("u");
    T.add_edge("t", order[0], "t");
    T.add_edge("t", order[1], "t");
    T.add_edge("t", order[2], "u");
    T.add_edge("t", order[3], "u");
    T.add_edge("u", 0, "u");
    T.add_edge("u", 1, "u");
    return T;
}

// X_1 = binary tree; X_{n+1} glues a fresh binary tree (state g<n+1>) at every
// vertex of X_n using labels 2n, 2n+1.
inline std::vector<TreePresentation> iterated_gluing(int length) {
    std::vector<TreePresentation> out;
    TreePresentation T;
    T.add_state("g1");
    T.add_edge(0, 0, 0);
    T.add_edge(0, 1, 0);
    out.push_back(T);
    for (int n = 1; n < length; ++n) {
        int old = T.size();
        std::string g = "g" + std::to_string(n + 1);
        int fresh = T.add_state(g);
        T.add_edge(fresh, 0, fresh);
        T.add_edge(fresh, 1, fresh);
        for (int s = 0; s < old; ++s) {
            T.add_edge(s, 2 * n, fresh);
            T.add_edge(s, 2 * n + 1, fresh);
        }
        out.push_back(T);
    }
    return out;
}

// Same gluing but only at vertices of even depth; states carry depth parity.
inline std::vector<TreePresentation> alternate_gluing(int length) {
    std::vector<TreePresentation> out;
    TreePresentation T;
    T.add_state("g1e");
    T.add_state("g1o");
    T.add_edge("g1e", 0, "g1o");
    T.add_edge("g1e", 1, "g1o");
    T.add_edge("g1o", 0, "g1e");
    T.add_edge("g1o", 1, "g1e");
    out.push_back(T);
    for (int n = 1; n < length; ++n) {
        int old = T.size();
        std::string g = "g" + std::to_string(n + 1);
        T.add_state(g + "e");
        T.add_state(g + "o");
        T.add_edge(g + "e", 0, g + "o");
        T.add_edge(g + "e", 1, g + "o");
        T.add_edge(g + "o", 0, g + "e");
        T.add_edge(g + "o", 1, g + "e");
        for (int s = 0; s < old; ++s)
            if (T.names[s].back() == 'e') {
                // The glued copy's root sits at an even vertex; its children are odd.
                T.add_edge(s, 2 * n, T.find(g + "o"));
                T.add_edge(s, 2 * n + 1, T.find(g + "o"));
            }
        out.push_back(T);
    }
    return out;
}

}  // namespace omega::cantor::examples
