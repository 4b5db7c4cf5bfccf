#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "omega/core/error.hpp"

namespace omega::raag {

struct DefiningGraph {
    std::vector<std::string> vertices;
    std::set<std::pair<int, int>> edges;  // i < j

    int size() const { return static_cast<int>(vertices.size()); }

    int add_vertex(const std::string& name) {
        if (index_of(name) >= 0) fail(ErrorKind::Structural, "duplicate vertex '" + name + "'");
        vertices.push_back(name);
        return size() - 1;
    }
    int index_of(const std::string& name) const {
        auto it = std::find(vertices.begin(), vertices.end(), name);
        return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
    }
    void add_edge(int u, int v) {
        if (u < 0 || v < 0 || u >= size() || v >= size()) fail(ErrorKind::Structural, "edge references a missing vertex");
        if (u == v) fail(ErrorKind::Structural, "self-loop at '" + vertices[u] + "'");
        if (!edges.insert(std::minmax(u, v)).second)
            fail(ErrorKind::Structural, "duplicate edge " + vertices[u] + "-" + vertices[v]);
    }
    bool adjacent(int u, int v) const { return edges.count(std::minmax(u, v)) > 0; }
};

// Relabel by a permutation: vertex i of g becomes vertex perm[i].
inline DefiningGraph permuted(const DefiningGraph& g, const std::vector<int>& perm) {
    DefiningGraph h;
    h.vertices.resize(g.size());
    for (int i = 0; i < g.size(); ++i) h.vertices[perm[i]] = g.vertices[i];
    for (auto [u, v] : g.edges) h.edges.insert(std::minmax(perm[u], perm[v]));
    return h;
}

enum class BoundaryClass { Empty, TwoPoints, Cantor, OmegaCantor };

inline const char* to_string(BoundaryClass c) {
    switch (c) {
        case BoundaryClass::Empty: return "Empty";
        case BoundaryClass::TwoPoints: return "TwoPoints";
        case BoundaryClass::Cantor: return "Cantor";
        case BoundaryClass::OmegaCantor: return "OmegaCantor";
    }
    return "?";
}

struct JoinResult {
    bool join = false;
    std::vector<int> left, right;  // every left vertex adjacent to every right vertex
};

// Γ is a join iff its complement is disconnected.
inline JoinResult is_join(const DefiningGraph& g) {
    int n = g.size();
    if (n < 2) fail(ErrorKind::Precondition, "join test needs at least 2 vertices");
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> st{s};
        comp[s] = ncomp;
        while (!st.empty()) {
            int u = st.back();
            st.pop_back();
            for (int v = 0; v < n; ++v)
                if (v != u && comp[v] < 0 && !g.adjacent(u, v)) {
                    comp[v] = ncomp;
                    st.push_back(v);
                }
        }
        ++ncomp;
    }
    JoinResult r;
    r.join = ncomp > 1;
    if (r.join)
        for (int v = 0; v < n; ++v) (comp[v] == 0 ? r.left : r.right).push_back(v);
    return r;
}

inline BoundaryClass classify(const DefiningGraph& g) {
    if (g.size() == 0) return BoundaryClass::Empty;
    if (g.size() == 1) return BoundaryClass::TwoPoints;
    if (is_join(g).join) return BoundaryClass::Empty;
    if (g.edges.empty()) return BoundaryClass::Cantor;
    return BoundaryClass::OmegaCantor;
}

inline std::string witness_string(const DefiningGraph& g, const JoinResult& j) {
    if (!j.join) return "";
    auto side = [&](const std::vector<int>& s) {
        std::string out;
        for (int v : s) out += (out.empty() ? "" : " ") + g.vertices[v];
        return out;
    };
    return "{" + side(j.left) + "}*{" + side(j.right) + "}";
}

// ---- input formats ----

// {"vertices": ["a", ...], "edges": [["a","b"], ...]}
inline DefiningGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::Schema, "$: expected an object");
    if (!j.contains("vertices") || !j["vertices"].is_array()) fail(ErrorKind::Schema, "$.vertices: expected an array");
    DefiningGraph g;
    for (size_t i = 0; i < j["vertices"].size(); ++i) {
        const auto& v = j["vertices"][i];
        if (!v.is_string()) fail(ErrorKind::Schema, "$.vertices[" + std::to_string(i) + "]: expected a string");
        g.add_vertex(v.get<std::string>());
    }
    if (j.contains("edges")) {
        if (!j["edges"].is_array()) fail(ErrorKind::Schema, "$.edges: expected an array");
        for (size_t i = 0; i < j["edges"].size(); ++i) {
            const auto& e = j["edges"][i];
            std::string path = "$.edges[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                fail(ErrorKind::Schema, path + ": expected a pair of vertex names");
            int u = g.index_of(e[0].get<std::string>()), v = g.index_of(e[1].get<std::string>());
            if (u < 0 || v < 0) fail(ErrorKind::Schema, path + ": unknown vertex");
            g.add_edge(u, v);
        }
    }
    return g;
}

inline nlohmann::json to_json(const DefiningGraph& g) {
    nlohmann::json e = nlohmann::json::array();
    for (auto [u, v] : g.edges) e.push_back({g.vertices[u], g.vertices[v]});
    return {{"vertices", g.vertices}, {"edges", e}};
}

// One-line adjacency: whitespace-separated tokens, "u-v" an edge, "v" a lone vertex.
// Vertices are numbered in order of first appearance. Example: "a-b b-c c-d e".
inline DefiningGraph graph_from_line(const std::string& line) {
    DefiningGraph g;
    auto vertex = [&](const std::string& name) {
        if (name.empty()) fail(ErrorKind::Schema, "empty vertex name in '" + line + "'");
        int i = g.index_of(name);
        return i >= 0 ? i : g.add_vertex(name);
    };
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        auto dash = tok.find('-');
        if (dash == std::string::npos) {
            vertex(tok);
            continue;
        }
        int u = vertex(tok.substr(0, dash)), v = vertex(tok.substr(dash + 1));
        if (!g.adjacent(u, v) || u == v) g.add_edge(u, v);
    }
    return g;
}

// CSV with header "graph,class,witness"; the witness is the join bipartition if any.
inline std::string classify_csv(const std::vector<std::pair<std::string, DefiningGraph>>& batch) {
    std::string out = "graph,class,witness\n";
    for (const auto& [id, g] : batch) {
        auto c = classify(g);
        std::string w = g.size() >= 2 ? witness_string(g, is_join(g)) : "";
        out += id + "," + to_string(c) + "," + w + "\n";
    }
    return out;
}

}  // namespace omega::raag
