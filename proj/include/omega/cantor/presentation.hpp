#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega/core/error.hpp"

namespace omega::cantor {

using Label = int;
using Word = std::vector<Label>;

// Boundary of a finite-state rooted tree. out[s] maps label -> target state.
struct TreePresentation {
    std::vector<std::string> names;
    int root = 0;
    std::vector<std::map<Label, int>> out;

    int size() const { return static_cast<int>(names.size()); }

    int find(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        return it == names.end() ? -1 : static_cast<int>(it - names.begin());
    }

    int add_state(const std::string& name) {
        if (find(name) >= 0) fail(ErrorKind::Structural, "duplicate state '" + name + "'");
        names.push_back(name);
        out.emplace_back();
        return size() - 1;
    }

    void add_edge(int from, Label label, int to) {
        if (from < 0 || from >= size() || to < 0 || to >= size())
            fail(ErrorKind::Structural, "edge references unknown state");
        if (label < 0) fail(ErrorKind::Structural, "negative label on state '" + names[from] + "'");
        auto [it, fresh] = out[from].emplace(label, to);
        if (!fresh && it->second != to)
            fail(ErrorKind::Structural,
                 "state '" + names[from] + "' has two edges labelled " + std::to_string(label));
    }

    void add_edge(const std::string& from, Label label, const std::string& to) {
        int f = find(from), t = find(to);
        if (f < 0) fail(ErrorKind::Structural, "unknown state '" + from + "'");
        if (t < 0) fail(ErrorKind::Structural, "unknown state '" + to + "'");
        add_edge(f, label, t);
    }

    int step(int s, Label l) const {
        auto it = out[s].find(l);
        return it == out[s].end() ? -1 : it->second;
    }

    // State reached by w from the root, or -1 when w is not a path.
    int walk(const Word& w) const { return walk_from(root, w); }

    int walk_from(int s, const Word& w) const {
        for (Label l : w) {
            if (s < 0) return -1;
            s = step(s, l);
        }
        return s;
    }

    bool is_path(const Word& w) const { return walk(w) >= 0; }

    int out_degree(int s) const { return static_cast<int>(out[s].size()); }

    int max_out_degree() const {
        int m = 0;
        for (int s = 0; s < size(); ++s) m = std::max(m, out_degree(s));
        return m;
    }

    bool operator==(const TreePresentation& o) const {
        return names == o.names && root == o.root && out == o.out;
    }
};

using PresentationPtr = std::shared_ptr<const TreePresentation>;

struct ValidationReport {
    bool nonempty = false;
    bool perfect = false;
    // Per state: a label path to a state with >= 2 outgoing labels (empty optional if none).
    std::vector<std::optional<Word>> branch_certificate;
    std::optional<int> violating_state;
};

namespace detail {

inline std::vector<int> reachable_from(const TreePresentation& T, int s0) {
    std::vector<int> seen(T.size(), 0), order;
    std::deque<int> q{s0};
    seen[s0] = 1;
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        order.push_back(s);
        for (auto [l, t] : T.out[s])
            if (!seen[t]) {
                seen[t] = 1;
                q.push_back(t);
            }
    }
    return order;
}

}  // namespace detail

// Structural errors are thrown; perfectness failure is reported, not thrown.
inline ValidationReport validate_presentation(const TreePresentation& T) {
    if (T.size() == 0) fail(ErrorKind::Structural, "presentation has no states");
    if (T.root < 0 || T.root >= T.size()) fail(ErrorKind::Structural, "root out of range");
    if (static_cast<int>(T.out.size()) != T.size()) fail(ErrorKind::Structural, "edge table size mismatch");
    for (int s = 0; s < T.size(); ++s)
        for (auto [l, t] : T.out[s])
            if (t < 0 || t >= T.size()) fail(ErrorKind::Structural, "edge from '" + T.names[s] + "' leaves the state set");

    std::vector<int> reach(T.size(), 0);
    for (int s : detail::reachable_from(T, T.root)) reach[s] = 1;
    for (int s = 0; s < T.size(); ++s)
        if (!reach[s]) fail(ErrorKind::Structural, "unreachable state '" + T.names[s] + "'");
    for (int s = 0; s < T.size(); ++s)
        if (T.out_degree(s) == 0) fail(ErrorKind::Structural, "dead-end state '" + T.names[s] + "'");

    ValidationReport rep;
    rep.nonempty = true;
    rep.branch_certificate.assign(T.size(), std::nullopt);
    // Reverse BFS from branching states gives shortest certificates.
    std::vector<std::vector<std::pair<int, Label>>> rev(T.size());
    for (int s = 0; s < T.size(); ++s)
        for (auto [l, t] : T.out[s]) rev[t].push_back({s, l});
    std::vector<int> next(T.size(), -2);
    std::vector<Label> via(T.size(), -1);
    std::deque<int> q;
    for (int s = 0; s < T.size(); ++s)
        if (T.out_degree(s) >= 2) {
            next[s] = -1;
            q.push_back(s);
        }
    while (!q.empty()) {
        int t = q.front();
        q.pop_front();
        for (auto [s, l] : rev[t])
            if (next[s] == -2) {
                next[s] = t;
                via[s] = l;
                q.push_back(s);
            }
    }
    rep.perfect = true;
    for (int s = 0; s < T.size(); ++s) {
        if (next[s] == -2) {
            rep.perfect = false;
            if (!rep.violating_state) rep.violating_state = s;
            continue;
        }
        Word w;
        for (int c = s; next[c] != -1; c = next[c]) w.push_back(via[c]);
        rep.branch_certificate[s] = w;
    }
    return rep;
}

inline void require_valid_perfect(const TreePresentation& T, const std::string& what) {
    auto rep = validate_presentation(T);
    if (!rep.perfect)
        fail(ErrorKind::Precondition,
             what + " is not perfect at state '" + T.names[*rep.violating_state] + "'");
}

// C is a sub-automaton of D, matched by state names; cmap[c] is the D-state of c.
struct SubPresentation {
    PresentationPtr D;
    PresentationPtr C;
    std::vector<int> cmap;

    SubPresentation(PresentationPtr ambient, PresentationPtr sub) : D(std::move(ambient)), C(std::move(sub)) {
        cmap.resize(C->size());
        for (int c = 0; c < C->size(); ++c) {
            int d = D->find(C->names[c]);
            if (d < 0) fail(ErrorKind::Structural, "sub state '" + C->names[c] + "' missing from ambient");
            cmap[c] = d;
        }
        if (cmap[C->root] != D->root) fail(ErrorKind::Structural, "sub root differs from ambient root");
        for (int c = 0; c < C->size(); ++c)
            for (auto [l, t] : C->out[c])
                if (D->step(cmap[c], l) != cmap[t])
                    fail(ErrorKind::Structural, "sub edge '" + C->names[c] + "' --" + std::to_string(l) +
                                                    "--> '" + C->names[t] + "' is not an ambient edge");
    }

    // True when D-state has a label the C-state lacks.
    bool leaks(int c) const { return D->out_degree(cmap[c]) > C->out_degree(c); }
};

// ---- JSON ----

inline nlohmann::json to_json(const TreePresentation& T) {
    nlohmann::json j;
    j["states"] = T.names;
    j["root"] = T.names[T.root];
    auto edges = nlohmann::json::array();
    for (int s = 0; s < T.size(); ++s)
        for (auto [l, t] : T.out[s]) edges.push_back({{"from", T.names[s]}, {"label", l}, {"to", T.names[t]}});
    j["edges"] = edges;
    return j;
}

inline TreePresentation presentation_from_json(const nlohmann::json& j, const std::string& path = "$") {
    auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Schema, path + "." + key + " missing");
        return j.at(key);
    };
    TreePresentation T;
    const auto& states = need("states");
    if (!states.is_array() || states.empty()) fail(ErrorKind::Schema, path + ".states must be a non-empty array");
    for (const auto& s : states) {
        if (!s.is_string()) fail(ErrorKind::Schema, path + ".states entries must be strings");
        T.add_state(s.get<std::string>());
    }
    const auto& root = need("root");
    if (!root.is_string()) fail(ErrorKind::Schema, path + ".root must be a string");
    T.root = T.find(root.get<std::string>());
    if (T.root < 0) fail(ErrorKind::Schema, path + ".root names no state");
    const auto& edges = need("edges");
    if (!edges.is_array()) fail(ErrorKind::Schema, path + ".edges must be an array");
    for (size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        std::string ep = path + ".edges[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("from") || !e.contains("label") || !e.contains("to") ||
            !e["from"].is_string() || !e["to"].is_string() || !e["label"].is_number_integer())
            fail(ErrorKind::Schema, ep + " needs string from/to and integer label");
        T.add_edge(e["from"].get<std::string>(), e["label"].get<int>(), e["to"].get<std::string>());
    }
    return T;
}

inline std::vector<TreePresentation> chain_from_json(const nlohmann::json& j, const std::string& path = "$") {
    if (!j.is_object() || !j.contains("chain") || !j["chain"].is_array() || j["chain"].empty())
        fail(ErrorKind::Schema, path + ".chain must be a non-empty array");
    std::vector<TreePresentation> out;
    for (size_t i = 0; i < j["chain"].size(); ++i)
        out.push_back(presentation_from_json(j["chain"][i], path + ".chain[" + std::to_string(i) + "]"));
    return out;
}

inline nlohmann::json chain_to_json(const std::vector<TreePresentation>& chain) {
    nlohmann::json j;
    j["chain"] = nlohmann::json::array();
    for (const auto& T : chain) j["chain"].push_back(to_json(T));
    return j;
}

}  // namespace omega::cantor
