#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega/core/error.hpp"

namespace omega::bass_serre {

// Words are strings over single letters: 'a' is a generator, 'A' its inverse.
using Word = std::string;

enum class VertexGroupKind { Trivial, Z, Z2 };

inline int rank(VertexGroupKind k) { return k == VertexGroupKind::Trivial ? 0 : k == VertexGroupKind::Z ? 1 : 2; }

inline const char* to_string(VertexGroupKind k) {
    switch (k) {
        case VertexGroupKind::Trivial: return "trivial";
        case VertexGroupKind::Z: return "Z";
        case VertexGroupKind::Z2: return "Z2";
    }
    return "?";
}

inline VertexGroupKind kind_from_string(const std::string& s) {
    if (s == "trivial") return VertexGroupKind::Trivial;
    if (s == "Z") return VertexGroupKind::Z;
    if (s == "Z2") return VertexGroupKind::Z2;
    fail(ErrorKind::Schema, "unknown vertex group '" + s + "' (expected trivial, Z or Z2)");
}

struct VertexGroup {
    std::string name;
    VertexGroupKind kind = VertexGroupKind::Z;
    std::vector<char> generators;  // standard generators of the free abelian group
};

// Edge group generated by `generators`; each is included into both endpoint groups by
// the generator of the same name. A stable letter is listed only for non-tree edges.
struct EdgeGroup {
    int from = 0, to = 1;
    VertexGroupKind kind = VertexGroupKind::Trivial;
    std::vector<char> generators;
    std::optional<char> stable_letter;
};

struct GraphOfGroupsPreset {
    std::string name;
    std::vector<VertexGroup> vertices;
    std::vector<EdgeGroup> edges;
};

inline bool is_generator(char c) { return c >= 'a' && c <= 'z'; }
inline char inverse(char c) { return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : static_cast<char>(std::tolower(c)); }
inline char base(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

inline Word inverse(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (auto& c : out) c = inverse(c);
    return out;
}

inline void validate(const GraphOfGroupsPreset& G) {
    if (G.vertices.size() != 2 || G.edges.size() != 1)
        fail(ErrorKind::Precondition, "preset '" + G.name + "': only one-edge graphs of groups (amalgams) are supported");
    std::set<char> seen;
    for (const auto& v : G.vertices) {
        if (static_cast<int>(v.generators.size()) != rank(v.kind))
            fail(ErrorKind::Precondition, "vertex '" + v.name + "': " + to_string(v.kind) + " needs " +
                                              std::to_string(rank(v.kind)) + " generators");
        std::set<char> local;
        for (char g : v.generators) {
            if (!is_generator(g)) fail(ErrorKind::Precondition, "vertex '" + v.name + "': generators must be lowercase letters");
            if (!local.insert(g).second) fail(ErrorKind::Precondition, "vertex '" + v.name + "': repeated generator");
        }
    }
    const auto& e = G.edges[0];
    if (e.from == e.to || e.from < 0 || e.to < 0 || e.from > 1 || e.to > 1)
        fail(ErrorKind::Precondition, "edge endpoints must be the two distinct vertices");
    if (e.stable_letter) fail(ErrorKind::Precondition, "a tree edge carries no stable letter");
    if (static_cast<int>(e.generators.size()) != rank(e.kind))
        fail(ErrorKind::Precondition, std::string("edge group ") + to_string(e.kind) + " needs " + std::to_string(rank(e.kind)) + " generators");
    std::set<char> eg(e.generators.begin(), e.generators.end());
    if (eg.size() != e.generators.size()) fail(ErrorKind::Precondition, "edge inclusion is not injective on generators");
    for (char g : e.generators)
        for (int v : {e.from, e.to}) {
            const auto& gens = G.vertices[v].generators;
            if (std::find(gens.begin(), gens.end(), g) == gens.end())
                fail(ErrorKind::Precondition, std::string("edge generator '") + g + "' is not a generator of vertex '" + G.vertices[v].name + "'");
        }
    // Letters shared by both vertices must be edge generators.
    for (char g : G.vertices[0].generators) {
        const auto& other = G.vertices[1].generators;
        if (std::find(other.begin(), other.end(), g) != other.end() && !eg.count(g))
            fail(ErrorKind::Precondition, std::string("generator '") + g + "' is shared but not in the edge group");
    }
}

inline GraphOfGroupsPreset free_product_zz() {
    return {"Z*Z", {{"A", VertexGroupKind::Z, {'a'}}, {"B", VertexGroupKind::Z, {'b'}}}, {{0, 1, VertexGroupKind::Trivial, {}, {}}}};
}
inline GraphOfGroupsPreset free_product_z2z2() {
    return {"Z2*Z2",
            {{"A", VertexGroupKind::Z2, {'a', 'c'}}, {"B", VertexGroupKind::Z2, {'b', 'd'}}},
            {{0, 1, VertexGroupKind::Trivial, {}, {}}}};
}
inline GraphOfGroupsPreset amalgam_z2_z_z2() {
    return {"Z2*_Z Z2",
            {{"A", VertexGroupKind::Z2, {'a', 'c'}}, {"B", VertexGroupKind::Z2, {'b', 'c'}}},
            {{0, 1, VertexGroupKind::Z, {'c'}, {}}}};
}

inline std::vector<GraphOfGroupsPreset> shipped_presets() { return {free_product_zz(), free_product_z2z2(), amalgam_z2_z_z2()}; }

// ---- JSON ----

inline constexpr const char* kPresetSchema = "omega.graph_of_groups/1";

inline std::vector<char> letters_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) fail(ErrorKind::Schema, path + ": expected an array of one-letter strings");
    std::vector<char> out;
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string() || j[i].get<std::string>().size() != 1)
            fail(ErrorKind::Schema, path + "[" + std::to_string(i) + "]: expected a one-letter string");
        out.push_back(j[i].get<std::string>()[0]);
    }
    return out;
}

inline GraphOfGroupsPreset preset_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::Schema, "$: expected an object");
    if (!j.contains("schema") || j["schema"] != kPresetSchema)
        fail(ErrorKind::Schema, std::string("$.schema: expected \"") + kPresetSchema + "\"");
    GraphOfGroupsPreset G;
    if (!j.contains("name") || !j["name"].is_string()) fail(ErrorKind::Schema, "$.name: expected a string");
    G.name = j["name"];
    if (!j.contains("vertices") || !j["vertices"].is_array()) fail(ErrorKind::Schema, "$.vertices: expected an array");
    std::map<std::string, int> index;
    for (size_t i = 0; i < j["vertices"].size(); ++i) {
        const auto& v = j["vertices"][i];
        std::string p = "$.vertices[" + std::to_string(i) + "]";
        if (!v.is_object() || !v.contains("name") || !v["name"].is_string()) fail(ErrorKind::Schema, p + ".name: expected a string");
        if (!v.contains("group") || !v["group"].is_string()) fail(ErrorKind::Schema, p + ".group: expected a string");
        VertexGroup vg{v["name"], kind_from_string(v["group"]), letters_from_json(v.value("generators", nlohmann::json::array()), p + ".generators")};
        index[vg.name] = static_cast<int>(G.vertices.size());
        G.vertices.push_back(vg);
    }
    if (!j.contains("edges") || !j["edges"].is_array()) fail(ErrorKind::Schema, "$.edges: expected an array");
    for (size_t i = 0; i < j["edges"].size(); ++i) {
        const auto& e = j["edges"][i];
        std::string p = "$.edges[" + std::to_string(i) + "]";
        for (const char* k : {"from", "to", "group"})
            if (!e.contains(k) || !e[k].is_string()) fail(ErrorKind::Schema, p + "." + k + ": expected a string");
        if (!index.count(e["from"]) || !index.count(e["to"])) fail(ErrorKind::Schema, p + ": unknown endpoint vertex");
        EdgeGroup eg{index[e["from"]], index[e["to"]], kind_from_string(e["group"]),
                     letters_from_json(e.value("generators", nlohmann::json::array()), p + ".generators"), {}};
        if (e.contains("stable_letter")) eg.stable_letter = letters_from_json(nlohmann::json::array({e["stable_letter"]}), p + ".stable_letter")[0];
        G.edges.push_back(eg);
    }
    validate(G);
    return G;
}

inline nlohmann::ordered_json to_json(const GraphOfGroupsPreset& G) {
    auto letters = [](const std::vector<char>& v) {
        auto a = nlohmann::ordered_json::array();
        for (char c : v) a.push_back(std::string(1, c));
        return a;
    };
    nlohmann::ordered_json j;
    j["schema"] = kPresetSchema;
    j["name"] = G.name;
    j["vertices"] = nlohmann::ordered_json::array();
    for (const auto& v : G.vertices) j["vertices"].push_back({{"name", v.name}, {"group", to_string(v.kind)}, {"generators", letters(v.generators)}});
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : G.edges) {
        nlohmann::ordered_json je{{"from", G.vertices[e.from].name}, {"to", G.vertices[e.to].name}, {"group", to_string(e.kind)},
                                  {"generators", letters(e.generators)}};
        if (e.stable_letter) je["stable_letter"] = std::string(1, *e.stable_letter);
        j["edges"].push_back(je);
    }
    return j;
}

inline GraphOfGroupsPreset load_preset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open preset file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, path + ": " + e.what());
    }
    return preset_from_json(j);
}

// ---- the amalgam as a partially commutative group ----

// A *_C B with A, B free abelian on letter sets and C generated by shared letters. Two
// letters commute iff some vertex group contains both.
class Amalgam {
public:
    explicit Amalgam(GraphOfGroupsPreset G) : G_(std::move(G)) {
        validate(G_);
        std::set<char> all;
        for (const auto& v : G_.vertices) all.insert(v.generators.begin(), v.generators.end());
        letters_.assign(all.begin(), all.end());
        for (char x : letters_) {
            alphabet_.push_back(x);
            alphabet_.push_back(inverse(x));
        }
        for (int v = 0; v < 2; ++v)
            for (char x : G_.vertices[v].generators) member_[v][idx(x)] = true;
        for (char x : G_.edges[0].generators) edge_[idx(x)] = true;
    }

    const GraphOfGroupsPreset& preset() const { return G_; }
    const std::vector<char>& generators() const { return letters_; }
    // Generators and inverses, in the fixed order a, A, b, B, ...
    const std::vector<char>& alphabet() const { return alphabet_; }

    bool commute(char x, char y) const {
        int i = idx(base(x)), j = idx(base(y));
        return (member_[0][i] && member_[0][j]) || (member_[1][i] && member_[1][j]);
    }
    bool in_vertex(int v, char x) const { return member_[v][idx(base(x))]; }
    bool in_edge(char x) const { return edge_[idx(base(x))]; }
    bool valid_letter(char x) const {
        return std::find(letters_.begin(), letters_.end(), base(x)) != letters_.end() && std::isalpha(static_cast<unsigned char>(x));
    }

    // Cancel x ... x^-1 pairs whose middle commutes with x; the result is geodesic.
    Word reduce(const Word& w) const {
        Word out;
        for (char x : w) {
            if (!valid_letter(x)) fail(ErrorKind::Precondition, std::string("letter '") + x + "' is not in the preset alphabet");
            bool cancelled = false;
            for (int k = static_cast<int>(out.size()) - 1; k >= 0; --k) {
                if (out[k] == inverse(x)) {
                    out.erase(out.begin() + k);
                    cancelled = true;
                    break;
                }
                if (!commute(out[k], x) || out[k] == x) break;
            }
            if (!cancelled) out.push_back(x);
        }
        return out;
    }

    // Canonical form: reduce, then Foata layers (each letter in the earliest layer allowed
    // by the letters before it that it does not commute with), letters sorted within layers.
    Word normal_form(const Word& w) const {
        Word r = reduce(w);
        const size_t n = r.size();
        // Sort keys (level, rank, position) packed into one integer; stable by position.
        std::vector<long> heap_keys;
        std::array<long, 64> stack_keys;
        long* key = stack_keys.data();
        if (n > stack_keys.size()) {
            heap_keys.resize(n);
            key = heap_keys.data();
        }
        for (size_t i = 0; i < n; ++i) {
            long level = 0;
            for (size_t j = 0; j < i; ++j)
                if (!commute(r[i], r[j]) || base(r[i]) == base(r[j])) level = std::max(level, (key[j] >> 32) + 1);
            key[i] = (level << 32) | (long(letter_rank(r[i])) << 16) | long(i);
        }
        std::sort(key, key + n);
        Word out(n, ' ');
        for (size_t i = 0; i < n; ++i) out[i] = r[key[i] & 0xffff];
        return out;
    }

    int length(const Word& w) const { return static_cast<int>(reduce(w).size()); }
    int distance(const Word& g, const Word& h) const { return length(inverse(g) + h); }

    // Shortest representative of the coset g<S>: strip letters of S that move to the end.
    Word coset_key(const Word& g, const std::function<bool(char)>& in_subgroup) const {
        Word r = reduce(g);
        for (bool changed = true; changed;) {
            changed = false;
            for (int k = static_cast<int>(r.size()) - 1; k >= 0; --k) {
                if (!in_subgroup(r[k])) continue;
                bool free = true;
                for (size_t t = k + 1; t < r.size() && free; ++t) free = commute(r[k], r[t]);
                if (free) {
                    r.erase(r.begin() + k);
                    changed = true;
                    break;
                }
            }
        }
        return normal_form(r);
    }
    Word vertex_coset(const Word& g, int v) const { return coset_key(g, [&](char x) { return in_vertex(v, x); }); }
    Word edge_coset(const Word& g) const { return coset_key(g, [&](char x) { return in_edge(x); }); }

    // Distance in the Bass-Serre tree between the midpoints of the edges gC and hC: the
    // number of syllables of g^-1 h once edge letters are dropped.
    int tree_distance(const Word& g, const Word& h) const {
        Word r = reduce(inverse(g) + h);
        int syllables = 0, last = -1;
        for (char x : r) {
            if (in_edge(x)) continue;
            int v = in_vertex(0, x) ? 0 : 1;
            if (v != last) ++syllables, last = v;
        }
        return syllables;
    }

private:
    int idx(char x) const { return x - 'a'; }
    int letter_rank(char x) const { return 2 * idx(base(x)) + (std::isupper(static_cast<unsigned char>(x)) ? 1 : 0); }

    GraphOfGroupsPreset G_;
    std::vector<char> letters_, alphabet_;
    std::array<std::array<bool, 26>, 2> member_{};
    std::array<bool, 26> edge_{};
};

}  // namespace omega::bass_serre
