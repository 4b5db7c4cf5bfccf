#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega/kleinian/horoball.hpp"

namespace omega::kleinian {

struct GroupPreset {
    std::string name;
    std::vector<MobiusMap> generators;
    double cusp_height = 1;  // horoball at ∞
    double lambda0 = 0;      // recorded separation constant, 0 if unknown
    std::vector<Complex> cusp_translations;  // lattice of the stabiliser of ∞, empty if not declared
};

inline void validate_preset(const GroupPreset& g) {
    if (g.generators.empty()) fail(ErrorKind::Structural, "preset '" + g.name + "' has no generators");
    for (size_t i = 0; i < g.generators.size(); ++i)
        if (!g.generators[i].normalized(1e-12))
            fail(ErrorKind::Structural, "generator " + std::to_string(i) + " of '" + g.name + "' is not normalized");
    if (!(g.cusp_height > 0)) fail(ErrorKind::Structural, "cusp height must be positive");
    if (!g.cusp_translations.empty()) {
        if (g.cusp_translations.size() != 2) fail(ErrorKind::Structural, "cusp translations must be two lattice vectors");
        auto [u, v] = std::pair{g.cusp_translations[0], g.cusp_translations[1]};
        if (std::abs(u.real() * v.imag() - u.imag() * v.real()) < 1e-12)
            fail(ErrorKind::Structural, "cusp translations are linearly dependent");
    }
}

inline GroupPreset psl2_zi() {
    Complex i(0, 1);
    GroupPreset g;
    g.name = "psl2_zi";
    g.generators = {
        {1, 1, 0, 1},   // z + 1
        {1, i, 0, 1},   // z + i
        {0, -1, 1, 0},  // -1/z
        {i, 0, 0, -i},  // -z
    };
    g.cusp_translations = {1, i};
    return g;
}

namespace detail {

inline Complex complex_from_json(const nlohmann::json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(ErrorKind::Schema, path + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// {"schema_version": 1, "name": ..., "cusp_height": 1,
//  "generators": [[[re,im],[re,im],[re,im],[re,im]], ...]}  (entries a, b, c, d)
inline GroupPreset preset_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::Schema, "$: expected an object");
    if (!j.contains("schema_version") || j["schema_version"] != 1)
        fail(ErrorKind::Schema, "$.schema_version: expected 1");
    GroupPreset g;
    if (!j.contains("name") || !j["name"].is_string()) fail(ErrorKind::Schema, "$.name: expected a string");
    g.name = j["name"].get<std::string>();
    if (j.contains("cusp_height")) {
        if (!j["cusp_height"].is_number()) fail(ErrorKind::Schema, "$.cusp_height: expected a number");
        g.cusp_height = j["cusp_height"].get<double>();
    }
    if (j.contains("lambda0")) {
        if (!j["lambda0"].is_number()) fail(ErrorKind::Schema, "$.lambda0: expected a number");
        g.lambda0 = j["lambda0"].get<double>();
    }
    if (j.contains("cusp_translations")) {
        const auto& t = j["cusp_translations"];
        if (!t.is_array()) fail(ErrorKind::Schema, "$.cusp_translations: expected an array");
        for (size_t k = 0; k < t.size(); ++k)
            g.cusp_translations.push_back(
                detail::complex_from_json(t[k], "$.cusp_translations[" + std::to_string(k) + "]"));
    }
    if (!j.contains("generators") || !j["generators"].is_array())
        fail(ErrorKind::Schema, "$.generators: expected an array");
    for (size_t k = 0; k < j["generators"].size(); ++k) {
        const auto& m = j["generators"][k];
        std::string path = "$.generators[" + std::to_string(k) + "]";
        if (!m.is_array() || m.size() != 4) fail(ErrorKind::Schema, path + ": expected 4 entries a, b, c, d");
        Complex e[4];
        for (int t = 0; t < 4; ++t) e[t] = detail::complex_from_json(m[t], path + "[" + std::to_string(t) + "]");
        g.generators.push_back(MobiusMap::make(e[0], e[1], e[2], e[3]));
    }
    validate_preset(g);
    return g;
}

inline nlohmann::json to_json(const GroupPreset& g) {
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& m : g.generators) {
        nlohmann::json e = nlohmann::json::array();
        for (Complex v : {m.a, m.b, m.c, m.d}) e.push_back({v.real(), v.imag()});
        gens.push_back(e);
    }
    nlohmann::json j = {{"schema_version", 1}, {"name", g.name}, {"cusp_height", g.cusp_height}, {"generators", gens}};
    if (g.lambda0 > 0) j["lambda0"] = g.lambda0;
    if (!g.cusp_translations.empty()) {
        nlohmann::json t = nlohmann::json::array();
        for (Complex v : g.cusp_translations) t.push_back({v.real(), v.imag()});
        j["cusp_translations"] = t;
    }
    return j;
}

inline GroupPreset load_preset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open preset file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, "preset '" + path + "' is not valid JSON: " + e.what());
    }
    return preset_from_json(j);
}

}  // namespace omega::kleinian
