#pragma once

// Versioned run configuration: {"schema", "command", "seed", "output", "params"}.
// Parameters are declared per command with types, defaults and range checks; every
// violation is a schema error naming the JSON path.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega/core/error.hpp"
#include "omega/core/format.hpp"

namespace omega::cli {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "omega.run_config/1";

enum class ParamType { Int, Number, String, Bool, IntList, NumberOrString };

struct ParamSpec {
    std::string name;
    ParamType type;
    ojson fallback;  // null: optional without default
    std::function<std::string(const ojson&)> check = nullptr;  // empty string when valid
    std::string help;
};

namespace detail {

inline std::function<std::string(const ojson&)> positive() {
    return [](const ojson& v) { return v.get<double>() > 0 ? "" : "must be positive"; };
}
inline std::function<std::string(const ojson&)> unit_interval() {
    return [](const ojson& v) {
        double x = v.get<double>();
        return x > 0 && x <= 1 ? "" : "must lie in (0, 1]";
    };
}
inline std::function<std::string(const ojson&)> int_range(int lo, int hi) {
    return [lo, hi](const ojson& v) {
        auto x = v.get<long long>();
        return x >= lo && x <= hi ? "" : "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    };
}
inline std::function<std::string(const ojson&)> one_of(std::vector<std::string> opts) {
    return [opts](const ojson& v) {
        for (const auto& o : opts)
            if (v.get<std::string>() == o) return std::string();
        std::string s = "must be one of";
        for (const auto& o : opts) s += " '" + o + "'";
        return s;
    };
}

}  // namespace detail

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

inline const std::vector<CommandSpec>& command_specs() {
    using namespace detail;
    using T = ParamType;
    static const std::vector<CommandSpec> specs = {
        {"cantor homeo",
         "finite-depth homeomorphism between two omega-Cantor chains",
         {{"x", T::String, "iterated_gluing", nullptr, "first chain: iterated_gluing, alternate_gluing or a chain JSON file"},
          {"y", T::String, "alternate_gluing", nullptr, "second chain"},
          {"length", T::Int, 3, int_range(1, 6), "number of chain stages for built-in chains"},
          {"depth", T::Int, 4, int_range(0, 8), "mesh exponent k (pieces of diameter <= 2^-k)"}}},
        {"cantor check",
         "validate a chain: perfect stages and entwined links",
         {{"chain", T::String, "iterated_gluing", nullptr, "iterated_gluing, alternate_gluing or a chain JSON file"},
          {"length", T::Int, 3, int_range(1, 6), "number of chain stages for built-in chains"}}},
        {"raag classify",
         "Morse boundary class of right-angled Artin groups",
         {{"graph", T::String, nullptr, nullptr, "defining graph JSON file"},
          {"line", T::String, nullptr, nullptr, "inline graph such as 'a-b b-c c-d'"},
          {"graphs", T::String, nullptr, nullptr, "file with one inline graph per line"}}},
        {"kleinian shadows",
         "parabolic points, shadow balls and the separation check",
         {{"preset", T::String, "psl2_zi", nullptr, "group preset name or JSON file"},
          {"lambda", T::NumberOrString, "lambda0", nullptr, "shadow scale in (0, 1], or 'lambda0' for the bisected constant"},
          {"r_min", T::Number, 0.01, positive(), "smallest shadow radius enumerated"},
          {"ratio", T::Number, 100, [](const ojson& v) { return v.get<double>() > 1 ? "" : "must exceed 1"; },
           "comparability ratio for separation"},
          {"max_c2", T::Number, 100, [](const ojson& v) { return v.get<double>() >= 0 ? "" : "must be nonnegative"; },
           "restrict separation to |c|^2 <= max_c2 (0: no restriction)"}}},
        {"sierpinski build",
         "peripheral circle at infinity or a full Sierpinski curve approximation",
         {{"preset", T::String, "psl2_zi", nullptr, "group preset name or JSON file"},
          {"mode", T::String, "circle", one_of({"circle", "curve"}), "circle: one circle around infinity; curve: all circles"},
          {"lambda", T::Number, 0.02, unit_interval(), "shadow scale"},
          {"depth", T::Int, 2, int_range(0, 4), "detour stages"},
          {"r_min", T::Number, 0.05, positive(), "curve mode: smallest shadow radius enumerated"},
          {"grid_samples", T::Int, 4000, int_range(0, 1000000), "curve mode: containment sample points"},
          {"threads", T::Int, 0, int_range(0, 256), "worker threads (0: hardware)"}}},
        {"sierpinski entwine",
         "two strata, entwinement and the complement decomposition",
         {{"preset", T::String, "psl2_zi", nullptr, "group preset name or JSON file"},
          {"lambda1", T::Number, 0.02, unit_interval(), "outer stratum scale"},
          {"lambda2", T::Number, 0.004, unit_interval(), "inner stratum scale, at most lambda1/4"},
          {"depth", T::Int, 1, int_range(0, 3), "detour stages"},
          {"r_min", T::Number, 0.05, positive(), "smallest shadow radius enumerated"},
          {"tol", T::Number, 1e-6, positive(), "intersection tolerance"},
          {"grid_samples", T::Int, 4000, int_range(0, 1000000), "containment sample points"},
          {"threads", T::Int, 0, int_range(0, 256), "worker threads (0: hardware)"}}},
        {"bass-serre probe",
         "quasi-isometric fit of tree projections and the Morse excursion probe",
         {{"preset", T::String, "z_free_z", nullptr, "graph-of-groups preset name or JSON file"},
          {"radius", T::Int, 12, int_range(0, 14), "Cayley ball radius"},
          {"d_bounds", T::IntList, ojson::array({1, 2, 3}), nullptr, "vertex-intersection bounds D to fit"},
          {"morse_samples", T::Int, 256, int_range(0, 100000), "sampled detours per fit"},
          {"max_detour", T::Int, 3, int_range(1, 8), "longest detour word"},
          {"threads", T::Int, 1, int_range(1, 256), "worker threads for the fit"}}},
    };
    return specs;
}

inline const CommandSpec* find_command(const std::string& name) {
    for (const auto& c : command_specs())
        if (c.name == name) return &c;
    return nullptr;
}

struct RunConfig {
    std::string command;
    std::uint64_t seed = 1;
    std::string output;  // run directory below the output root
    ojson params;        // resolved: every declared parameter with a value present
    ojson to_json() const {
        ojson j;
        j["schema"] = kConfigSchema;
        j["command"] = command;
        j["seed"] = seed;
        j["output"] = output;
        j["params"] = params;
        return j;
    }
};

inline std::string default_output(const std::string& command) {
    std::string s;
    for (char c : command) s += c == ' ' ? '_' : c;
    return s;
}

inline RunConfig parse_config(const ojson& j) {
    if (!j.is_object()) fail(ErrorKind::Schema, "$: expected an object");
    if (!j.contains("schema")) fail(ErrorKind::Schema, "$.schema missing");
    if (!j["schema"].is_string() || j["schema"].get<std::string>() != kConfigSchema)
        fail(ErrorKind::Schema, "$.schema: expected '" + std::string(kConfigSchema) + "'");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "schema" && it.key() != "command" && it.key() != "seed" && it.key() != "output" && it.key() != "params")
            fail(ErrorKind::Schema, "$." + it.key() + ": unknown field");
    if (!j.contains("command")) fail(ErrorKind::Schema, "$.command missing");
    if (!j["command"].is_string()) fail(ErrorKind::Schema, "$.command must be a string");
    RunConfig c;
    c.command = j["command"].get<std::string>();
    const CommandSpec* spec = find_command(c.command);
    if (!spec) fail(ErrorKind::Schema, "$.command: unknown command '" + c.command + "'");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) fail(ErrorKind::Schema, "$.seed must be a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    c.output = default_output(c.command);
    if (j.contains("output")) {
        if (!j["output"].is_string() || j["output"].get<std::string>().empty())
            fail(ErrorKind::Schema, "$.output must be a non-empty string");
        c.output = j["output"].get<std::string>();
        if (c.output.find("..") != std::string::npos || c.output.front() == '/')
            fail(ErrorKind::Schema, "$.output must be a relative path inside the output root");
    }
    ojson given = j.contains("params") ? j["params"] : ojson::object();
    if (!given.is_object()) fail(ErrorKind::Schema, "$.params must be an object");
    for (auto it = given.begin(); it != given.end(); ++it) {
        bool known = false;
        for (const auto& p : spec->params) known = known || p.name == it.key();
        if (!known) fail(ErrorKind::Schema, "$.params." + it.key() + ": unknown parameter for '" + c.command + "'");
    }
    c.params = ojson::object();
    for (const auto& p : spec->params) {
        const std::string path = "$.params." + p.name;
        if (!given.contains(p.name)) {
            if (!p.fallback.is_null()) c.params[p.name] = p.fallback;
            continue;
        }
        const ojson& v = given[p.name];
        bool ok = false;
        switch (p.type) {
            case ParamType::Int: ok = v.is_number_integer(); break;
            case ParamType::Number: ok = v.is_number() && std::isfinite(v.get<double>()); break;
            case ParamType::String: ok = v.is_string() && !v.get<std::string>().empty(); break;
            case ParamType::Bool: ok = v.is_boolean(); break;
            case ParamType::IntList:
                ok = v.is_array() && !v.empty();
                for (const auto& e : v) ok = ok && e.is_number_integer() && e.get<long long>() >= 0;
                break;
            case ParamType::NumberOrString: ok = v.is_string() || (v.is_number() && std::isfinite(v.get<double>())); break;
        }
        if (!ok) {
            const char* want[] = {"an integer", "a finite number", "a non-empty string", "a boolean",
                                  "a non-empty array of nonnegative integers", "a number or a string"};
            fail(ErrorKind::Schema, path + " must be " + want[static_cast<int>(p.type)]);
        }
        if (p.check) {
            auto msg = p.check(v);
            if (!msg.empty()) fail(ErrorKind::Schema, path + " " + msg);
        }
        c.params[p.name] = v;
    }
    return c;
}

}  // namespace omega::cli
