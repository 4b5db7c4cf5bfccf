#pragma once

// One run: resolve inputs, compute, collect certificates into a bundle, then write the
// manifest, the bundle and its exports below the output root. Exit codes: 0 when every
// certificate passes, 1 on a certificate failure (a witness file is written), 2 on
// schema, usage and precondition errors.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "omega/bass_serre/probe.hpp"
#include "omega/cantor/entwined.hpp"
#include "omega/cantor/examples.hpp"
#include "omega/cantor/homeo.hpp"
#include "omega/cli/bundle.hpp"
#include "omega/cli/config.hpp"
#include "omega/kleinian/parabolics.hpp"
#include "omega/kleinian/preset.hpp"
#include "omega/raag/raag.hpp"
#include "omega/sierpinski/approx.hpp"

#ifndef OMEGA_VERSION
#define OMEGA_VERSION "0.0.0"
#endif
#ifndef OMEGA_PRESET_DIR
#define OMEGA_PRESET_DIR "presets"
#endif

namespace omega::cli {

namespace fs = std::filesystem;

inline constexpr const char* kManifestSchema = "omega.manifest/1";
inline constexpr const char* kOutputRootEnv = "OMEGA_OUTPUT_ROOT";

inline fs::path output_root() {
    const char* e = std::getenv(kOutputRootEnv);
    return (e && *e) ? fs::path(e) : fs::path("omega-out");
}

// Outcome of a computation: bundle plus certificate verdict.
struct Outcome {
    Bundle bundle;
    bool ok = true;
    ojson witness;                // first failing certificate, when !ok
    std::vector<fs::path> inputs;  // files read
    std::string stdout_text;      // echoed to the terminal
};

struct RunResult {
    int exit_code = 0;
    std::string message;
    fs::path dir;
    std::vector<std::string> files;
};

inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Separation:
        case ErrorKind::Construction:
        case ErrorKind::Decomposition:
        case ErrorKind::Resolution: return 1;
        default: return 2;
    }
}

// ---- inputs ----

inline std::string fnv1a_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline ojson read_json_file(const fs::path& p, const std::string& path) {
    std::ifstream in(p);
    if (!in) fail(ErrorKind::Usage, path + ": cannot open '" + p.string() + "'");
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Schema, path + ": '" + p.string() + "' is not valid JSON");
    }
}

// Named preset in the preset directory, or a file path.
inline fs::path preset_file(const std::string& name) {
    fs::path p = fs::path(OMEGA_PRESET_DIR) / (name + ".json");
    if (name.find('/') == std::string::npos && name.find('.') == std::string::npos && fs::exists(p)) return p;
    return name;
}

inline kleinian::GroupPreset kleinian_preset(const std::string& name, Outcome& o) {
    if (name == "psl2_zi") return kleinian::psl2_zi();
    fs::path p = preset_file(name);
    o.inputs.push_back(p);
    return kleinian::preset_from_json(read_json_file(p, "$.params.preset"));
}

inline bass_serre::GraphOfGroupsPreset bass_serre_preset(const std::string& name, Outcome& o) {
    for (const auto& [key, P] : std::vector<std::pair<std::string, bass_serre::GraphOfGroupsPreset>>{
             {"z_free_z", bass_serre::free_product_zz()},
             {"z2_free_z2", bass_serre::free_product_z2z2()},
             {"z2_amalg_z_z2", bass_serre::amalgam_z2_z_z2()}})
        if (name == key || name == P.name) return P;
    fs::path p = preset_file(name);
    o.inputs.push_back(p);
    return bass_serre::preset_from_json(read_json_file(p, "$.params.preset"));
}

inline std::vector<cantor::TreePresentation> chain_input(const std::string& spec, int length, const std::string& path,
                                                         Outcome& o) {
    if (spec == "iterated_gluing") return cantor::examples::iterated_gluing(length);
    if (spec == "alternate_gluing") return cantor::examples::alternate_gluing(length);
    o.inputs.push_back(spec);
    return cantor::chain_from_json(read_json_file(spec, path));
}

// ---- cantor ----

inline Outcome run_cantor_homeo(const RunConfig& c) {
    using namespace cantor;
    Outcome o;
    const int len = c.params["length"], k = c.params["depth"];
    Chain X = make_chain(chain_input(c.params["x"], len, "$.params.x", o));
    Chain Y = make_chain(chain_input(c.params["y"], len, "$.params.y", o));
    auto roots = omega_schemes(X, Y);
    ojson cert = ojson::object();
    cert["depth"] = k;
    cert["stages"] = ojson::array();
    ojson corr = ojson::array();
    for (size_t n = 0; n < roots.size(); ++n) {
        std::vector<CorrespondenceAtDepth> seq;
        for (int d = 0; d <= k; ++d) seq.push_back(frontier(roots[n], d));
        const auto& top = seq.back();
        auto rep = check_correspondence(top);
        bool refines_coarser = k == 0 || refines(top, seq[k - 1]);
        bool restricts = true;
        if (n > 0) {
            SubPresentation S(X.spaces[n], X.spaces[n - 1]), Sp(Y.spaces[n], Y.spaces[n - 1]);
            auto prev = frontier(roots[n - 1], k);
            auto r = restrict_correspondence(top, S, Sp);
            restricts = r.has_value() && refines(*r, prev);
        }
        ojson s;
        s["stage"] = n + 1;
        s["pairs"] = top.pairs.size();
        s["left_partition"] = rep.left_partition;
        s["right_partition"] = rep.right_partition;
        s["bijection"] = rep.bijection;
        s["mesh"] = rep.mesh_ok;
        s["refines_depth_below"] = refines_coarser;
        s["restricts_to_previous_stage"] = restricts;
        bool good = rep.ok() && refines_coarser && restricts;
        s["pass"] = good;
        if (!good && o.ok) o.ok = false, o.witness = s;
        cert["stages"].push_back(s);
        corr.push_back(nlohmann::ordered_json::parse(to_json(top).dump()));
        o.bundle.dot.emplace_back("refinement_stage" + std::to_string(n + 1), refinement_dot(seq));
    }
    cert["pass"] = o.ok;
    o.bundle.json.emplace_back("correspondence", ojson{{"depth", k}, {"stages", corr}});
    o.bundle.json.emplace_back("certificate", cert);
    return o;
}

inline Outcome run_cantor_check(const RunConfig& c) {
    using namespace cantor;
    Outcome o;
    auto chain = chain_input(c.params["chain"], c.params["length"], "$.params.chain", o);
    Chain X = make_chain(chain);
    ojson cert;
    cert["stages"] = ojson::array();
    for (size_t i = 0; i < chain.size(); ++i) {
        auto v = validate_presentation(chain[i]);
        ojson s{{"stage", i + 1}, {"states", chain[i].size()}, {"nonempty", v.nonempty}, {"perfect", v.perfect}};
        if (v.violating_state) s["violating_state"] = chain[i].names[*v.violating_state];
        if (!(v.nonempty && v.perfect) && o.ok) o.ok = false, o.witness = s;
        cert["stages"].push_back(s);
    }
    cert["links"] = ojson::array();
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
        ojson l{{"from", i + 1}, {"to", i + 2}};
        auto vi = validate_presentation(chain[i]), vj = validate_presentation(chain[i + 1]);
        if (vi.nonempty && vi.perfect && vj.nonempty && vj.perfect) {
            auto e = is_entwined(SubPresentation(X.spaces[i + 1], X.spaces[i]));
            l["entwined"] = e.entwined;
            if (e.witness) l["witness_cylinder"] = word_string(*e.witness);
            if (!e.entwined && o.ok) o.ok = false, o.witness = l;
        } else {
            l["entwined"] = nullptr;
        }
        cert["links"].push_back(l);
    }
    cert["pass"] = o.ok;
    o.bundle.json.emplace_back("chain_certificate", cert);
    return o;
}

// ---- raag ----

inline std::string graph_dot(const raag::DefiningGraph& g) {
    std::string s = "graph defining {\n  node [shape=circle, fontsize=10];\n";
    for (const auto& v : g.vertices) s += "  \"" + v + "\";\n";
    for (auto [u, v] : g.edges) s += "  \"" + g.vertices[u] + "\" -- \"" + g.vertices[v] + "\";\n";
    return s + "}\n";
}

inline Outcome run_raag_classify(const RunConfig& c) {
    Outcome o;
    int given = c.params.contains("graph") + c.params.contains("line") + c.params.contains("graphs");
    if (given != 1) fail(ErrorKind::Schema, "$.params: exactly one of graph, line, graphs is required");
    std::vector<std::pair<std::string, raag::DefiningGraph>> batch;
    if (c.params.contains("graph")) {
        fs::path p = c.params["graph"].get<std::string>();
        o.inputs.push_back(p);
        batch.emplace_back(p.stem().string(), raag::graph_from_json(read_json_file(p, "$.params.graph")));
    } else if (c.params.contains("line")) {
        batch.emplace_back("graph", raag::graph_from_line(c.params["line"]));
    } else {
        fs::path p = c.params["graphs"].get<std::string>();
        o.inputs.push_back(p);
        std::ifstream in(p);
        if (!in) fail(ErrorKind::Usage, "$.params.graphs: cannot open '" + p.string() + "'");
        std::string line;
        for (int k = 1; std::getline(in, line); ++k)
            if (line.find_first_not_of(" \t\r") != std::string::npos) batch.emplace_back("line" + std::to_string(k), raag::graph_from_line(line));
    }
    auto csv = raag::classify_csv(batch);
    o.bundle.csv.emplace_back("classify", csv);
    ojson rows = ojson::array();
    for (const auto& [id, g] : batch) {
        ojson r{{"graph", id}, {"vertices", g.size()}, {"edges", g.edges.size()}, {"class", raag::to_string(raag::classify(g))}};
        if (g.size() >= 2) {
            auto j = raag::is_join(g);
            r["join"] = j.join;
            if (j.join) r["join_witness"] = raag::witness_string(g, j);
        }
        rows.push_back(r);
    }
    o.bundle.json.emplace_back("classification", rows);
    if (batch.size() == 1) o.bundle.dot.emplace_back("graph", graph_dot(batch[0].second));
    o.stdout_text = csv;
    return o;
}

// ---- figures ----

inline double nice_extent(double m) {
    double e = std::pow(10.0, std::floor(std::log10(std::max(m, 1e-12))));
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * e >= m) return f * e;
    return 10 * e;
}

inline const char* stage_colour(int k) {
    static const char* palette[] = {"#1b5e20", "#0d47a1", "#b71c1c", "#4a148c", "#e65100"};
    return palette[k % 5];
}

inline std::vector<Vec3> cap_loop(const Vec3& c, double rho, int n = 64) {
    auto [e1, e2] = sierpinski::tangent_basis(c);
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i) out.push_back(sierpinski::circle_point(c, e1, e2, rho, 2 * M_PI * i / n));
    return out;
}

// Adds loop to layer if it is visible and not degenerate at the figure's scale.
inline void add_loop(Figure& f, Layer& L, const std::vector<Vec3>& loop) {
    auto p = project_loop(loop, f.projection, f.extent);
    if (p.pts.size() < 3 || !visible(p, f.extent) || planar_extent(p) < f.extent * 1e-3) {
        ++f.omitted;
        return;
    }
    L.lines.push_back(std::move(p));
}

// ---- kleinian ----

inline Outcome run_kleinian_shadows(const RunConfig& c) {
    using namespace kleinian;
    Outcome o;
    auto G = kleinian_preset(c.params["preset"], o);
    const double r_min = c.params["r_min"], ratio = c.params["ratio"], max_c2 = c.params["max_c2"];
    auto pts = enumerate_parabolics(G, r_min);
    auto keep = [&](const ParabolicPoint& q) { return max_c2 <= 0 || q.p.inf || q.c_norm2 <= max_c2 * (1 + 1e-12); };
    double lambda;
    std::string source;
    const auto& lv = c.params["lambda"];
    if (lv.is_string()) {
        if (lv.get<std::string>() != "lambda0") fail(ErrorKind::Schema, "$.params.lambda must be a number or 'lambda0'");
        lambda = find_lambda0(pts, keep, ratio);
        source = "bisection";
    } else {
        lambda = lv.get<double>();
        if (!(lambda > 0 && lambda <= 1)) fail(ErrorKind::Schema, "$.params.lambda must lie in (0, 1]");
        source = "config";
    }
    auto sep = check_separation(pts, lambda, keep, ratio);
    ojson s;
    s["preset"] = G.name;
    s["lambda"] = lambda;
    s["lambda_source"] = source;
    s["ratio"] = ratio;
    s["r_min"] = r_min;
    s["max_c2"] = max_c2;
    s["points"] = pts.size();
    s["pairs_checked"] = sep.pairs_checked;
    s["failures"] = ojson::array();
    for (const auto& f : sep.failures)
        s["failures"].push_back({{"i", f.i}, {"j", f.j}, {"angle", f.angle}, {"cap_sum", f.cap_sum}});
    s["pass"] = sep.pass();
    o.ok = sep.pass();
    if (!o.ok) o.witness = s["failures"][0];
    o.bundle.json.emplace_back("separation", s);
    o.bundle.csv.emplace_back("parabolics", parabolics_csv(pts));

    Figure f;
    f.name = "shadows";
    f.extent = 3;
    Layer L{"shadows", "B(p, lambda r_p)", "#0d47a1", {}};
    Layer bad{"failures", "pairs failing separation", "#b71c1c", {}};
    std::vector<char> failed(pts.size(), 0);
    for (const auto& fl : sep.failures) failed[fl.i] = failed[fl.j] = 1;
    for (size_t i = 0; i < pts.size(); ++i)
        if (keep(pts[i])) add_loop(f, failed[i] ? bad : L, cap_loop(pts[i].s, lambda * pts[i].r));
    f.layers.push_back(std::move(L));
    if (!bad.lines.empty()) f.layers.push_back(std::move(bad));
    o.bundle.figures.push_back(std::move(f));
    return o;
}

// ---- sierpinski ----

inline kleinian::ParabolicPoint cusp_at_infinity(const kleinian::GroupPreset& G) {
    for (const auto& q : kleinian::enumerate_parabolics(G, 0.9))
        if (q.p.inf) return q;
    fail(ErrorKind::Precondition, "preset '" + G.name + "' has no parabolic point at infinity");
}

inline ojson circle_json(const sierpinski::PeripheralCircle& C) {
    ojson j;
    j["id"] = C.id;
    j["p"] = C.p.p.inf ? ojson("inf") : ojson::array({C.p.p.z.real(), C.p.p.z.imag()});
    j["r_p"] = C.p.r;
    j["lambda"] = C.lambda;
    j["depth"] = C.depth;
    j["min_d"] = C.min_d;
    j["max_d"] = C.max_d;
    j["annulus"] = C.annulus_ok;
    j["winding"] = C.winding;
    j["winding_angle"] = C.winding_angle;
    j["winding_ok"] = C.winding_ok;
    j["avoidance"] = C.avoidance_ok;
    j["avoidance_checked"] = C.avoidance_checked;
    j["drift"] = C.drift;
    j["drift_ok"] = C.drift_ok;
    j["diameter"] = C.diameter;
    j["stages"] = ojson::array();
    for (const auto& s : C.stages)
        j["stages"].push_back({{"n", s.n},
                               {"iota", s.iota},
                               {"band", s.band_size},
                               {"detoured", s.detoured.size()},
                               {"follow_5iota", s.follow.ok && s.follow_prime.ok},
                               {"min_clearance", std::isfinite(s.min_clearance) ? ojson(s.min_clearance) : ojson(nullptr)},
                               {"avoid", s.avoid_ok},
                               {"cqa", s.cqa_ok},
                               {"samples", s.samples}});
    j["warnings"] = C.warnings;
    j["certified"] = C.certified();
    return j;
}

inline void stage_layers(Figure& f, const std::vector<const sierpinski::PeripheralCircle*>& cs, int depth,
                         const std::string& prefix) {
    for (int k = 1; k <= depth; ++k) {
        Layer L{prefix + "stage-" + std::to_string(k), prefix + "stage " + std::to_string(k), stage_colour(k), {}};
        for (const auto* C : cs)
            if (k < static_cast<int>(C->snapshots.size())) add_loop(f, L, C->snapshots[k]);
        f.layers.push_back(std::move(L));
    }
}

inline std::string circles_csv(const sierpinski::SierpinskiApprox& S) {
    std::string out = "circle,p_re,p_im,p_inf,r_p,min_d,max_d,winding,certified,retained\n";
    std::vector<char> kept(S.circles.size(), 0);
    for (int i : S.retained) kept[i] = 1;
    for (size_t i = 0; i < S.circles.size(); ++i) {
        const auto& C = S.circles[i];
        out += std::to_string(i) + ",";
        out += C.p.p.inf ? "0,0,1," : fmt_double(C.p.p.z.real()) + "," + fmt_double(C.p.p.z.imag()) + ",0,";
        out += fmt_double(C.p.r) + "," + fmt_double(C.min_d) + "," + fmt_double(C.max_d) + "," + std::to_string(C.winding) + "," +
               (C.certified() ? "1" : "0") + "," + (kept[i] ? "1" : "0") + "\n";
    }
    return out;
}

inline ojson approx_json(const sierpinski::SierpinskiApprox& S, bool& ok, ojson& witness) {
    ojson j;
    j["lambda"] = S.lambda;
    j["depth"] = S.depth;
    j["circles"] = S.circles.size();
    j["retained"] = S.retained.size();
    j["nested"] = S.nested.size();
    int certified = 0;
    for (int i : S.retained) {
        if (S.circles[i].certified()) ++certified;
        else if (ok) ok = false, witness = circle_json(S.circles[i]);
    }
    j["certified"] = certified;
    if (S.containment) {
        const auto& c = *S.containment;
        j["containment"] = {{"samples", c.samples},
                            {"in_V_lambda", c.in_V_lambda},
                            {"in_S", c.in_S},
                            {"in_V_quarter", c.in_V_quarter},
                            {"lower_failures", c.lower_failures},
                            {"upper_failures", c.upper_failures},
                            {"pass", c.ok()}};
        if (!c.ok() && ok) ok = false, witness = j["containment"];
    }
    j["diameters_decreasing"] = S.diameters_decreasing;
    if (!S.diameters_decreasing && ok) ok = false, witness = {{"diameters_decreasing", false}};
    j["warnings"] = S.warnings;
    return j;
}

inline sierpinski::SierpinskiOptions curve_options(const RunConfig& c, double r_min) {
    sierpinski::SierpinskiOptions opt;
    opt.circle.depth = c.params["depth"];
    opt.circle.r_floor = r_min;
    opt.grid_samples = c.params["grid_samples"];
    opt.threads = c.params["threads"];
    return opt;
}

inline Outcome run_sierpinski_build(const RunConfig& c) {
    using namespace sierpinski;
    Outcome o;
    auto G = kleinian_preset(c.params["preset"], o);
    const double lambda = c.params["lambda"];
    const int depth = c.params["depth"];
    if (c.params["mode"] == "circle") {
        auto p = cusp_at_infinity(G);
        const double r_lo = std::pow(50.0, -depth - 1) * p.r;  // lower edge of the deepest stage band
        auto pts = kleinian::enumerate_near_infinity(G, r_lo, lambda * p.r / 4, 3 * lambda * p.r / 4);
        CircleOptions opt;
        opt.depth = depth;
        opt.r_floor = r_lo;
        auto C = build_peripheral_circle(p, lambda, pts, opt);
        auto j = circle_json(C);
        j["enumerated"] = pts.size();
        j["r_floor"] = r_lo;
        o.ok = C.certified();
        if (!o.ok) o.witness = j;
        o.bundle.json.emplace_back("circle", j);
        Figure f;
        f.name = "circle";
        f.projection = "south";
        double m = 0;
        for (const auto& s : C.snapshots)
            for (const auto& v : s) {
                auto [x, y] = project(v, f.projection);
                m = std::max({m, std::abs(x), std::abs(y)});
            }
        f.extent = nice_extent(1.2 * m);
        stage_layers(f, {&C}, depth, "");
        o.bundle.figures.push_back(std::move(f));
        return o;
    }
    const double r_min = c.params["r_min"];
    auto pts = kleinian::enumerate_parabolics(G, r_min);
    auto S = build_sierpinski(lambda, pts, curve_options(c, r_min), G.name);
    auto j = approx_json(S, o.ok, o.witness);
    o.bundle.json.emplace_back("curve", j);
    o.bundle.csv.emplace_back("circles", circles_csv(S));
    Figure f;
    f.name = "curve";
    std::vector<const PeripheralCircle*> cs;
    for (int i : S.retained) cs.push_back(&S.circles[i]);
    stage_layers(f, cs, depth, "");
    o.bundle.figures.push_back(std::move(f));
    return o;
}

inline Outcome run_sierpinski_entwine(const RunConfig& c) {
    using namespace sierpinski;
    Outcome o;
    const double l1 = c.params["lambda1"], l2 = c.params["lambda2"];
    // Checked before any geometry is built.
    if (!(l2 <= l1 / 4 * (1 + 1e-12)))
        fail(ErrorKind::Schedule, "entwinement needs lambda2 <= lambda1/4; got lambda1 = " + fmt_double(l1) +
                                      ", lambda2 = " + fmt_double(l2));
    auto G = kleinian_preset(c.params["preset"], o);
    const double r_min = c.params["r_min"], tol = c.params["tol"];
    const int depth = c.params["depth"];
    auto pts = kleinian::enumerate_parabolics(G, r_min);
    auto opt = curve_options(c, r_min);
    auto S1 = build_sierpinski(l1, pts, opt, G.name), S2 = build_sierpinski(l2, pts, opt, G.name);
    auto e = check_entwined(S1, S2, tol);
    auto d = verify_decomposition(S2, S1, nullptr, tol);
    ojson j;
    j["stratum1"] = approx_json(S1, o.ok, o.witness);
    j["stratum2"] = approx_json(S2, o.ok, o.witness);
    j["entwined"] = {{"pass", e.entwined}, {"pairs_checked", e.pairs_checked},
                     {"closest", std::isfinite(e.closest) ? ojson(e.closest) : ojson(nullptr)},
                     {"circle1", e.circle1}, {"circle2", e.circle2}, {"tol", tol}};
    if (!e.entwined && o.ok) o.ok = false, o.witness = j["entwined"];
    int nontrivial = 0;
    ojson pieces = ojson::array();
    for (const auto& p : d.pieces) {
        nontrivial += !p.trivial;
        pieces.push_back({{"circle", p.circle}, {"trivial", p.trivial}, {"holes", p.holes.size()}, {"diameter", p.diameter}});
    }
    j["decomposition"] = {{"pass", d.ok()},
                          {"entwined", d.entwined},
                          {"pieces", d.pieces.size()},
                          {"nontrivial", nontrivial},
                          {"disjoint", d.disjoint},
                          {"covering", d.covering},
                          {"single_attachment", d.single_attachment},
                          {"diameters_decreasing", d.diameters_decreasing}};
    if (!d.ok() && o.ok) o.ok = false, o.witness = j["decomposition"];
    o.bundle.json.emplace_back("entwine", j);
    o.bundle.json.emplace_back("pieces", pieces);
    o.bundle.csv.emplace_back("stratum1_circles", circles_csv(S1));
    o.bundle.csv.emplace_back("stratum2_circles", circles_csv(S2));
    Figure f;
    f.name = "strata";
    for (const auto* S : {&S1, &S2}) {
        std::vector<const PeripheralCircle*> cs;
        for (int i : S->retained) cs.push_back(&S->circles[i]);
        stage_layers(f, cs, depth, S == &S1 ? "stratum1-" : "stratum2-");
    }
    o.bundle.figures.push_back(std::move(f));
    return o;
}

// ---- bass-serre ----

inline Outcome run_bass_serre_probe(const RunConfig& c) {
    using namespace bass_serre;
    Outcome o;
    auto P = bass_serre_preset(c.params["preset"], o);
    Amalgam G(P);
    const int R = c.params["radius"];
    std::vector<int> bounds = c.params["d_bounds"].get<std::vector<int>>();
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    auto ball = bfs_ball(G, R);
    auto family = geodesic_family(G, R, bounds.back());
    if (family.empty()) fail(ErrorKind::Precondition, "the geodesic family is empty at radius " + std::to_string(R));
    FitOptions fo;
    fo.seed = c.seed;
    fo.morse_samples = c.params["morse_samples"];
    fo.max_detour = c.params["max_detour"];
    fo.threads = c.params["threads"];
    std::vector<FitRow> rows;
    ojson fits = ojson::array();
    bool monotone = true;
    for (int D : bounds) {
        auto fit = fit_quasi_geodesic(G, ball, family, D, fo);
        if (!rows.empty() && fit.K < rows.back().fit.K) monotone = false;
        fits.push_back({{"D_bound", D},
                        {"K", fit.K},
                        {"members", fit.members},
                        {"filtered", fit.filtered.size()},
                        {"pairs", fit.sample_size},
                        {"worst_word", fit.worst_word},
                        {"worst_s", fit.worst_s},
                        {"worst_t", fit.worst_t},
                        {"excursion_max", fit.excursion_max},
                        {"detours_accepted", fit.detours_accepted},
                        {"detours_rejected", fit.detours_rejected},
                        {"notices", fit.notices}});
        rows.push_back({P.name, R, D, std::move(fit)});
    }
    auto bc = check_ball(G, ball);
    ojson j;
    j["preset"] = P.name;
    j["radius"] = R;
    j["elements"] = ball.elements.size();
    j["sphere_sizes"] = ball.sphere_sizes();
    j["edges"] = ball.edges.size();
    j["family"] = family.size();
    j["lipschitz"] = bc.lipschitz;
    j["star"] = bc.star;
    j["fits"] = fits;
    j["K_monotone"] = monotone;
    o.ok = bc.lipschitz && bc.star && monotone;
    j["pass"] = o.ok;
    if (!o.ok) o.witness = {{"lipschitz", bc.lipschitz}, {"star", bc.star}, {"K_monotone", monotone}};
    o.bundle.json.emplace_back("probe", j);
    o.bundle.json.emplace_back("preset", ojson::parse(to_json(P).dump()));
    o.bundle.csv.emplace_back("fit", fit_csv(rows));
    return o;
}

// ---- driver ----

inline Outcome compute(const RunConfig& c) {
    if (c.command == "cantor homeo") return run_cantor_homeo(c);
    if (c.command == "cantor check") return run_cantor_check(c);
    if (c.command == "raag classify") return run_raag_classify(c);
    if (c.command == "kleinian shadows") return run_kleinian_shadows(c);
    if (c.command == "sierpinski build") return run_sierpinski_build(c);
    if (c.command == "sierpinski entwine") return run_sierpinski_entwine(c);
    if (c.command == "bass-serre probe") return run_bass_serre_probe(c);
    fail(ErrorKind::Usage, "unknown command '" + c.command + "'");
}

inline ojson manifest(const RunConfig& c, const Outcome& o, int exit_code, const std::vector<std::string>& files) {
    ojson m;
    m["schema"] = kManifestSchema;
    m["command"] = c.command;
    m["seed"] = c.seed;
    m["versions"] = {{"omega", OMEGA_VERSION},
                     {"config_schema", kConfigSchema},
                     {"bundle_schema", kBundleSchema},
                     {"manifest_schema", kManifestSchema}};
    m["config"] = c.to_json();
    ojson in = ojson::array();
    for (const auto& p : o.inputs) in.push_back({{"path", p.string()}, {"fnv1a64", fnv1a_file(p)}});
    m["inputs"] = in;
    m["exit_code"] = exit_code;
    m["status"] = exit_code == 0 ? "pass" : "certificate failure";
    m["outputs"] = files;
    return m;
}

// Removes the files a previous run recorded in its manifest, so reruns leave no stale outputs.
inline void clear_previous(const fs::path& dir) {
    fs::path m = dir / "manifest.json";
    if (!fs::exists(m)) return;
    std::ifstream in(m);
    ojson j = ojson::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("outputs") || !j["outputs"].is_array()) return;
    for (const auto& f : j["outputs"])
        if (f.is_string() && f.get<std::string>().find('/') == std::string::npos) fs::remove(dir / f.get<std::string>());
    fs::remove(m);
}

// Runs a validated configuration and writes everything below root / c.output.
inline RunResult run(const RunConfig& c, const fs::path& root = output_root()) {
    RunResult r;
    r.dir = root / c.output;
    clear_previous(r.dir);
    Outcome o;
    try {
        o = compute(c);
    } catch (const Error& e) {
        r.exit_code = exit_code_for(e.kind());
        r.message = e.what();
        if (r.exit_code == 1) {
            ojson w{{"command", c.command}, {"kind", to_string(e.kind())}, {"message", e.what()}};
            write_text(r.dir / "witness.json", w.dump(2) + "\n");
            r.files.push_back("witness.json");
            write_text(r.dir / "manifest.json", manifest(c, o, 1, r.files).dump(2) + "\n");
        }
        return r;
    }
    r.exit_code = o.ok ? 0 : 1;
    write_text(r.dir / "bundle.json", to_json(o.bundle).dump(1) + "\n");
    r.files.push_back("bundle.json");
    for (const auto& fmt : export_formats())
        for (auto& n : export_bundle(o.bundle, fmt, r.dir)) r.files.push_back(n);
    if (!o.ok) {
        write_text(r.dir / "witness.json", ojson{{"command", c.command}, {"witness", o.witness}}.dump(2) + "\n");
        r.files.push_back("witness.json");
        r.message = "certificate failure; witness in " + (r.dir / "witness.json").string();
    }
    r.files.push_back("manifest.json");
    write_text(r.dir / "manifest.json", manifest(c, o, r.exit_code, r.files).dump(2) + "\n");
    r.message = o.stdout_text + r.message;
    return r;
}

}  // namespace omega::cli
