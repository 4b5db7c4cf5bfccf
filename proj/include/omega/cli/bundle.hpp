#pragma once

// Artifact bundles: everything a run produced, serializable to bundle.json and
// re-exportable to SVG, CSV, JSON and DOT files with deterministic names and bytes.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omega/core/error.hpp"
#include "omega/core/format.hpp"
#include "omega/kleinian/mobius.hpp"

namespace omega::cli {

using ojson = nlohmann::ordered_json;
using kleinian::Vec3;

inline constexpr const char* kBundleSchema = "omega.bundle/1";

// Planar polyline in figure coordinates (y up).
struct Polyline {
    std::vector<std::pair<double, double>> pts;
    bool closed = true;
};

struct Layer {
    std::string id;
    std::string label;
    std::string stroke = "#000000";
    std::vector<Polyline> lines;
};

struct Figure {
    std::string name;
    std::string projection = "north";  // stereographic pole the figure is projected from
    double extent = 3;                 // view box [-extent, extent]^2
    int omitted = 0;                   // loops too small to draw
    std::vector<Layer> layers;
};

struct Bundle {
    std::string command;
    std::vector<std::pair<std::string, std::string>> csv;   // name, text
    std::vector<std::pair<std::string, ojson>> json;         // name, document
    std::vector<std::pair<std::string, std::string>> dot;   // name, text
    std::vector<Figure> figures;

    bool empty() const { return csv.empty() && json.empty() && dot.empty() && figures.empty(); }
};

// ---- projection ----

// Stereographic projection from the north pole (or from the south pole, which views
// the neighbourhood of the north pole).
inline std::pair<double, double> project(const Vec3& v, const std::string& pole) {
    if (pole == "south") return {v.x / (1 + v.z), -v.y / (1 + v.z)};
    return {v.x / (1 - v.z), v.y / (1 - v.z)};
}

inline double round4(double x) { return std::round(x * 1e4) / 1e4 + 0.0; }  // + 0.0 drops the sign of zero

inline double planar_extent(const Polyline& p) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto [x, y] : p.pts) {
        xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
    return std::max(xmax - xmin, ymax - ymin);
}

// Projects a sampled loop with evenly spaced samples: 64 for loops spanning 5% of the
// view, fewer for smaller ones.
inline Polyline project_loop(const std::vector<Vec3>& loop, const std::string& pole, double extent) {
    Polyline p;
    if (loop.empty()) return p;
    Polyline probe;
    for (size_t i = 0; i < loop.size(); i += std::max<size_t>(1, loop.size() / 16)) {
        auto [x, y] = project(loop[i], pole);
        probe.pts.emplace_back(x, y);
    }
    double rel = planar_extent(probe) / (2 * extent);
    size_t max_pts = rel > 0.05 ? 64 : rel > 0.01 ? 24 : 12;
    size_t step = std::max<size_t>(1, (loop.size() + max_pts - 1) / max_pts);
    for (size_t i = 0; i < loop.size(); i += step) {
        auto [x, y] = project(loop[i], pole);
        p.pts.emplace_back(round4(x), round4(y));
    }
    return p;
}

inline bool visible(const Polyline& p, double extent) {
    for (auto [x, y] : p.pts)
        if (std::abs(x) <= extent && std::abs(y) <= extent) return true;
    return false;
}

// ---- JSON round trip ----

inline ojson to_json(const Figure& f) {
    ojson j;
    j["name"] = f.name;
    j["projection"] = f.projection;
    j["extent"] = f.extent;
    j["omitted"] = f.omitted;
    j["layers"] = ojson::array();
    for (const auto& L : f.layers) {
        ojson l;
        l["id"] = L.id;
        l["label"] = L.label;
        l["stroke"] = L.stroke;
        l["lines"] = ojson::array();
        for (const auto& p : L.lines) {
            ojson pts = ojson::array();
            for (auto [x, y] : p.pts) pts.push_back({x, y});
            l["lines"].push_back({{"closed", p.closed}, {"points", pts}});
        }
        j["layers"].push_back(l);
    }
    return j;
}

inline ojson to_json(const Bundle& b) {
    ojson j;
    j["schema"] = kBundleSchema;
    j["command"] = b.command;
    j["csv"] = ojson::array();
    for (const auto& [n, t] : b.csv) j["csv"].push_back({{"name", n}, {"text", t}});
    j["json"] = ojson::array();
    for (const auto& [n, d] : b.json) j["json"].push_back({{"name", n}, {"document", d}});
    j["dot"] = ojson::array();
    for (const auto& [n, t] : b.dot) j["dot"].push_back({{"name", n}, {"text", t}});
    j["figures"] = ojson::array();
    for (const auto& f : b.figures) j["figures"].push_back(to_json(f));
    return j;
}

namespace detail {

inline const ojson& field(const ojson& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Schema, path + "." + key + " missing");
    return j.at(key);
}

inline std::string str_field(const ojson& j, const char* key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_string()) fail(ErrorKind::Schema, path + "." + key + " must be a string");
    return v.get<std::string>();
}

inline const ojson& arr_field(const ojson& j, const char* key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_array()) fail(ErrorKind::Schema, path + "." + key + " must be an array");
    return v;
}

}  // namespace detail

inline Bundle bundle_from_json(const ojson& j) {
    using namespace detail;
    if (str_field(j, "schema", "$") != kBundleSchema)
        fail(ErrorKind::Schema, "$.schema: expected '" + std::string(kBundleSchema) + "'");
    Bundle b;
    b.command = str_field(j, "command", "$");
    const auto& csv = arr_field(j, "csv", "$");
    for (size_t i = 0; i < csv.size(); ++i) {
        std::string p = "$.csv[" + std::to_string(i) + "]";
        b.csv.emplace_back(str_field(csv[i], "name", p), str_field(csv[i], "text", p));
    }
    const auto& js = arr_field(j, "json", "$");
    for (size_t i = 0; i < js.size(); ++i) {
        std::string p = "$.json[" + std::to_string(i) + "]";
        b.json.emplace_back(str_field(js[i], "name", p), field(js[i], "document", p));
    }
    const auto& dot = arr_field(j, "dot", "$");
    for (size_t i = 0; i < dot.size(); ++i) {
        std::string p = "$.dot[" + std::to_string(i) + "]";
        b.dot.emplace_back(str_field(dot[i], "name", p), str_field(dot[i], "text", p));
    }
    const auto& figs = arr_field(j, "figures", "$");
    for (size_t i = 0; i < figs.size(); ++i) {
        std::string p = "$.figures[" + std::to_string(i) + "]";
        Figure f;
        f.name = str_field(figs[i], "name", p);
        f.projection = str_field(figs[i], "projection", p);
        if (f.projection != "north" && f.projection != "south") fail(ErrorKind::Schema, p + ".projection must be north or south");
        const auto& ext = field(figs[i], "extent", p);
        if (!ext.is_number() || !(ext.get<double>() > 0)) fail(ErrorKind::Schema, p + ".extent must be a positive number");
        f.extent = ext.get<double>();
        const auto& om = field(figs[i], "omitted", p);
        if (!om.is_number_integer()) fail(ErrorKind::Schema, p + ".omitted must be an integer");
        f.omitted = om.get<int>();
        const auto& layers = arr_field(figs[i], "layers", p);
        for (size_t k = 0; k < layers.size(); ++k) {
            std::string lp = p + ".layers[" + std::to_string(k) + "]";
            Layer L;
            L.id = str_field(layers[k], "id", lp);
            L.label = str_field(layers[k], "label", lp);
            L.stroke = str_field(layers[k], "stroke", lp);
            const auto& lines = arr_field(layers[k], "lines", lp);
            for (size_t m = 0; m < lines.size(); ++m) {
                std::string mp = lp + ".lines[" + std::to_string(m) + "]";
                Polyline pl;
                const auto& c = field(lines[m], "closed", mp);
                if (!c.is_boolean()) fail(ErrorKind::Schema, mp + ".closed must be a boolean");
                pl.closed = c.get<bool>();
                for (const auto& q : arr_field(lines[m], "points", mp)) {
                    if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
                        fail(ErrorKind::Schema, mp + ".points entries must be [x, y]");
                    pl.pts.emplace_back(q[0].get<double>(), q[1].get<double>());
                }
                L.lines.push_back(std::move(pl));
            }
            f.layers.push_back(std::move(L));
        }
        b.figures.push_back(std::move(f));
    }
    return b;
}

// ---- rendering ----

inline std::string render_svg(const Figure& f) {
    std::ostringstream os;
    const std::string e = fmt_double(f.extent), w = fmt_double(2 * f.extent);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-" << e << " -" << e << " " << w << " " << w
       << "\" width=\"800\" height=\"800\">\n";
    os << "  <title>" << f.name << "</title>\n";
    os << "  <rect x=\"-" << e << "\" y=\"-" << e << "\" width=\"" << w << "\" height=\"" << w << "\" fill=\"#ffffff\"/>\n";
    const std::string sw = fmt_double(f.extent / 800);
    for (const auto& L : f.layers) {
        os << "  <g id=\"" << L.id << "\" class=\"layer\" data-label=\"" << L.label << "\" fill=\"none\" stroke=\"" << L.stroke
           << "\" stroke-width=\"" << sw << "\">\n";
        for (const auto& p : L.lines) {
            if (p.pts.empty()) continue;
            os << "    <path d=\"";
            for (size_t i = 0; i < p.pts.size(); ++i)
                os << (i ? " L" : "M") << fmt_double(p.pts[i].first) << " " << fmt_double(0.0 - p.pts[i].second);
            os << (p.closed ? " Z" : "") << "\"/>\n";
        }
        os << "  </g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline const std::vector<std::string>& export_formats() {
    static const std::vector<std::string> f{"svg", "csv", "json", "dot"};
    return f;
}

// Writes every item of one format into dir; returns the file names in write order.
inline std::vector<std::string> export_bundle(const Bundle& b, const std::string& format, const std::filesystem::path& dir) {
    if (std::find(export_formats().begin(), export_formats().end(), format) == export_formats().end())
        fail(ErrorKind::Usage, "unknown export format '" + format + "' (expected svg, csv, json or dot)");
    std::vector<std::pair<std::string, std::string>> files;
    if (format == "svg")
        for (const auto& f : b.figures) files.emplace_back(f.name + ".svg", render_svg(f));
    if (format == "csv")
        for (const auto& [n, t] : b.csv) files.emplace_back(n + ".csv", t);
    if (format == "json")
        for (const auto& [n, d] : b.json) files.emplace_back(n + ".json", d.dump(2) + "\n");
    if (format == "dot")
        for (const auto& [n, t] : b.dot) files.emplace_back(n + ".dot", t);
    std::vector<std::string> names;
    if (files.empty()) return names;
    std::filesystem::create_directories(dir);
    for (const auto& [n, t] : files) {
        std::ofstream out(dir / n, std::ios::binary);
        if (!out) fail(ErrorKind::Usage, "cannot write " + (dir / n).string());
        out << t;
        names.push_back(n);
    }
    return names;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::Usage, "cannot write " + p.string());
    out << text;
}

inline Bundle load_bundle(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail(ErrorKind::Usage, "cannot open bundle " + p.string());
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Schema, "$: " + p.string() + " is not valid JSON (" + e.what() + ")");
    }
    return bundle_from_json(j);
}

}  // namespace omega::cli
