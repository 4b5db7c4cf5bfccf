// omega: command-line front end. Flags mirror the run-config parameters; a config file
// supplies the same fields and flags given on the command line override it.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "omega/cli/run.hpp"

namespace {

using namespace omega;
using namespace omega::cli;

std::string flag_name(const std::string& param) {
    std::string s = param;
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

ojson convert(const ParamSpec& p, const std::string& text) {
    const std::string path = "$.params." + p.name;
    auto number = [&](bool integer) -> ojson {
        size_t used = 0;
        try {
            if (integer) {
                long long v = std::stoll(text, &used);
                if (used == text.size()) return v;
            } else {
                double v = std::stod(text, &used);
                if (used == text.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail(ErrorKind::Schema, path + " must be " + (integer ? "an integer" : "a finite number") + " (got '" + text + "')");
    };
    switch (p.type) {
        case ParamType::Int: return number(true);
        case ParamType::Number: return number(false);
        case ParamType::Bool:
            if (text == "true" || text == "false") return text == "true";
            fail(ErrorKind::Schema, path + " must be a boolean (got '" + text + "')");
        case ParamType::IntList: {
            ojson a = ojson::array();
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                ParamSpec q = p;
                q.type = ParamType::Int;
                a.push_back(convert(q, item));
            }
            return a;
        }
        case ParamType::NumberOrString: {
            char* end = nullptr;
            double v = std::strtod(text.c_str(), &end);
            if (!text.empty() && end == text.c_str() + text.size()) return v;
            return text;
        }
        case ParamType::String: return text;
    }
    return text;
}

struct Invocation {
    const CommandSpec* spec = nullptr;
    std::map<std::string, std::string> flags;  // param name -> text
};

ojson load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) fail(ErrorKind::Schema, "$: config '" + path + "' is empty");
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        fail(ErrorKind::Schema, "$: config '" + path + "' is not valid JSON");
    }
}

int report(const RunResult& r) {
    if (!r.message.empty()) (r.exit_code == 0 ? std::cout : std::cerr) << r.message << (r.message.back() == '\n' ? "" : "\n");
    if (!r.files.empty()) std::cerr << "wrote " << r.files.size() << " file(s) to " << r.dir.string() << "\n";
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omega: finite-resolution Morse boundary constructions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", OMEGA_VERSION);

    std::string config_path, output, out_root;
    std::optional<std::uint64_t> seed;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration JSON (" + std::string(kConfigSchema) + ")");
        sub->add_option("--seed", seed, "random seed recorded in the manifest");
        sub->add_option("--output", output, "run directory below the output root");
        sub->add_option("--out-root", out_root, std::string("output root (default $") + kOutputRootEnv + " or ./omega-out)");
    };

    Invocation inv;
    std::map<std::string, CLI::App*> groups;
    std::vector<std::pair<CLI::App*, const CommandSpec*>> leaves;
    for (const auto& spec : command_specs()) {
        auto sp = spec.name.find(' ');
        std::string group = spec.name.substr(0, sp), leaf = spec.name.substr(sp + 1);
        if (!groups.count(group)) {
            groups[group] = app.add_subcommand(group, group + " commands");
            groups[group]->require_subcommand(1);
        }
        auto* sub = groups[group]->add_subcommand(leaf, spec.help);
        common(sub);
        for (const auto& p : spec.params) {
            std::string help = p.help;
            if (!p.fallback.is_null()) help += " [default " + p.fallback.dump() + "]";
            sub->add_option_function<std::string>("--" + flag_name(p.name),
                                                  [&inv, name = p.name](const std::string& v) { inv.flags[name] = v; }, help);
        }
        leaves.emplace_back(sub, &spec);
    }

    auto* run_cmd = app.add_subcommand("run", "run a configuration file as is");
    common(run_cmd);
    run_cmd->get_option("--config")->required();

    std::string bundle_path, format, export_dir;
    auto* exp = app.add_subcommand("export", "re-export a saved bundle");
    exp->add_option("bundle", bundle_path, "bundle.json written by a run")->required();
    exp->add_option("--format", format, "svg, csv, json or dot")->required();
    exp->add_option("--out", export_dir, "target directory (default: the bundle's directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (exp->parsed()) {
            auto b = load_bundle(bundle_path);
            fs::path dir = export_dir.empty() ? fs::path(bundle_path).parent_path() : fs::path(export_dir);
            auto names = export_bundle(b, format, dir);
            for (const auto& n : names) std::cout << (dir / n).string() << "\n";
            return 0;
        }

        ojson cfg;
        const CommandSpec* spec = nullptr;
        for (auto& [sub, s] : leaves)
            if (sub->parsed()) spec = s;
        if (!config_path.empty()) {
            cfg = load_config_file(config_path);
            if (spec && cfg.is_object() && cfg.contains("command") && cfg["command"] != spec->name)
                fail(ErrorKind::Schema, "$.command: config is for '" + cfg["command"].dump() + "', invoked as '" + spec->name + "'");
        } else {
            cfg = {{"schema", kConfigSchema}, {"command", spec->name}};
        }
        if (cfg.is_object()) {
            if (!inv.flags.empty() && !cfg.contains("params")) cfg["params"] = ojson::object();
            for (const auto& [name, text] : inv.flags)
                for (const auto& p : spec->params)
                    if (p.name == name) cfg["params"][name] = convert(p, text);
            if (seed) cfg["seed"] = *seed;
            if (!output.empty()) cfg["output"] = output;
        }
        auto rc = parse_config(cfg);
        fs::path root = out_root.empty() ? output_root() : fs::path(out_root);
        return report(run(rc, root));
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.kind()) == 1 ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
