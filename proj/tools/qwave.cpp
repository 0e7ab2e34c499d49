// qwave <subcommand> --config <path> --out <dir> [--override key=value]...

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwave/config.hpp"
#include "qwave/errors.hpp"
#include "qwave/experiment.hpp"
#include "qwave/io.hpp"

namespace fs = std::filesystem;
using namespace qwave;

namespace {

struct Invocation {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
};

/// --config wins; otherwise a manifest already in the output directory; otherwise defaults.
config::ExperimentConfig load(const Invocation& inv) {
    config::ExperimentConfig cfg;
    if (!inv.config_path.empty()) {
        const std::string text = io::read_text(inv.config_path);
        try {
            cfg = config::parse_config(text);
        } catch (const config::ConfigError& e) {
            throw config::ConfigError(inv.config_path + ": " + e.what(), 0);
        }
    } else if (fs::exists(fs::path(inv.out_dir) / "run_manifest.json")) {
        cfg = experiment::load_manifest(fs::path(inv.out_dir) / "run_manifest.json");
    }
    for (const auto& o : inv.overrides) config::apply_override(cfg, o);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial quasilinear wave simulator and bound verification"};
    app.require_subcommand(1);

    Invocation inv;
    for (const auto& name : experiment::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", inv.config_path, "key = value configuration file");
        sub->add_option("--out", inv.out_dir, "artifact directory")->required();
        sub->add_option("--override", inv.overrides, "key=value applied after the file")->take_all();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return experiment::exit_config;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    config::ExperimentConfig cfg;
    try {
        cfg = load(inv);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return experiment::exit_config;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return experiment::exit_io;
    }
    return experiment::execute(cfg, subcommand, inv.out_dir, std::cerr);
}
