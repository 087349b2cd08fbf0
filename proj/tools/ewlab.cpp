#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ewlab/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) ewlab::fail(ewlab::ErrorKind::config, "cannot open config " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivariant constrained Willmore tori: EL flow, Killing fields, spectral curves, reconstruction"};
    app.set_version_flag("--version", std::string(ewlab::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    for (const auto& name : ewlab::mode_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " pipeline");
        sub->add_option("--config", config_path, "TOML configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ewlab::ErrorKind::config);
    }

    try {
        const std::string text = read_file(config_path);
        ewlab::RunConfig cfg = ewlab::parse_config(text);
        cfg.mode = ewlab::parse_mode(app.get_subcommands().front()->get_name());
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (cfg.trajectory_path && std::filesystem::path(*cfg.trajectory_path).is_relative())
            cfg.trajectory_path = (std::filesystem::path(config_path).parent_path() / *cfg.trajectory_path).string();
        const ewlab::RunResult res = ewlab::run(cfg, text);
        for (const auto& m : res.messages) (res.exit_code == 0 ? std::cout : std::cerr) << m << "\n";
        for (const auto& a : res.artifacts) std::cout << "wrote " << a << "\n";
        return res.exit_code;
    } catch (const ewlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ewlab::ErrorKind::numerical);
    }
}
