#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "boxres/config.hpp"
#include "boxres/error.hpp"
#include "boxres/run.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOutputExists = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resonance energies and widths from spherical-box stabilization"};
    std::string config_path;
    std::string mode;
    bool force = false;
    app.add_option("--config", config_path, "key=value run configuration")->required();
    app.add_option("--mode", mode, "overrides the mode given in the configuration")
        ->check(CLI::IsMember({"stabilize", "oracle", "both"}));
    app.add_flag("--force", force, "overwrite existing output files");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    boxres::RunConfig cfg;
    try {
        cfg = boxres::load_config(config_path);
        if (!mode.empty()) {
            cfg.mode = boxres::parse_mode(mode);
        }
    } catch (const boxres::ConfigError& e) {
        std::cerr << "boxres: " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        boxres::run(cfg, force, std::cout);
    } catch (const boxres::OutputExistsError& e) {
        std::cerr << "boxres: " << e.what() << "\n";
        return kExitOutputExists;
    } catch (const std::exception& e) {
        std::cerr << "boxres: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
