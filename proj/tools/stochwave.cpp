// Command-line runner: run <config>, selftest, print-effective-config <config>.
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stochwave/cli.hpp"
#include "stochwave/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic wave simulation and convergence studies"};
    app.require_subcommand(1);
    std::string path;
    auto* run = app.add_subcommand("run", "run the study described by a config file");
    run->add_option("config", path, "configuration file")->required();
    auto* self = app.add_subcommand("selftest", "fit sanity checks on manufactured data");
    auto* print = app.add_subcommand("print-effective-config", "print the config with every default filled in");
    print->add_option("config", path, "configuration file")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        if (*self) return stochwave::selftest(std::cout);
        const stochwave::RunConfig cfg = stochwave::parse_config(path);
        if (*print) {
            std::cout << stochwave::emit_config(cfg);
            return 0;
        }
        return stochwave::run_study(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
