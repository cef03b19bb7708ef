// Experiment runner CLI: dispatches a JSON config to the core experiment
// engine. Identical config+seed reproduces byte-identical data artifacts.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plattice/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"perturbed-lattice simulation lab"};

    std::string config_path;
    std::string out_dir = "out";
    std::string command_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int threads = 0;

    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--command", command_override, "override config command");
    app.add_option("--seed", seed_override, "override config seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    app.add_option("--threads", threads, "worker threads (0 = config value)");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read config '" << config_path << "'\n";
            return 2;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        auto config = nlohmann::json::parse(ss.str());

        if (!command_override.empty()) config["command"] = command_override;
        if (seed_set) {
            if (!config.contains("law")) config["law"] = nlohmann::json::object();
            config["law"]["seed"] = seed_override;
        }
        if (threads > 0) config["threads"] = threads;

        return plattice::run_experiment(std::move(config), out_dir);
    } catch (const plattice::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const plattice::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
