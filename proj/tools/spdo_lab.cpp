#include "spdo/config.hpp"
#include "spdo/errors.hpp"
#include "spdo/run.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"spdo-lab: stochastic pseudo-differential operator experiments"};
    app.set_version_flag("--version", std::string(spdo::artifact_version()));

    std::string subcommand;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";

    std::vector<std::string> choices = spdo::subcommands();
    choices.push_back("parametrix-test");
    app.add_option("subcommand", subcommand, "Experiment to run")->required()->check(CLI::IsMember(choices));
    app.add_option("--config", config_path, "key = value configuration file")->required();
    app.add_option("--seed", seed, "Global seed (overrides the config file)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : spdo::kExitError;
    }

    spdo::RunResult result;
    try {
        spdo::ExperimentConfig config = spdo::parse_config(config_path);
        if (seed) config.seed = *seed;
        result = spdo::run(subcommand, std::move(config), out_dir);
    } catch (const spdo::Error& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
        spdo::run_failed(subcommand, e, out_dir);
        return spdo::kExitError;
    }

    const auto& report = result.report;
    std::cout << subcommand << ": " << report.value("status", "error") << " (exit " << result.exit_code << ")\n";
    if (report.contains("error")) std::cerr << "error: " << report["error"].dump() << "\n";
    for (const auto& f : result.files) std::cout << "  " << out_dir << "/" << f << "\n";
    return result.exit_code;
}
