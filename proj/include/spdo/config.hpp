#pragma once

#include "spdo/carleman.hpp"
#include "spdo/catalog.hpp"
#include "spdo/operator.hpp"
#include "spdo/symbol.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spdo {

struct ParametrixOptions {
    double radius = 1.0;
    int k_min = 8;
    int k_max = 0;  // 0: N/2
    double max_slope = -0.9;
    bool right = false;
};

struct RootsOptions {
    double epsilon = 1.0;
    std::size_t angles = 64;
};

struct ReduceOptions {
    int mode = 1;             // spatial mode of the manufactured solution
    std::size_t levels = 3;   // K, 2K, 4K, …
    double min_order = 0.9;
    double max_residual = 1e-10;
};

struct CarlemanOptions {
    std::vector<double> kappa = {16.0, 64.0, 256.0};
    std::vector<double> mu;  // raw μ values; overrides kappa when set
    std::vector<double> horizons = {0.0625, 0.125, 0.25};
    std::string family = "catalog";  // catalog | reduction
    catalog::SymbolSpec a1;
    catalog::SymbolSpec b1;
    std::size_t branch = 0;
    ProcessSpec process;
    bool dump_paths = false;
};

struct ExperimentConfig {
    std::string command;
    int dim = 1;
    std::size_t points = 128;
    double horizon = 0.25;
    std::size_t steps = 512;
    std::size_t paths = 256;
    std::uint64_t seed = 0;

    catalog::SymbolSpec symbol;
    catalog::PrincipalSpec principal;
    std::vector<double> custom_real, custom_imag;
    SampleSetOptions samples;
    OrderCheckOptions verify;
    BoundednessOptions bounded;
    double bounded_max_variation = 0.1;
    std::optional<double> bounded_max_ratio;
    ParametrixOptions parametrix;
    RootsOptions roots;
    ReduceOptions reduce;
    CarlemanOptions carleman;

    ExperimentConfig();
};

const std::vector<std::string>& subcommands();
/// Canonical name (resolves aliases such as parametrix-test); throws ConfigError.
std::string canonical_subcommand(const std::string& name);

/// Parses `key = value` lines ('#' starts a comment). Unknown keys, bad
/// values and out-of-range numbers raise ConfigError with key and line.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Every schema key with its effective value, in schema order.
nlohmann::ordered_json config_echo(const ExperimentConfig& c);

/// Keys of the schema with their defaults, in schema order (for docs/tests).
std::vector<std::pair<std::string, std::string>> config_schema();

/// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
nlohmann::ordered_json json_number(double v);

}  // namespace spdo
