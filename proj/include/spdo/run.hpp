#pragma once

#include "spdo/config.hpp"
#include "spdo/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace spdo {

const char* artifact_version();

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

struct RunResult {
    int exit_code = kExitError;
    nlohmann::ordered_json report;
    std::vector<std::string> files;  // emitted files in write order, manifest last
};

/// Runs one subcommand, writing its CSV/JSON outputs, report.json and finally
/// manifest.json into `out_dir`. Module errors are caught and recorded.
RunResult run(const std::string& subcommand, ExperimentConfig config, const std::filesystem::path& out_dir);

/// Writes report.json with an error record and the manifest; returns kExitError.
RunResult run_failed(const std::string& subcommand, const Error& error, const std::filesystem::path& out_dir);

/// `%.17g` with '.' decimal regardless of locale.
std::string format_real(double v);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace spdo
