#pragma once

#include <stdexcept>
#include <string>

namespace spdo {

/// Base of every error raised by the library. `kind()` is a stable tag used in
/// structured error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

struct GridMismatch : Error {
    explicit GridMismatch(const std::string& what) : Error("grid_mismatch", what) {}
};

/// Raised when an adapted rule reads the Brownian path past its cutoff time.
struct AdaptednessViolation : Error {
    explicit AdaptednessViolation(const std::string& what)
        : Error("adaptedness_violation", what) {}
};

struct CapExceeded : Error {
    explicit CapExceeded(const std::string& what) : Error("cap_exceeded", what) {}
};

struct EvaluationError : Error {
    explicit EvaluationError(const std::string& what) : Error("evaluation_error", what) {}
};

struct RootSolverError : Error {
    RootSolverError(const std::string& what, double residual)
        : Error("root_solver", what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct NotElliptic : Error {
    explicit NotElliptic(const std::string& what) : Error("not_elliptic", what) {}
};

struct DegenerateDiagonalization : Error {
    explicit DegenerateDiagonalization(const std::string& what)
        : Error("degenerate_diagonalization", what) {}
};

struct BranchCrossing : Error {
    explicit BranchCrossing(const std::string& what) : Error("branch_crossing", what) {}
};

struct InsufficientNodes : Error {
    explicit InsufficientNodes(const std::string& what) : Error("insufficient_nodes", what) {}
};

/// Schema violation while reading a configuration file.
struct ConfigError : Error {
    ConfigError(const std::string& what, std::string key = {}, int line = 0)
        : Error("config", what), key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

}  // namespace spdo
