#pragma once

#include "spdo/grid.hpp"
#include "spdo/operator.hpp"
#include "spdo/paths.hpp"
#include "spdo/symbol.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spdo {

/// Time- and path-indexed family of frozen operators on one grid.
class OperatorFamily {
public:
    /// Quantizes `a` at each (t, ω); cached once when `a` is time- and
    /// path-independent.
    static OperatorFamily from_symbol(const Symbol& a, const TorusGrid& grid);
    static OperatorFamily zero(const TorusGrid& grid);

    const std::string& name() const noexcept { return name_; }
    double order() const noexcept { return order_; }
    bool is_constant() const noexcept { return static_cast<bool>(fixed_); }

    SpdoOperator at(const EvalContext& ctx) const;
    /// Discrete adjoint at (t, ω), cached alongside the constant operator.
    SpdoOperator adjoint_at(const EvalContext& ctx) const;

private:
    OperatorFamily(std::string name, double order) : name_(std::move(name)), order_(order) {}

    std::string name_;
    double order_ = 0.0;
    std::function<SpdoOperator(const EvalContext&)> make_;
    std::shared_ptr<const SpdoOperator> fixed_;
    std::shared_ptr<const SpdoOperator> fixed_adjoint_;
};

/// dY = −θY dt + (σ·e^{i k_n·x} + ρY) dw, Y(0) = amplitude·e^{i k_0·x},
/// windowed by sin(πt/T). σ = ρ = 0 gives a deterministic z.
struct ProcessSpec {
    double theta = 0.0;
    double sigma = 0.0;
    double rho = 0.0;
    std::array<int, 2> noise_mode{1, 0};
    cplx amplitude = 1.0;
    std::array<int, 2> initial_mode{1, 0};

    bool deterministic() const noexcept { return sigma == 0.0 && rho == 0.0; }
};

Semimartingale simulate_process(const ProcessSpec& spec, const TorusGrid& grid,
                                std::shared_ptr<const BrownianPath> path);

struct CarlemanConfig {
    double mu = 1024.0;
    double horizon = 0.25;
    std::size_t steps = 512;
    std::size_t paths = 256;
    std::uint64_t seed = 0;
    TorusGrid grid{1, 128};
    OperatorFamily a1 = OperatorFamily::zero(TorusGrid{1, 128});
    OperatorFamily b1 = OperatorFamily::zero(TorusGrid{1, 128});
    ProcessSpec process;
    /// Overrides the simulated process (used for z ≡ 0 and tests).
    std::function<Semimartingale(std::shared_ptr<const BrownianPath>)> custom_process;
    std::size_t threads = 0;  // 0: SPDO_LAB_THREADS or hardware concurrency
};

void validate(const CarlemanConfig& c);

inline constexpr std::size_t kCarlemanTerms = 6;
/// lhs1, lhs2, rhs1 … rhs4
inline constexpr std::array<const char*, kCarlemanTerms> kCarlemanTermNames = {
    "lhs_weighted_mass", "lhs_weighted_defect", "rhs_equation", "rhs_skew", "rhs_quadratic_variation",
    "rhs_increment_pairing"};

/// Both sides of the weighted estimate for one path.
struct PathTerms {
    std::array<double, kCarlemanTerms> terms{};
    double lhs() const noexcept { return terms[0] + terms[1]; }
    double rhs() const noexcept { return terms[2] + terms[3] + terms[4] + terms[5]; }
};

/// LHS terms by the trapezoid rule at the nodes. RHS increments pair with
/// left-node integrands; the deterministic weight and (t − T) factor are
/// taken at step midpoints.
PathTerms evaluate_path(const Trajectory& z, const BrownianPath& path, const OperatorFamily& a1,
                        const OperatorFamily& b1, double mu);

struct CarlemanReport {
    double mu = 0.0;
    double horizon = 0.0;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    std::string a1_name, b1_name;
    double a1_order = 0.0, b1_order = 0.0;
    std::array<double, kCarlemanTerms> term_mean{};
    std::array<double, kCarlemanTerms> term_se{};
    double lhs_mean = 0.0, rhs_mean = 0.0;
    double lhs_se = 0.0, rhs_se = 0.0;
    double gap = 0.0;  // rhs − lhs
    double se = 0.0;   // standard error of the per-path gap
    bool verdict = false;     // lhs ≤ rhs + 3·se
    bool borderline = false;  // |gap| ≤ 3·se
    std::vector<PathTerms> per_path;
};

CarlemanReport verify_inequality(const CarlemanConfig& config);

struct ScanResult {
    std::vector<CarlemanReport> reports;
    std::optional<double> largest_pass_horizon;
    std::optional<double> smallest_pass_mu;
    std::size_t passes = 0;
};

/// One report per (μ-value, T), T outermost. With `scale_by_horizon` each
/// value is κ and μ = κ/T².
ScanResult scan(const std::vector<double>& mu_values, const std::vector<double>& horizons, const CarlemanConfig& base,
                bool scale_by_horizon = true);

/// Worker count from SPDO_LAB_THREADS (≥ 1), else hardware concurrency.
std::size_t worker_count(std::size_t requested = 0);

}  // namespace spdo
