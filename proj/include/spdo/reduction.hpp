#pragma once

#include "spdo/grid.hpp"
#include "spdo/operator.hpp"
#include "spdo/paths.hpp"
#include "spdo/principal.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace spdo {

/// M = (Λ^{m−1}u, D_tΛ^{m−2}u, …, D_t^{m−1}u) on the time grid.
struct CompanionState {
    TimeGrid time_grid;
    int m = 1;
    std::vector<std::vector<SpectralField>> components;  // [j][k], j = 0 … m−1
};

/// D_t^j u = (1/i)^j ∂_t^j u by second-order finite differences
/// (central inside, one-sided at the ends). Throws InsufficientNodes when
/// the grid has too few nodes for the stencil.
std::vector<SpectralField> time_derivative(const Trajectory& u, int order);

CompanionState build_companion_state(const Trajectory& u, int m);

/// σ(A₀): |ξ| on the superdiagonal, last row c_k·|ξ|^{k+1−m}. Its eigenvalues
/// are the characteristic roots. Throws InvalidArgument for |ξ| = 0.
Eigen::MatrixXcd principal_matrix_symbol(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x, const Vec& xi);

struct Diagonalization {
    std::vector<cplx> eigenvalues;
    Eigen::MatrixXcd sigma;
    Eigen::MatrixXcd v;      // column k ∝ (|ξ|^{m−1}, λ_k|ξ|^{m−2}, …, λ_k^{m−1}), unit norm
    Eigen::MatrixXcd v_inv;
    double residual = 0.0;   // ‖σV − VΛ‖_F / ‖σ‖_F
    double condition = 0.0;  // 2-norm condition number of V
};

inline constexpr double kDegenerateFloor = 1e-8;

/// Closed-form Vandermonde diagonalization; throws DegenerateDiagonalization
/// when two roots are closer than kDegenerateFloor.
Diagonalization diagonalize(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x, const Vec& xi);

enum class BranchFlag { zero, elliptic, indefinite };
const char* to_string(BranchFlag f);

struct RootSample {
    std::size_t direction = 0;
    std::size_t context = 0;
    std::size_t point = 0;
    double t = 0.0;
    Vec x{};
    double angle = 0.0;
    std::vector<cplx> lambda;  // one per branch, on the unit sphere
    double residual = 0.0;     // diagonalization residual, NaN when degenerate
};

struct SplitRoot {
    std::size_t branch = 0;
    Symbol a1;  // |ξ|·Re λ(ξ/|ξ|), zero at ξ = 0
    Symbol b1;  // |ξ|·Im λ(ξ/|ξ|)
    BranchFlag flag = BranchFlag::indefinite;
    std::optional<EllipticityReport> ellipticity;
    double reconstruction_error = 0.0;  // max |A₁ + iB₁ − λ| over samples
};

struct RootSplitting {
    std::vector<Vec> sphere;
    std::vector<RootSample> samples;
    std::vector<SplitRoot> branches;
};

inline constexpr double kBranchAmbiguity = 1e-6;

/// Tracks root branches by nearest-neighbour continuation (in x and t within
/// a direction, then in angle), splits each into A₁ + iB₁ and classifies B₁.
/// The first direction of each sphere component is labelled by descending
/// (Im λ, Re λ). Ellipticity is checked on the lattice frequencies of `grid`
/// with |ξ| ≥ 1. Throws BranchCrossing when distinct roots approach closer
/// than kBranchAmbiguity.
RootSplitting split_roots(const PrincipalSymbol& p, const SampleSet& samples, const std::vector<Vec>& sphere,
                          const TorusGrid& grid);

/// Exact D_t^j u(t) for j = 0 … m.
using ManufacturedSolution = std::function<SpectralField(double t, int order)>;

struct ConsistencyRow {
    std::size_t steps = 0;
    double max_original = 0.0;     // max_k ‖D_t^m u − Σ A^{(k)} D_t^k u‖
    double max_system = 0.0;       // max_k ‖(1/i)(M_{k+1}−M_k)/Δt − 𝒜M_k‖
    double discrepancy = 0.0;      // max_k |‖R_sys‖ − ‖r_orig‖|
};

struct ConsistencyStudy {
    std::vector<ConsistencyRow> rows;
    std::vector<double> orders;    // log₂ of successive discrepancy ratios
    double min_order = 0.0;
};

/// Residual of the order-m equation against that of the first-order system
/// built from sampled snapshots via build_companion_state, for one step count.
/// Coefficients must be path-independent.
ConsistencyRow reduction_consistency(const PrincipalSymbol& p, const TorusGrid& grid, const ManufacturedSolution& u,
                                     double horizon, std::size_t steps);

/// Runs reduction_consistency for steps, 2·steps, … (levels values).
ConsistencyStudy reduction_convergence(const PrincipalSymbol& p, const TorusGrid& grid, const ManufacturedSolution& u,
                                       double horizon, std::size_t steps, std::size_t levels);

}  // namespace spdo
