#pragma once

#include "spdo/grid.hpp"
#include "spdo/paths.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spdo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using SymbolRule = std::function<cplx(const EvalContext& ctx, const Vec& x, const Vec& xi)>;

/// Structural facts about a symbol that let operators pick a cheaper form.
struct SymbolTraits {
    bool x_independent = false;
    bool time_independent = false;
    bool path_independent = false;
    std::optional<double> homogeneity;  // degree for large |ξ|, when known
};

/// Adapted symbol a(t, ω, x, ξ) with declared class S^l_p.
class Symbol {
public:
    Symbol(std::string name, double order, SymbolRule rule, SymbolTraits traits = {},
           double integrability = kInfinity);

    const std::string& name() const noexcept { return name_; }
    double order() const noexcept { return order_; }
    double integrability() const noexcept { return integrability_; }
    const SymbolTraits& traits() const noexcept { return traits_; }

    cplx operator()(const EvalContext& ctx, const Vec& x, const Vec& xi) const { return rule_(ctx, x, xi); }

    Symbol with_order(double order) const;
    Symbol renamed(std::string name) const;

private:
    std::string name_;
    double order_;
    double integrability_;
    SymbolRule rule_;
    SymbolTraits traits_;
};

/// Pointwise complex conjugate; principal symbol of the adjoint.
Symbol conjugate(const Symbol& a);

/// ∂_ξ^α ∂_x^β a by nested central differences (steps 1e-3·(1+|ξ|) in ξ and
/// 1e-3 in x). Orders up to 2 per variable are supported.
cplx symbol_derivative(const Symbol& a, const EvalContext& ctx, const Vec& x, const Vec& xi,
                       std::array<int, 2> alpha, std::array<int, 2> beta);

/// Points of the unit sphere: {±1} for n = 1, `angles` equispaced for n = 2.
std::vector<Vec> unit_sphere(int dim, std::size_t angles = 64);

/// Sample points (t, ω) and x over which empirical class checks run.
struct SampleSet {
    int dim = 1;
    std::vector<EvalContext> contexts;
    std::vector<Vec> points;
};

struct SampleSetOptions {
    std::size_t paths = 2;
    std::size_t times = 4;        // cutoff times spread over (0, T]
    std::size_t x_stride = 8;     // every x_stride-th grid node
    std::uint64_t seed = 0;
};

SampleSet make_sample_set(const TorusGrid& grid, const TimeGrid& time_grid, const SampleSetOptions& opts = {});

struct OrderEntry {
    std::array<int, 2> alpha{};
    std::array<int, 2> beta{};
    double fitted_exponent = 0.0;  // −∞ when every sample is below the floor
    double bound = 0.0;            // l − |α|
    double bound_estimate = 0.0;   // max |∂a| / (1+|ξ|)^{l−|α|}
    bool below_floor = false;
    bool pass = false;
};

struct OrderReport {
    double declared_order = 0.0;
    double integrability = kInfinity;
    std::vector<OrderEntry> entries;
    /// ∫₀ᵀ M(t)^p dt (p < ∞) or sup_t M(t) (p = ∞) for the order-0 index,
    /// estimated over the sampled cutoff times.
    double time_integrability_estimate = 0.0;
    bool time_integrability_finite = true;
    bool pass = false;
    std::optional<std::size_t> offending;  // index into entries
};

struct OrderCheckOptions {
    double max_frequency = 64.0;   // N ≥ 8
    std::size_t radii = 17;        // log-spaced in [1, N]
    double tolerance = 0.05;
    double floor = 1e-9;           // relative to max(1, max|a|)
    int max_total_derivatives = 2;
};

/// Empirical class check: fits the log-log growth of
/// max_{t,ω,x,θ} |∂_ξ^α ∂_x^β a(t, ω, x, rθ)| in r over the upper half of
/// the log-spaced radii (r ≥ √N), where the asymptotic exponent dominates.
OrderReport verify_symbol_order(const Symbol& a, const SampleSet& samples, const OrderCheckOptions& opts = {});

struct EllipticityReport {
    bool is_elliptic = false;
    double constant = 0.0;  // min |a| / (1+|ξ|)^l over samples with |ξ| ≥ R
    double radius = 1.0;
    Vec worst_x{};
    Vec worst_xi{};
    double worst_t = 0.0;
};

inline constexpr double kEllipticFloor = 1e-8;

/// Integer lattice frequencies with R ≤ |ξ| within the retained band of `grid`.
std::vector<Vec> lattice_frequencies(const TorusGrid& grid, double radius);

EllipticityReport check_elliptic(const Symbol& a, double radius, const SampleSet& samples,
                                 const std::vector<Vec>& frequencies);

}  // namespace spdo
