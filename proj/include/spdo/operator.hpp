#pragma once

#include "spdo/grid.hpp"
#include "spdo/symbol.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace spdo {

inline constexpr std::size_t kDenseCap = 4096;

/// A linear operator on SpectralFields of one grid, frozen at a (t, ω)
/// context. Three storage forms share one interface:
///   multiplier  diagonal in frequency (x-independent symbols, Λ^s)
///   quantized   left quantization (Au)(x_j) = Σ_ξ e^{i x_j·ξ} a(x_j, ξ) û(ξ)
///   dense       explicit M^n × M^n matrix on physical values
class SpdoOperator {
public:
    enum class Form { multiplier, quantized, dense };

    /// Symbols flagged x-independent become multipliers, the rest quantized.
    static SpdoOperator quantize(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx,
                                 std::size_t cap = kDenseCap);
    static SpdoOperator multiplier(const TorusGrid& grid, std::vector<cplx> values, double order);
    /// `table(j, f)` = a(x_j, ξ_f) over nodes × frequencies (FFT order).
    static SpdoOperator from_table(const TorusGrid& grid, const Eigen::MatrixXcd& table, double order,
                                   std::size_t cap = kDenseCap);
    static SpdoOperator from_dense(const TorusGrid& grid, Eigen::MatrixXcd matrix, double order);
    static SpdoOperator identity(const TorusGrid& grid);

    const TorusGrid& grid() const noexcept { return grid_; }
    Form form() const noexcept { return form_; }
    double order() const noexcept { return order_; }

    SpectralField apply(const SpectralField& u) const;

    /// Column j is apply(δ_j). Throws CapExceeded when M^n > cap.
    Eigen::MatrixXcd dense_matrix(std::size_t cap = kDenseCap) const;

    /// Symbol values over nodes × frequencies (multiplier rows are identical).
    Eigen::MatrixXcd symbol_table() const;

    /// Per-frequency values; only valid for the multiplier form.
    const std::vector<cplx>& multiplier_values() const;

    /// Copy carrying a cached dense matrix; apply then uses it.
    SpdoOperator with_dense_cache(std::size_t cap = kDenseCap) const;
    bool has_dense_cache() const noexcept { return static_cast<bool>(dense_cache_); }

private:
    SpdoOperator(TorusGrid grid, Form form, double order) : grid_(grid), form_(form), order_(order) {}

    TorusGrid grid_;
    Form form_;
    double order_;
    std::vector<cplx> multiplier_;
    // quantized: kernel(j, f) = a(x_j, ξ_f)·e^{i x_j·ξ_f}; dense: the matrix.
    std::shared_ptr<const Eigen::MatrixXcd> matrix_;
    std::shared_ptr<const Eigen::MatrixXcd> dense_cache_;
};

/// Λ^s: multiplier (1 + |ξ|²)^{s/2}.
SpdoOperator lambda_operator(const TorusGrid& grid, double s);

/// Conjugate transpose of the dense realization (multipliers stay multipliers).
SpdoOperator adjoint(const SpdoOperator& a, std::size_t cap = kDenseCap);

/// Exact discrete composition A∘B (dense product unless both are multipliers).
SpdoOperator compose(const SpdoOperator& a, const SpdoOperator& b, std::size_t cap = kDenseCap);

enum class CompositionMode { exact, asymptotic1 };

struct Composition {
    SpdoOperator op;
    /// σ₀ = a·b + Σ_{|α|=1} ∂_ξ^α a · D_x^α b, pointwise by finite differences.
    std::optional<Symbol> symbol;
};

/// In asymptotic mode the operator quantizes σ₀ tabulated on the grid, with
/// D_x b computed spectrally along each frequency column and ∂_ξ a by a
/// five-point stencil.
Composition compose(const Symbol& a, const Symbol& b, const TorusGrid& grid, const EvalContext& ctx,
                    CompositionMode mode, std::size_t cap = kDenseCap);

/// Symbol-level first-order composition σ₀ (finite differences in both variables).
Symbol asymptotic_composition_symbol(const Symbol& a, const Symbol& b);

struct BoundednessRow {
    std::size_t cutoff = 0;       // N, grid has M = 2N points per axis
    double max_ratio = 0.0;
    double max_ratio_random = 0.0;
    double max_ratio_modes = 0.0;
};

struct BoundednessReport {
    double s = 0.0;
    double order = 0.0;
    std::vector<BoundednessRow> rows;
    double variation = 0.0;  // (max − min) / max of max_ratio across cutoffs
};

struct BoundednessOptions {
    double s = 1.0;
    std::size_t trials = 32;
    std::vector<std::size_t> cutoffs = {32, 64, 128};
    std::uint64_t seed = 0;
};

/// max ‖Au‖_{H^{s−l}} / ‖u‖_{H^s} over random unit-H^s fields and pure modes
/// at the top retained frequencies, per cutoff.
BoundednessReport boundedness_harness(const Symbol& a, int dim, const EvalContext& ctx,
                                      const BoundednessOptions& opts);

/// Smooth low-frequency cutoff: 0 for |ξ| ≤ R, cosine taper on [R, 2R], 1 above.
double parametrix_cutoff(double magnitude, double radius);

struct Parametrix {
    SpdoOperator op;
    Symbol symbol;               // b₀ = χ(|ξ|)/a
    EllipticityReport ellipticity;
};

/// One-term left parametrix B₁ with symbol χ(|ξ|)/a. Ellipticity is checked
/// over the grid nodes, |ξ| ≥ R and the given context; throws NotElliptic.
Parametrix left_parametrix(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx, double radius);

/// Right parametrix B₂ = (left parametrix of ā)*, so that A·B₂ − I smooths.
Parametrix right_parametrix(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx, double radius);

struct ResidualRow {
    int frequency = 0;
    double residual = 0.0;
};

struct ResidualStudy {
    std::vector<ResidualRow> rows;
    double fitted_slope = 0.0;  // log-log slope of residual against frequency
};

/// ‖(B∘A − I)e^{ikx}‖_{L²} (left) or ‖(A∘B − I)e^{ikx}‖ (right) along axis 0
/// for k in [k_min, k_max].
ResidualStudy parametrix_residual(const SpdoOperator& a, const SpdoOperator& b, bool left, int k_min, int k_max);

/// Log-log slope of ‖(X − Y)e^{ikx}‖ over k ∈ [k_min, k_max] for two operators.
ResidualStudy difference_decay(const SpdoOperator& x, const SpdoOperator& y, int k_min, int k_max);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spdo
