#pragma once

#include "spdo/principal.hpp"
#include "spdo/symbol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spdo::catalog {

/// Named scalar symbol a = scale · X(x) · W(t, ω) · F(ξ) with
///   X(x)    = base + amplitude·sin(x₁)     (variable_elliptic)
///           = e^{i·mode·x₁}                 (modulation, modulated_xi)
///           = 1                              otherwise
///   W(t, ω) = 1 + path_gain·sin(w(t))
///   F(ξ)    one of 1, (1+|ξ|²)^{s/2}, ξ_axis, ξ_axis², |ξ|.
/// The declared order defaults to the exact growth of F and may be overridden
/// (e.g. to test misdeclaration).
struct SymbolSpec {
    std::string name = "identity";
    double s = 1.0;
    double scale = 1.0;
    double base = 2.0;
    double amplitude = 1.0;
    int mode = 1;
    int axis = 0;
    double path_gain = 0.0;
    double integrability = kInfinity;
    std::optional<double> declared_order;
};

const std::vector<std::string>& symbol_names();
Symbol make_symbol(const SymbolSpec& spec, int dim);

/// Named principal symbols. Coefficients carry an optional x-modulation
/// (1 + x_amplitude·sin x₁) and path multiplier (1 + path_gain·sin w(t)),
/// both applied to every τ^k coefficient so homogeneity in ξ is preserved.
///
///   wave          τ² − speed²|ξ|²
///   laplace       τ² + |ξ|²
///   double_root   (τ − ξ₁)²
///   transport     τ − speed·ξ₁                   (m = 1)
///   cubic_mixed   (τ − ξ₁)(τ² + ξ₁²)             (n = 1)
///   cubic         τ³ − ξ₁τ² − ξ₁²τ − iξ₁³         (n = 1)
///   custom        τ^m − Σ_k custom[k]·ξ₁^{m−k}τ^k (n = 1)
struct PrincipalSpec {
    std::string name = "wave";
    double speed = 2.0;
    double x_amplitude = 0.0;
    double path_gain = 0.0;
    std::vector<cplx> custom;  // coefficients of τ^0 … τ^{m−1}; m = size
};

const std::vector<std::string>& principal_names();
PrincipalSymbol make_principal(const PrincipalSpec& spec, int dim);

}  // namespace spdo::catalog
