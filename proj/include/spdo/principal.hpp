#pragma once

#include "spdo/symbol.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace spdo {

/// Coefficient a_α(t, ω, x) of one monomial ξ^α.
using CoefficientRule = std::function<cplx(const EvalContext& ctx, const Vec& x)>;

struct MonomialTerm {
    std::array<int, 2> alpha{};
    CoefficientRule coefficient;
};

/// p_m(τ, ξ) = τ^m − Σ_{k<m} c_k(ξ) τ^k with c_k(ξ) = Σ_{|α|=m−k} a_α ξ^α.
///
/// Terms are grouped by the power of τ they multiply; c_k is homogeneous of
/// degree m − k in ξ, so the roots are homogeneous of degree 1.
class PrincipalSymbol {
public:
    PrincipalSymbol(std::string name, int dim, int m, std::vector<std::vector<MonomialTerm>> terms_by_tau_power,
                    SymbolTraits traits = {});

    const std::string& name() const noexcept { return name_; }
    int dim() const noexcept { return dim_; }
    int order() const noexcept { return m_; }
    const SymbolTraits& traits() const noexcept { return traits_; }

    /// c_k(t, ω, x, ξ), the coefficient of τ^k.
    cplx tau_coefficient(int k, const EvalContext& ctx, const Vec& x, const Vec& xi) const;
    std::vector<cplx> tau_coefficients(const EvalContext& ctx, const Vec& x, const Vec& xi) const;
    cplx operator()(const EvalContext& ctx, const Vec& x, cplx tau, const Vec& xi) const;

    /// c_k as a Symbol of order m − k (the operator A acting on D_t^k u).
    Symbol coefficient_symbol(int k) const;

private:
    std::string name_;
    int dim_;
    int m_;
    std::vector<std::vector<MonomialTerm>> terms_;
    SymbolTraits traits_;
};

/// Value of the monic polynomial τ^m − Σ c_k τ^k.
cplx evaluate_monic(std::span<const cplx> tau_coefficients, cplx tau);

/// Roots of τ^m − Σ_k c_k τ^k: closed forms for m ≤ 2, otherwise companion
/// eigenvalues polished by Newton. Throws RootSolverError if
/// max |p(λ)| > 1e-10·(1 + max|λ|)^m.
std::vector<cplx> monic_roots(std::span<const cplx> tau_coefficients);

std::vector<cplx> characteristic_roots(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x, const Vec& xi);

/// Smallest max-distance over all matchings of two root multisets.
double multiset_distance(std::span<const cplx> a, std::span<const cplx> b);

/// A root counts as complex when |Im λ| > kComplexRootThreshold·(1 + |λ|).
inline constexpr double kComplexRootThreshold = 1e-8;
inline bool is_complex_root(cplx l) { return std::abs(l.imag()) > kComplexRootThreshold * (1.0 + std::abs(l)); }

struct HypothesisReport {
    double epsilon = 0.0;
    double h1_margin = kInfinity;  // min pairwise distance over all root pairs
    double h2_margin = kInfinity;  // min |Im λ| over complex roots (∞ if none)
    double h3_margin = kInfinity;  // min pairwise distance among distinct roots
    std::size_t samples = 0;
    std::size_t complex_roots = 0;
    bool h1_pass = false;
    bool h2_pass = false;
    bool h3_pass = false;
    bool pass() const noexcept { return h1_pass && h2_pass && h3_pass; }
};

/// Checks (H1)–(H3) on the unit sphere over the sampled (t, ω, x).
HypothesisReport check_hypotheses(const PrincipalSymbol& p, const SampleSet& samples,
                                  const std::vector<Vec>& sphere, double epsilon);

}  // namespace spdo
