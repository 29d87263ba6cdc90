#include "spdo/principal.hpp"

#include "spdo/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spdo {

PrincipalSymbol::PrincipalSymbol(std::string name, int dim, int m,
                                 std::vector<std::vector<MonomialTerm>> terms_by_tau_power, SymbolTraits traits)
    : name_(std::move(name)), dim_(dim), m_(m), terms_(std::move(terms_by_tau_power)), traits_(traits) {
    if (dim != 1 && dim != 2) throw InvalidArgument("principal symbol dimension must be 1 or 2");
    if (m < 1) throw InvalidArgument("equation order must be at least 1");
    if (terms_.size() != static_cast<std::size_t>(m))
        throw InvalidArgument("principal symbol needs one term list per power of τ below m");
    for (int k = 0; k < m; ++k)
        for (const auto& t : terms_[k]) {
            if (t.alpha[0] + t.alpha[1] != m - k)
                throw InvalidArgument("monomial degree must equal m − k for the τ^k coefficient");
            if (dim == 1 && t.alpha[1] != 0) throw InvalidArgument("second frequency index used in 1-D");
            if (!t.coefficient) throw InvalidArgument("monomial without coefficient rule");
        }
    traits_.homogeneity = 1.0;
}

cplx PrincipalSymbol::tau_coefficient(int k, const EvalContext& ctx, const Vec& x, const Vec& xi) const {
    cplx acc = 0.0;
    for (const auto& t : terms_.at(static_cast<std::size_t>(k)))
        acc += t.coefficient(ctx, x) * std::pow(xi[0], t.alpha[0]) * std::pow(xi[1], t.alpha[1]);
    return acc;
}

std::vector<cplx> PrincipalSymbol::tau_coefficients(const EvalContext& ctx, const Vec& x, const Vec& xi) const {
    std::vector<cplx> c(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k) c[static_cast<std::size_t>(k)] = tau_coefficient(k, ctx, x, xi);
    return c;
}

cplx PrincipalSymbol::operator()(const EvalContext& ctx, const Vec& x, cplx tau, const Vec& xi) const {
    const auto c = tau_coefficients(ctx, x, xi);
    return evaluate_monic(c, tau);
}

Symbol PrincipalSymbol::coefficient_symbol(int k) const {
    if (k < 0 || k >= m_) throw InvalidArgument("τ power out of range");
    auto self = *this;
    SymbolTraits t = traits_;
    t.homogeneity = static_cast<double>(m_ - k);
    return Symbol(name_ + ".c" + std::to_string(k), static_cast<double>(m_ - k),
                  [self, k](const EvalContext& ctx, const Vec& x, const Vec& xi) {
                      return self.tau_coefficient(k, ctx, x, xi);
                  },
                  t);
}

cplx evaluate_monic(std::span<const cplx> c, cplx tau) {
    // Horner on τ^m − c_{m−1}τ^{m−1} − … − c_0.
    cplx acc = 1.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * tau - c[k];
    return acc;
}

namespace {

cplx evaluate_monic_derivative(std::span<const cplx> c, cplx tau) {
    const auto m = c.size();
    cplx acc = static_cast<double>(m);
    for (std::size_t k = m - 1; k-- > 0;) acc = acc * tau - static_cast<double>(k + 1) * c[k + 1];
    return acc;
}

std::vector<cplx> quadratic_roots(cplx c0, cplx c1) {
    const cplx b = -c1;
    const cplx c = -c0;
    cplx s = std::sqrt(b * b - 4.0 * c);
    if ((std::conj(b) * s).real() < 0.0) s = -s;
    const cplx q = -0.5 * (b + s);
    if (q == cplx(0.0)) return {0.0, 0.0};
    return {q, c / q};
}

double residual_of(std::span<const cplx> c, const std::vector<cplx>& roots) {
    double r = 0.0;
    for (const auto& l : roots) r = std::max(r, std::abs(evaluate_monic(c, l)));
    return r;
}

}  // namespace

std::vector<cplx> monic_roots(std::span<const cplx> c) {
    const std::size_t m = c.size();
    if (m == 0) throw InvalidArgument("monic polynomial needs degree ≥ 1");
    std::vector<cplx> roots;
    if (m == 1) {
        roots = {c[0]};
    } else if (m == 2) {
        roots = quadratic_roots(c[0], c[1]);
    } else {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t i = 1; i < m; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
        for (std::size_t k = 0; k < m; ++k) comp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m - 1)) = c[k];
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
        if (solver.info() != Eigen::Success) throw RootSolverError("companion eigenvalue iteration failed", kInfinity);
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) roots.push_back(solver.eigenvalues()(i));
        for (auto& l : roots) {
            for (int it = 0; it < 3; ++it) {
                const cplx f = evaluate_monic(c, l);
                const cplx df = evaluate_monic_derivative(c, l);
                if (df == cplx(0.0)) break;
                const cplx cand = l - f / df;
                if (std::abs(evaluate_monic(c, cand)) < std::abs(f)) {
                    l = cand;
                } else {
                    break;
                }
            }
        }
    }
    double scale = 0.0;
    for (const auto& l : roots) scale = std::max(scale, std::abs(l));
    const double residual = residual_of(c, roots);
    const double allowed = 1e-10 * std::pow(1.0 + scale, static_cast<double>(m));
    if (!(residual <= allowed)) {
        std::ostringstream msg;
        msg << "root refinement did not converge: residual " << residual << " > " << allowed;
        throw RootSolverError(msg.str(), residual);
    }
    return roots;
}

std::vector<cplx> characteristic_roots(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x,
                                       const Vec& xi) {
    if (!(norm2(xi) > 0.0)) throw InvalidArgument("characteristic roots need |ξ| > 0");
    const auto c = p.tau_coefficients(ctx, x, xi);
    return monic_roots(c);
}

double multiset_distance(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw InvalidArgument("multisets differ in size");
    if (a.size() > 8) throw InvalidArgument("multiset matching limited to 8 elements");
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = kInfinity;
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return a.empty() ? 0.0 : best;
}

namespace {

bool meets(double margin, double eps) { return margin + 1e-12 * (1.0 + eps) >= eps; }

}  // namespace

HypothesisReport check_hypotheses(const PrincipalSymbol& p, const SampleSet& samples, const std::vector<Vec>& sphere,
                                  double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("hypothesis ε must be positive");
    HypothesisReport r;
    r.epsilon = epsilon;
    for (const auto& ctx : samples.contexts)
        for (const auto& x : samples.points)
            for (const auto& xi : sphere) {
                std::vector<cplx> roots;
                try {
                    roots = characteristic_roots(p, ctx, x, xi);
                } catch (const RootSolverError& e) {
                    std::ostringstream msg;
                    msg << e.what() << " at t=" << ctx.t << " x=(" << x[0] << "," << x[1] << ") xi=(" << xi[0]
                        << "," << xi[1] << ")";
                    throw RootSolverError(msg.str(), e.residual());
                }
                ++r.samples;
                for (std::size_t i = 0; i < roots.size(); ++i) {
                    if (is_complex_root(roots[i])) {
                        ++r.complex_roots;
                        r.h2_margin = std::min(r.h2_margin, std::abs(roots[i].imag()));
                    }
                    for (std::size_t j = i + 1; j < roots.size(); ++j) {
                        const double d = std::abs(roots[i] - roots[j]);
                        r.h1_margin = std::min(r.h1_margin, d);
                        const double coincide = 1e-6 * (1.0 + std::abs(roots[i]) + std::abs(roots[j]));
                        if (d > coincide) r.h3_margin = std::min(r.h3_margin, d);
                    }
                }
            }
    r.h1_pass = r.h1_margin > 0.0 && meets(r.h1_margin, epsilon);
    r.h2_pass = meets(r.h2_margin, epsilon);
    r.h3_pass = meets(r.h3_margin, epsilon);
    return r;
}

}  // namespace spdo
