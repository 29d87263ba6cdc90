#include "spdo/reduction.hpp"

#include "spdo/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace spdo {

namespace {

constexpr cplx kMinusI{0.0, -1.0};

SpectralField combine(const std::vector<std::pair<double, const SpectralField*>>& terms, cplx scale) {
    const auto& grid = terms.front().second->grid();
    std::vector<cplx> v(grid.size(), 0.0);
    for (const auto& [w, f] : terms) {
        const auto fv = f->values();
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * fv[j];
    }
    for (auto& c : v) c *= scale;
    return SpectralField::from_values(grid, std::move(v));
}

// Raw ∂_t^order (order 1 or 2) with second-order stencils.
std::vector<SpectralField> raw_derivative(const std::vector<SpectralField>& u, double h, int order) {
    const std::size_t n = u.size();
    std::vector<SpectralField> out;
    out.reserve(n);
    if (order == 1) {
        if (n < 3) throw InsufficientNodes("first time derivative needs at least 3 nodes");
        const double s = 1.0 / (2.0 * h);
        out.push_back(combine({{-3.0, &u[0]}, {4.0, &u[1]}, {-1.0, &u[2]}}, s));
        for (std::size_t k = 1; k + 1 < n; ++k) out.push_back(combine({{-1.0, &u[k - 1]}, {1.0, &u[k + 1]}}, s));
        out.push_back(combine({{3.0, &u[n - 1]}, {-4.0, &u[n - 2]}, {1.0, &u[n - 3]}}, s));
    } else {
        if (n < 4) throw InsufficientNodes("second time derivative needs at least 4 nodes");
        const double s = 1.0 / (h * h);
        out.push_back(combine({{2.0, &u[0]}, {-5.0, &u[1]}, {4.0, &u[2]}, {-1.0, &u[3]}}, s));
        for (std::size_t k = 1; k + 1 < n; ++k)
            out.push_back(combine({{1.0, &u[k - 1]}, {-2.0, &u[k]}, {1.0, &u[k + 1]}}, s));
        out.push_back(combine({{2.0, &u[n - 1]}, {-5.0, &u[n - 2]}, {4.0, &u[n - 3]}, {-1.0, &u[n - 4]}}, s));
    }
    return out;
}

double torus_distance(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i) {
        double e = std::fmod(std::abs(a[i] - b[i]), 2.0 * std::numbers::pi);
        e = std::min(e, 2.0 * std::numbers::pi - e);
        d += e * e;
    }
    return d;
}

std::string where(const EvalContext& ctx, const Vec& x, const Vec& xi) {
    std::ostringstream s;
    s << " at t=" << ctx.t << " x=(" << x[0] << "," << x[1] << ") xi=(" << xi[0] << "," << xi[1] << ")";
    return s.str();
}

}  // namespace

std::vector<SpectralField> time_derivative(const Trajectory& u, int order) {
    if (order < 0) throw InvalidArgument("time derivative order must be nonnegative");
    if (u.snapshots.size() != u.time_grid.nodes()) throw InvalidArgument("trajectory does not match its time grid");
    std::vector<SpectralField> cur = u.snapshots;
    const double h = u.time_grid.dt();
    int left = order;
    while (left > 0) {
        const int step = left >= 2 ? 2 : 1;
        cur = raw_derivative(cur, h, step);
        left -= step;
    }
    if (order == 0) return cur;
    cplx scale = 1.0;
    for (int i = 0; i < order; ++i) scale *= kMinusI;
    for (auto& f : cur) f = f * scale;
    return cur;
}

CompanionState build_companion_state(const Trajectory& u, int m) {
    if (m < 1) throw InvalidArgument("companion order must be at least 1");
    if (u.snapshots.empty()) throw InsufficientNodes("empty trajectory");
    CompanionState s{u.time_grid, m, {}};
    const auto& grid = u.snapshots.front().grid();
    for (int j = 0; j < m; ++j) {
        auto d = time_derivative(u, j);
        const int power = m - 1 - j;
        if (power != 0) {
            const auto lam = lambda_operator(grid, power);
            for (auto& f : d) f = lam.apply(f);
        }
        s.components.push_back(std::move(d));
    }
    return s;
}

Eigen::MatrixXcd principal_matrix_symbol(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x, const Vec& xi) {
    const double r = std::sqrt(norm2(xi));
    if (!(r > 0.0)) throw InvalidArgument("principal matrix symbol is undefined at ξ = 0");
    const int m = p.order();
    const auto c = p.tau_coefficients(ctx, x, xi);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(m, m);
    for (int j = 0; j + 1 < m; ++j) s(j, j + 1) = r;
    for (int k = 0; k < m; ++k) s(m - 1, k) = c[static_cast<std::size_t>(k)] * std::pow(r, k + 1 - m);
    return s;
}

Diagonalization diagonalize(const PrincipalSymbol& p, const EvalContext& ctx, const Vec& x, const Vec& xi) {
    Diagonalization d;
    d.sigma = principal_matrix_symbol(p, ctx, x, xi);
    d.eigenvalues = characteristic_roots(p, ctx, x, xi);
    const int m = p.order();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (std::abs(d.eigenvalues[i] - d.eigenvalues[j]) < kDegenerateFloor)
                throw DegenerateDiagonalization("characteristic roots coincide" + where(ctx, x, xi));
    const double r = std::sqrt(norm2(xi));
    d.v.resize(m, m);
    Eigen::MatrixXcd lam = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        const cplx l = d.eigenvalues[static_cast<std::size_t>(k)];
        cplx pw = 1.0;
        for (int j = 0; j < m; ++j) {
            d.v(j, k) = pw * std::pow(r, m - 1 - j);
            pw *= l;
        }
        d.v.col(k) /= d.v.col(k).norm();
        lam(k, k) = l;
    }
    d.v_inv = d.v.partialPivLu().inverse();
    const double sn = d.sigma.norm();
    d.residual = (d.sigma * d.v - d.v * lam).norm() / (sn > 0.0 ? sn : 1.0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d.v);
    const auto& sv = svd.singularValues();
    d.condition = sv(0) / sv(sv.size() - 1);
    return d;
}

const char* to_string(BranchFlag f) {
    switch (f) {
        case BranchFlag::zero: return "zero";
        case BranchFlag::elliptic: return "elliptic";
        case BranchFlag::indefinite: return "indefinite";
    }
    return "?";
}

namespace {

struct BranchTable {
    int dim = 1;
    bool path_independent = true;
    bool x_independent = false;
    std::vector<Vec> sphere;
    std::vector<double> angles;            // per sphere direction
    std::vector<std::size_t> angle_order;  // sphere indices sorted by angle
    std::vector<double> times;
    std::vector<std::uint64_t> seeds, paths;
    std::vector<Vec> points;
    std::size_t contexts = 0;
    std::vector<std::vector<cplx>> values;  // [branch][(d·C + c)·P + i]

    std::size_t context_index(const EvalContext& ctx) const {
        const auto& bp = ctx.path.underlying_for_reporting();
        std::size_t best = contexts;
        double best_t = -kInfinity;
        std::size_t earliest = contexts;
        for (std::size_t c = 0; c < contexts; ++c) {
            if (!path_independent && (seeds[c] != bp.seed || paths[c] != bp.path_index)) continue;
            if (earliest == contexts || times[c] < times[earliest]) earliest = c;
            if (times[c] <= ctx.t && times[c] > best_t) {
                best_t = times[c];
                best = c;
            }
        }
        if (best == contexts) best = earliest;
        if (best == contexts) throw EvaluationError("root branch was not tabulated on this Brownian path");
        return best;
    }

    std::size_t point_index(const Vec& x) const {
        if (x_independent) return 0;
        std::size_t best = 0;
        double bd = kInfinity;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = torus_distance(points[i], x);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }

    cplx at(std::size_t b, std::size_t d, std::size_t c, std::size_t i) const {
        return values[b][(d * contexts + c) * points.size() + i];
    }

    cplx unit_value(std::size_t b, const EvalContext& ctx, const Vec& x, const Vec& xi) const {
        const std::size_t c = context_index(ctx);
        const std::size_t i = point_index(x);
        if (dim == 1) {
            for (std::size_t d = 0; d < sphere.size(); ++d)
                if ((sphere[d][0] > 0.0) == (xi[0] > 0.0)) return at(b, d, c, i);
            return at(b, 0, c, i);
        }
        const double th = std::atan2(xi[1], xi[0]);
        const std::size_t n = angle_order.size();
        if (n == 1) return at(b, angle_order[0], c, i);
        std::size_t hi = 0;
        while (hi < n && angles[angle_order[hi]] <= th) ++hi;
        const std::size_t lo_d = angle_order[(hi + n - 1) % n];
        const std::size_t hi_d = angle_order[hi % n];
        double a0 = angles[lo_d], a1 = angles[hi_d];
        double tt = th;
        if (a1 <= a0) a1 += 2.0 * std::numbers::pi;
        if (tt < a0) tt += 2.0 * std::numbers::pi;
        const double w = (tt - a0) / (a1 - a0);
        return (1.0 - w) * at(b, lo_d, c, i) + w * at(b, hi_d, c, i);
    }
};

std::vector<std::size_t> best_matching(const std::vector<cplx>& prev, const std::vector<cplx>& roots) {
    std::vector<std::size_t> perm(roots.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_cost = kInfinity;
    do {
        double cost = 0.0;
        for (std::size_t b = 0; b < prev.size(); ++b) cost += std::norm(roots[perm[b]] - prev[b]);
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<cplx> canonical(std::vector<cplx> roots) {
    std::stable_sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (a.imag() != b.imag()) return a.imag() > b.imag();
        return a.real() > b.real();
    });
    return roots;
}

}  // namespace

RootSplitting split_roots(const PrincipalSymbol& p, const SampleSet& samples, const std::vector<Vec>& sphere,
                          const TorusGrid& grid) {
    if (sphere.empty() || samples.contexts.empty() || samples.points.empty())
        throw InvalidArgument("root splitting needs a nonempty sample set and sphere");
    const std::size_t m = static_cast<std::size_t>(p.order());
    const std::size_t C = samples.contexts.size(), P = samples.points.size(), D = sphere.size();

    auto table = std::make_shared<BranchTable>();
    table->dim = samples.dim;
    table->path_independent = p.traits().path_independent;
    table->x_independent = p.traits().x_independent;
    table->sphere = sphere;
    table->points = samples.points;
    table->contexts = C;
    for (const auto& ctx : samples.contexts) {
        table->times.push_back(ctx.t);
        table->seeds.push_back(ctx.path.underlying_for_reporting().seed);
        table->paths.push_back(ctx.path.underlying_for_reporting().path_index);
    }
    for (const auto& v : sphere) table->angles.push_back(std::atan2(v[1], v[0]));
    table->angle_order.resize(D);
    std::iota(table->angle_order.begin(), table->angle_order.end(), 0);
    std::sort(table->angle_order.begin(), table->angle_order.end(),
              [&](std::size_t a, std::size_t b) { return table->angles[a] < table->angles[b]; });
    table->values.assign(m, std::vector<cplx>(D * C * P));

    RootSplitting out;
    out.sphere = sphere;
    std::vector<cplx> anchor;  // first sample of the previous direction
    for (std::size_t d = 0; d < D; ++d) {
        std::vector<cplx> prev;
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t ii = 0; ii < P; ++ii) {
                const std::size_t i = (c % 2 == 0) ? ii : P - 1 - ii;
                const auto& ctx = samples.contexts[c];
                const auto& x = samples.points[i];
                const auto& xi = sphere[d];
                std::vector<cplx> roots;
                try {
                    roots = characteristic_roots(p, ctx, x, xi);
                } catch (const RootSolverError& e) {
                    throw RootSolverError(e.what() + where(ctx, x, xi), e.residual());
                }
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = a + 1; b < m; ++b) {
                        const double dist = std::abs(roots[a] - roots[b]);
                        const double same = 1e-10 * (1.0 + std::abs(roots[a]) + std::abs(roots[b]));
                        if (dist > same && dist < kBranchAmbiguity)
                            throw BranchCrossing("root branches approach within " + std::to_string(dist) +
                                                 where(ctx, x, xi));
                    }
                std::vector<cplx> ordered;
                if (!prev.empty()) {
                    const auto perm = best_matching(prev, roots);
                    for (std::size_t b = 0; b < m; ++b) ordered.push_back(roots[perm[b]]);
                } else if (samples.dim == 2 && !anchor.empty()) {
                    const auto perm = best_matching(anchor, roots);
                    for (std::size_t b = 0; b < m; ++b) ordered.push_back(roots[perm[b]]);
                } else {
                    ordered = canonical(roots);
                }
                if (prev.empty()) anchor = ordered;
                prev = ordered;

                RootSample rs;
                rs.direction = d;
                rs.context = c;
                rs.point = i;
                rs.t = ctx.t;
                rs.x = x;
                rs.angle = std::atan2(xi[1], xi[0]);
                rs.lambda = ordered;
                try {
                    rs.residual = diagonalize(p, ctx, x, xi).residual;
                } catch (const DegenerateDiagonalization&) {
                    rs.residual = std::numeric_limits<double>::quiet_NaN();
                }
                for (std::size_t b = 0; b < m; ++b) table->values[b][(d * C + c) * P + i] = ordered[b];
                out.samples.push_back(std::move(rs));
            }
        }
    }

    SymbolTraits traits = p.traits();
    traits.homogeneity = 1.0;
    const auto freqs = lattice_frequencies(grid, 1.0);
    for (std::size_t b = 0; b < m; ++b) {
        auto part = [table, b](bool imag) {
            return [table, b, imag](const EvalContext& ctx, const Vec& x, const Vec& xi) -> cplx {
                const double r = std::sqrt(norm2(xi));
                if (r == 0.0) return 0.0;
                const cplx l = table->unit_value(b, ctx, x, xi);
                return r * (imag ? l.imag() : l.real());
            };
        };
        const std::string tag = p.name() + ".branch" + std::to_string(b);
        SplitRoot s{b, Symbol(tag + ".A1", 1.0, part(false), traits), Symbol(tag + ".B1", 1.0, part(true), traits),
                    BranchFlag::indefinite, std::nullopt, 0.0};
        bool all_zero = true;
        for (const auto& rs : out.samples) {
            const cplx l = rs.lambda[b];
            if (std::abs(l.imag()) > kComplexRootThreshold * (1.0 + std::abs(l))) all_zero = false;
            const auto& ctx = samples.contexts[rs.context];
            const Vec& xi = sphere[rs.direction];
            const cplx rebuilt = s.a1(ctx, rs.x, xi) + cplx(0.0, 1.0) * s.b1(ctx, rs.x, xi);
            s.reconstruction_error = std::max(s.reconstruction_error, std::abs(rebuilt - l));
        }
        if (all_zero) {
            s.flag = BranchFlag::zero;
        } else {
            s.ellipticity = check_elliptic(s.b1, 1.0, samples, freqs);
            s.flag = s.ellipticity->is_elliptic ? BranchFlag::elliptic : BranchFlag::indefinite;
        }
        out.branches.push_back(std::move(s));
    }
    return out;
}

ConsistencyRow reduction_consistency(const PrincipalSymbol& p, const TorusGrid& grid, const ManufacturedSolution& u,
                                     double horizon, std::size_t steps) {
    if (!p.traits().path_independent)
        throw InvalidArgument("reduction consistency needs path-independent coefficients");
    const TimeGrid tg(horizon, steps);
    const int m = p.order();
    Trajectory traj{tg, {}};
    for (std::size_t k = 0; k < tg.nodes(); ++k) traj.snapshots.push_back(u(tg.node(k), 0));
    const auto state = build_companion_state(traj, m);

    std::vector<Symbol> coeffs;
    for (int k = 0; k < m; ++k) coeffs.push_back(p.coefficient_symbol(k));
    const auto lambda1 = lambda_operator(grid, 1.0);
    std::vector<SpdoOperator> weights;
    for (int k = 0; k < m; ++k) weights.push_back(lambda_operator(grid, k + 1 - m));

    auto frozen = [&](double t) {
        std::vector<SpdoOperator> ops;
        const auto ctx = deterministic_context(t, horizon);
        for (const auto& c : coeffs) ops.push_back(SpdoOperator::quantize(c, grid, ctx));
        return ops;
    };
    std::vector<SpdoOperator> fixed;
    if (p.traits().time_independent) fixed = frozen(0.0);

    ConsistencyRow row;
    row.steps = steps;
    const double dt = tg.dt();
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = tg.node(k);
        const auto ops = p.traits().time_independent ? fixed : frozen(t);

        auto orig = u(t, m);
        for (int j = 0; j < m; ++j) orig = orig - ops[static_cast<std::size_t>(j)].apply(u(t, j));
        const double r_orig = l2_norm(orig);

        double sys2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const auto& now = state.components[static_cast<std::size_t>(j)][k];
            const auto& next = state.components[static_cast<std::size_t>(j)][k + 1];
            auto r = (next - now) * (kMinusI / dt);
            if (j + 1 < m) {
                r = r - lambda1.apply(state.components[static_cast<std::size_t>(j + 1)][k]);
            } else {
                for (int q = 0; q < m; ++q)
                    r = r - ops[static_cast<std::size_t>(q)].apply(
                                weights[static_cast<std::size_t>(q)].apply(state.components[static_cast<std::size_t>(q)][k]));
            }
            const double n = l2_norm(r);
            sys2 += n * n;
        }
        const double r_sys = std::sqrt(sys2);
        row.max_original = std::max(row.max_original, r_orig);
        row.max_system = std::max(row.max_system, r_sys);
        row.discrepancy = std::max(row.discrepancy, std::abs(r_sys - r_orig));
    }
    return row;
}

ConsistencyStudy reduction_convergence(const PrincipalSymbol& p, const TorusGrid& grid, const ManufacturedSolution& u,
                                       double horizon, std::size_t steps, std::size_t levels) {
    if (levels < 2) throw InvalidArgument("convergence study needs at least two levels");
    ConsistencyStudy s;
    for (std::size_t l = 0; l < levels; ++l) s.rows.push_back(reduction_consistency(p, grid, u, horizon, steps << l));
    s.min_order = kInfinity;
    for (std::size_t l = 1; l < levels; ++l) {
        const double a = s.rows[l - 1].discrepancy, b = s.rows[l].discrepancy;
        const double order = (a > 0.0 && b > 0.0) ? std::log2(a / b) : kInfinity;
        s.orders.push_back(order);
        s.min_order = std::min(s.min_order, order);
    }
    return s;
}

}  // namespace spdo
