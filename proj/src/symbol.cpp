#include "spdo/symbol.hpp"

#include "spdo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spdo {

Symbol::Symbol(std::string name, double order, SymbolRule rule, SymbolTraits traits, double integrability)
    : name_(std::move(name)),
      order_(order),
      integrability_(integrability),
      rule_(std::move(rule)),
      traits_(traits) {
    if (!rule_) throw InvalidArgument("symbol '" + name_ + "' has no evaluation rule");
    if (!(integrability >= 1.0)) throw InvalidArgument("integrability index must lie in [1, ∞]");
}

Symbol Symbol::with_order(double order) const {
    Symbol s = *this;
    s.order_ = order;
    return s;
}

Symbol Symbol::renamed(std::string name) const {
    Symbol s = *this;
    s.name_ = std::move(name);
    return s;
}

Symbol conjugate(const Symbol& a) {
    return Symbol("conj(" + a.name() + ")", a.order(),
                  [a](const EvalContext& ctx, const Vec& x, const Vec& xi) { return std::conj(a(ctx, x, xi)); },
                  a.traits(), a.integrability());
}

namespace {

struct Step {
    bool in_xi;
    int axis;
};

cplx nested_difference(const Symbol& a, const EvalContext& ctx, Vec x, Vec xi, const std::vector<Step>& steps,
                       std::size_t depth, double hxi) {
    if (depth == steps.size()) return a(ctx, x, xi);
    const Step s = steps[depth];
    const double h = s.in_xi ? hxi : 1e-3;
    Vec& v = s.in_xi ? xi : x;
    const double base = v[s.axis];
    v[s.axis] = base + h;
    const cplx plus = nested_difference(a, ctx, x, xi, steps, depth + 1, hxi);
    v[s.axis] = base - h;
    const cplx minus = nested_difference(a, ctx, x, xi, steps, depth + 1, hxi);
    return (plus - minus) / (2.0 * h);
}

std::string describe_point(const EvalContext& ctx, const Vec& x, const Vec& xi) {
    std::ostringstream os;
    os << "t=" << ctx.t << " x=(" << x[0] << "," << x[1] << ") xi=(" << xi[0] << "," << xi[1] << ")";
    return os.str();
}

}  // namespace

cplx symbol_derivative(const Symbol& a, const EvalContext& ctx, const Vec& x, const Vec& xi,
                       std::array<int, 2> alpha, std::array<int, 2> beta) {
    std::vector<Step> steps;
    for (int ax = 0; ax < 2; ++ax) {
        if (alpha[ax] < 0 || beta[ax] < 0 || alpha[ax] > 2 || beta[ax] > 2)
            throw InvalidArgument("derivative orders must lie in [0, 2]");
        for (int i = 0; i < alpha[ax]; ++i) steps.push_back({true, ax});
        for (int i = 0; i < beta[ax]; ++i) steps.push_back({false, ax});
    }
    const double hxi = 1e-3 * (1.0 + std::sqrt(norm2(xi)));
    return nested_difference(a, ctx, x, xi, steps, 0, hxi);
}

std::vector<Vec> unit_sphere(int dim, std::size_t angles) {
    if (dim == 1) return {Vec{1.0, 0.0}, Vec{-1.0, 0.0}};
    std::vector<Vec> out;
    out.reserve(angles);
    for (std::size_t i = 0; i < angles; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(angles);
        out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
}

SampleSet make_sample_set(const TorusGrid& grid, const TimeGrid& time_grid, const SampleSetOptions& opts) {
    SampleSet s;
    s.dim = grid.dim();
    for (std::size_t p = 0; p < std::max<std::size_t>(opts.paths, 1); ++p) {
        auto path = std::make_shared<const BrownianPath>(
            sample_brownian(derive_stream(opts.seed, stream_domain::samples, 0), p, time_grid));
        const std::size_t nt = std::max<std::size_t>(opts.times, 1);
        for (std::size_t i = 0; i < nt; ++i) {
            const std::size_t k = time_grid.steps() * (i + 1) / nt;
            const double t = time_grid.node(k);
            s.contexts.push_back(EvalContext{t, PathSlice(path, t)});
        }
    }
    const std::size_t stride = std::max<std::size_t>(opts.x_stride, 1);
    for (std::size_t j = 0; j < grid.size(); j += stride) s.points.push_back(grid.node(j));
    return s;
}

namespace {

std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> enumerate_indices(int dim, int max_total) {
    std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> out;
    const int hi1 = dim == 2 ? 2 : 0;
    for (int total = 0; total <= max_total; ++total)
        for (int a0 = 0; a0 <= 2; ++a0)
            for (int a1 = 0; a1 <= hi1; ++a1)
                for (int b0 = 0; b0 <= 2; ++b0)
                    for (int b1 = 0; b1 <= hi1; ++b1)
                        if (a0 + a1 + b0 + b1 == total) out.push_back({{a0, a1}, {b0, b1}});
    return out;
}

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

OrderReport verify_symbol_order(const Symbol& a, const SampleSet& samples, const OrderCheckOptions& opts) {
    if (opts.max_frequency < 8.0) throw InvalidArgument("symbol order check needs N ≥ 8");
    if (opts.radii < 4) throw InvalidArgument("symbol order check needs at least 4 radii");
    if (samples.contexts.empty() || samples.points.empty()) throw InvalidArgument("empty sample set");

    const auto directions = unit_sphere(samples.dim, samples.dim == 1 ? 2 : 16);
    std::vector<double> radii(opts.radii);
    const double log_n = std::log(opts.max_frequency);
    for (std::size_t i = 0; i < radii.size(); ++i)
        radii[i] = std::exp(log_n * static_cast<double>(i) / static_cast<double>(radii.size() - 1));

    auto guarded = [&](auto&& fn, const EvalContext& ctx, const Vec& x, const Vec& xi) -> cplx {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw EvaluationError("symbol '" + a.name() + "' failed at " + describe_point(ctx, x, xi) + ": " +
                                  e.what());
        }
    };

    double scale = 1.0;
    for (const auto& ctx : samples.contexts)
        for (const auto& x : samples.points)
            for (const auto& d : directions)
                scale = std::max(scale, std::abs(guarded([&] { return a(ctx, x, d); }, ctx, x, d)));
    const double floor = opts.floor * scale;

    OrderReport report;
    report.declared_order = a.order();
    report.integrability = a.integrability();
    report.pass = true;

    for (const auto& [alpha, beta] : enumerate_indices(samples.dim, opts.max_total_derivatives)) {
        OrderEntry e;
        e.alpha = alpha;
        e.beta = beta;
        const int abs_alpha = alpha[0] + alpha[1];
        e.bound = a.order() - abs_alpha;

        std::vector<double> peak(radii.size(), 0.0);
        for (std::size_t i = 0; i < radii.size(); ++i)
            for (const auto& ctx : samples.contexts)
                for (const auto& x : samples.points)
                    for (const auto& d : directions) {
                        const Vec xi{radii[i] * d[0], radii[i] * d[1]};
                        const cplx v = guarded([&] { return symbol_derivative(a, ctx, x, xi, alpha, beta); },
                                               ctx, x, xi);
                        peak[i] = std::max(peak[i], std::abs(v));
                    }

        for (std::size_t i = 0; i < radii.size(); ++i)
            e.bound_estimate = std::max(e.bound_estimate, peak[i] / std::pow(1.0 + radii[i], e.bound));

        std::vector<double> lx, ly;
        const double fit_from = std::sqrt(opts.max_frequency);
        for (std::size_t i = 0; i < radii.size(); ++i)
            if (radii[i] >= fit_from * (1.0 - 1e-12) && peak[i] > floor) {
                lx.push_back(std::log(radii[i]));
                ly.push_back(std::log(peak[i]));
            }
        if (lx.size() < 2) {
            e.below_floor = true;
            e.fitted_exponent = -kInfinity;
            e.pass = true;
        } else {
            e.fitted_exponent = least_squares_slope(lx, ly);
            e.pass = e.fitted_exponent <= e.bound + opts.tolerance;
        }
        if (!e.pass && report.pass) {
            report.pass = false;
            report.offending = report.entries.size();
        }
        report.entries.push_back(e);
    }

    // Bound function M_{0,0}(t, ω) at each sampled cutoff time.
    std::vector<std::pair<const BrownianPath*, std::vector<double>>> per_path;
    for (const auto& ctx : samples.contexts) {
        double m = 0.0;
        for (const auto& x : samples.points)
            for (const auto& d : directions)
                for (double r : radii) {
                    const Vec xi{r * d[0], r * d[1]};
                    m = std::max(m, std::abs(a(ctx, x, xi)) / std::pow(1.0 + r, a.order()));
                }
        const BrownianPath* key = ctx.path.shared().get();
        auto it = std::find_if(per_path.begin(), per_path.end(), [&](const auto& p) { return p.first == key; });
        if (it == per_path.end()) {
            per_path.push_back({key, {m}});
        } else {
            it->second.push_back(m);
        }
    }
    double worst = 0.0;
    for (const auto& [path, ms] : per_path) {
        double value = 0.0;
        if (std::isinf(a.integrability())) {
            for (double m : ms) value = std::max(value, m);
        } else {
            const double dt = path->time_grid.horizon() / static_cast<double>(ms.size());
            for (double m : ms) value += std::pow(m, a.integrability()) * dt;
        }
        worst = std::max(worst, value);
    }
    report.time_integrability_estimate = worst;
    report.time_integrability_finite = std::isfinite(worst);
    if (!report.time_integrability_finite) report.pass = false;
    return report;
}

std::vector<Vec> lattice_frequencies(const TorusGrid& grid, double radius) {
    std::vector<Vec> out;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Vec xi = grid.frequency(j);
        if (std::sqrt(norm2(xi)) >= radius - 1e-12) out.push_back(xi);
    }
    return out;
}

EllipticityReport check_elliptic(const Symbol& a, double radius, const SampleSet& samples,
                                 const std::vector<Vec>& frequencies) {
    EllipticityReport r;
    r.radius = radius;
    r.constant = kInfinity;
    for (const auto& ctx : samples.contexts)
        for (const auto& x : samples.points)
            for (const auto& xi : frequencies) {
                const double mag = std::sqrt(norm2(xi));
                if (mag < radius - 1e-12) continue;
                const double c = std::abs(a(ctx, x, xi)) / std::pow(1.0 + mag, a.order());
                if (c < r.constant) {
                    r.constant = c;
                    r.worst_x = x;
                    r.worst_xi = xi;
                    r.worst_t = ctx.t;
                }
            }
    if (std::isinf(r.constant)) throw InvalidArgument("ellipticity check had no samples with |ξ| ≥ R");
    r.is_elliptic = r.constant > kEllipticFloor;
    return r;
}

}  // namespace spdo
