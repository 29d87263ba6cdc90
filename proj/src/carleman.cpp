#include "spdo/carleman.hpp"

#include "spdo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace spdo {

OperatorFamily OperatorFamily::from_symbol(const Symbol& a, const TorusGrid& grid) {
    OperatorFamily f(a.name(), a.order());
    f.make_ = [a, grid](const EvalContext& ctx) { return SpdoOperator::quantize(a, grid, ctx); };
    if (a.traits().time_independent && a.traits().path_independent) {
        const auto op = SpdoOperator::quantize(a, grid, deterministic_context()).with_dense_cache();
        f.fixed_ = std::make_shared<const SpdoOperator>(op);
        f.fixed_adjoint_ = std::make_shared<const SpdoOperator>(adjoint(op));
    }
    return f;
}

OperatorFamily OperatorFamily::zero(const TorusGrid& grid) {
    OperatorFamily f("zero", -kInfinity);
    const auto op = SpdoOperator::multiplier(grid, std::vector<cplx>(grid.size(), 0.0), -kInfinity);
    f.make_ = [op](const EvalContext&) { return op; };
    f.fixed_ = std::make_shared<const SpdoOperator>(op);
    f.fixed_adjoint_ = f.fixed_;
    return f;
}

SpdoOperator OperatorFamily::at(const EvalContext& ctx) const { return fixed_ ? *fixed_ : make_(ctx); }

SpdoOperator OperatorFamily::adjoint_at(const EvalContext& ctx) const {
    return fixed_adjoint_ ? *fixed_adjoint_ : adjoint(make_(ctx));
}

Semimartingale simulate_process(const ProcessSpec& spec, const TorusGrid& grid,
                                std::shared_ptr<const BrownianPath> path) {
    const auto y0 = SpectralField::mode(grid, spec.initial_mode, spec.amplitude);
    const auto noise = SpectralField::mode(grid, spec.noise_mode, spec.sigma);
    const double theta = spec.theta, rho = spec.rho;
    FieldRule drift = [theta](double, const PathSlice&, const SpectralField& y) { return y * (-theta); };
    FieldRule diffusion = [noise, rho](double, const PathSlice&, const SpectralField& y) { return noise + y * rho; };
    const double horizon = path->time_grid.horizon();
    return windowed_ito_process(drift, diffusion, sine_window(horizon), y0, std::move(path));
}

void validate(const CarlemanConfig& c) {
    if (!(c.mu > 0.0)) throw InvalidArgument("carleman: mu must be positive");
    if (!(c.horizon > 0.0)) throw InvalidArgument("carleman: T must be positive");
    if (c.steps < 16) throw InvalidArgument("carleman: K must be at least 16");
    if (c.paths < 1) throw InvalidArgument("carleman: P must be at least 1");
    if (!(c.a1.at(deterministic_context()).grid() == c.grid) || !(c.b1.at(deterministic_context()).grid() == c.grid))
        throw GridMismatch("carleman: operator family grid differs from the process grid");
}

namespace {

using Coeffs = std::vector<cplx>;

Coeffs coeffs_of(const SpectralField& f) { return Coeffs(f.coefficients().begin(), f.coefficients().end()); }

Coeffs apply(const SpdoOperator& op, const TorusGrid& grid, const Coeffs& c) {
    if (op.form() == SpdoOperator::Form::multiplier) {
        const auto& m = op.multiplier_values();
        Coeffs out(c.size());
        for (std::size_t f = 0; f < c.size(); ++f) out[f] = m[f] * c[f];
        return out;
    }
    return coeffs_of(op.apply(SpectralField::from_coefficients(grid, c)));
}

// ⟨f, g⟩ in the normalized measure, by Parseval.
cplx pair(const Coeffs& f, const Coeffs& g) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
    return acc;
}

double sq(const Coeffs& f) {
    double acc = 0.0;
    for (const auto& c : f) acc += std::norm(c);
    return acc;
}

}  // namespace

PathTerms evaluate_path(const Trajectory& z, const BrownianPath& path, const OperatorFamily& a1,
                        const OperatorFamily& b1, double mu) {
    const auto& tg = z.time_grid;
    if (z.snapshots.size() != tg.nodes()) throw InvalidArgument("carleman: trajectory does not match its time grid");
    const auto& grid = z.snapshots.front().grid();
    const double T = tg.horizon(), dt = tg.dt();
    const std::size_t K = tg.steps();
    auto shared = std::make_shared<const BrownianPath>(path);
    const cplx I(0.0, 1.0);

    PathTerms out;
    auto& t = out.terms;
    for (std::size_t k = 0; k <= K; ++k) {
        const double tk = tg.node(k);
        const double tau = tk - T;
        const double w = std::exp(mu * tau * tau);
        const EvalContext ctx{tk, PathSlice(shared, tk)};
        const auto zk = coeffs_of(z.snapshots[k]);
        const auto B = b1.at(ctx);
        const auto bz = apply(B, grid, zk);

        const double trap = (k == 0 || k == K) ? 0.5 * dt : dt;
        Coeffs defect(zk.size());
        for (std::size_t i = 0; i < zk.size(); ++i) defect[i] = mu * tau * zk[i] - bz[i];
        t[0] += trap * w * sq(zk);
        t[1] += trap * w * sq(defect) / mu;

        if (k == K) break;
        const double tm = 0.5 * (tk + tg.node(k + 1)) - T;
        const double wm = std::exp(mu * tm * tm);
        const auto zn = coeffs_of(z.snapshots[k + 1]);
        Coeffs dz(zk.size());
        for (std::size_t i = 0; i < zk.size(); ++i) dz[i] = zn[i] - zk[i];
        const auto az = apply(a1.at(ctx), grid, zk);
        const auto bsz = apply(b1.adjoint_at(ctx), grid, zk);
        const auto bdz = apply(B, grid, dz);

        Coeffs e(zk.size()), test(zk.size()), skew(zk.size());
        for (std::size_t i = 0; i < zk.size(); ++i) {
            e[i] = -I * dz[i] - az[i] * dt - I * bz[i] * dt;
            test[i] = I * mu * tm * zk[i] - I * bz[i];
            skew[i] = bz[i] - bsz[i];
        }
        t[2] += 4.0 / mu * wm * pair(e, test).real();
        t[3] += -2.0 / mu * wm * pair(e, skew).imag();
        t[4] += -2.0 * tm * wm * sq(dz);
        t[5] += -2.0 / mu * wm * pair(dz, bdz).real();
    }
    return out;
}

std::size_t worker_count(std::size_t requested) {
    std::size_t n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("SPDO_LAB_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) n = static_cast<std::size_t>(v);
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

namespace {

void mean_se(const std::vector<double>& v, double& mean, double& se) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    se = 0.0;
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

CarlemanReport verify_inequality(const CarlemanConfig& c) {
    validate(c);
    const TimeGrid tg(c.horizon, c.steps);
    CarlemanReport r;
    r.mu = c.mu;
    r.horizon = c.horizon;
    r.steps = c.steps;
    r.paths = c.paths;
    r.seed = c.seed;
    r.a1_name = c.a1.name();
    r.b1_name = c.b1.name();
    r.a1_order = c.a1.order();
    r.b1_order = c.b1.order();
    r.per_path.resize(c.paths);

    std::vector<std::string> failures(c.paths);
    auto run_path = [&](std::size_t p) {
        try {
            auto path = std::make_shared<const BrownianPath>(sample_brownian(c.seed, p, tg));
            const auto z = c.custom_process ? c.custom_process(path) : simulate_process(c.process, c.grid, path);
            r.per_path[p] = evaluate_path(z.z, *path, c.a1, c.b1, c.mu);
        } catch (const std::exception& e) {
            failures[p] = e.what();
        }
    };
    const std::size_t workers = std::min(worker_count(c.threads), c.paths);
    if (workers <= 1) {
        for (std::size_t p = 0; p < c.paths; ++p) run_path(p);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t p = w; p < c.paths; p += workers) run_path(p);
            });
        for (auto& th : pool) th.join();
    }
    for (std::size_t p = 0; p < c.paths; ++p)
        if (!failures[p].empty())
            throw EvaluationError("carleman path " + std::to_string(p) + ": " + failures[p]);

    std::vector<double> col(c.paths);
    for (std::size_t j = 0; j < kCarlemanTerms; ++j) {
        for (std::size_t p = 0; p < c.paths; ++p) col[p] = r.per_path[p].terms[j];
        mean_se(col, r.term_mean[j], r.term_se[j]);
    }
    double unused = 0.0;
    for (std::size_t p = 0; p < c.paths; ++p) col[p] = r.per_path[p].lhs();
    mean_se(col, unused, r.lhs_se);
    for (std::size_t p = 0; p < c.paths; ++p) col[p] = r.per_path[p].rhs();
    mean_se(col, unused, r.rhs_se);
    for (std::size_t p = 0; p < c.paths; ++p) col[p] = r.per_path[p].rhs() - r.per_path[p].lhs();
    mean_se(col, unused, r.se);
    r.lhs_mean = r.term_mean[0] + r.term_mean[1];
    r.rhs_mean = r.term_mean[2] + r.term_mean[3] + r.term_mean[4] + r.term_mean[5];
    r.gap = r.rhs_mean - r.lhs_mean;
    r.verdict = r.lhs_mean <= r.rhs_mean + 3.0 * r.se;
    r.borderline = std::abs(r.gap) <= 3.0 * r.se;
    return r;
}

ScanResult scan(const std::vector<double>& mu_values, const std::vector<double>& horizons, const CarlemanConfig& base,
                bool scale_by_horizon) {
    if (mu_values.empty() || horizons.empty()) throw InvalidArgument("carleman scan needs nonempty μ and T lists");
    ScanResult s;
    for (double T : horizons) {
        for (double v : mu_values) {
            CarlemanConfig c = base;
            c.horizon = T;
            c.mu = scale_by_horizon ? v / (T * T) : v;
            auto rep = verify_inequality(c);
            rep.per_path.clear();
            if (rep.verdict) {
                ++s.passes;
                if (!s.largest_pass_horizon || T > *s.largest_pass_horizon) s.largest_pass_horizon = T;
                if (!s.smallest_pass_mu || c.mu < *s.smallest_pass_mu) s.smallest_pass_mu = c.mu;
            }
            s.reports.push_back(std::move(rep));
        }
    }
    return s;
}

}  // namespace spdo
