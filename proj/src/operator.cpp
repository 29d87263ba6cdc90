#include "spdo/operator.hpp"

#include "spdo/errors.hpp"
#include "spdo/paths.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace spdo {

namespace {

using Eigen::Index;

void check_cap(const TorusGrid& grid, std::size_t cap, const char* what) {
    if (grid.size() > cap)
        throw CapExceeded(std::string(what) + ": M^n = " + std::to_string(grid.size()) + " exceeds cap " +
                          std::to_string(cap));
}

cplx plane_wave(const Vec& x, const Vec& xi) { return std::polar(1.0, x[0] * xi[0] + x[1] * xi[1]); }

// Dense matrix from per-row frequency kernels: Mat(j, l) = M^{-n} Σ_f k(j, f) e^{-i x_l·ξ_f}.
Eigen::MatrixXcd rows_to_dense(const TorusGrid& grid, const Eigen::MatrixXcd& kernel) {
    const auto n = static_cast<Index>(grid.size());
    Eigen::MatrixXcd out(n, n);
    std::vector<cplx> row(grid.size());
    for (Index j = 0; j < n; ++j) {
        for (Index f = 0; f < n; ++f) row[static_cast<std::size_t>(f)] = kernel(j, f);
        const auto r = fft_forward(grid, row);
        for (Index l = 0; l < n; ++l) out(j, l) = r[static_cast<std::size_t>(l)];
    }
    return out;
}

}  // namespace

SpdoOperator SpdoOperator::quantize(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx, std::size_t cap) {
    if (a.traits().x_independent) {
        std::vector<cplx> values(grid.size());
        const Vec origin{0.0, 0.0};
        for (std::size_t f = 0; f < values.size(); ++f) values[f] = a(ctx, origin, grid.frequency(f));
        return multiplier(grid, std::move(values), a.order());
    }
    check_cap(grid, cap, "quantization table");
    const auto n = static_cast<Index>(grid.size());
    Eigen::MatrixXcd table(n, n);
    for (Index j = 0; j < n; ++j) {
        const Vec x = grid.node(static_cast<std::size_t>(j));
        for (Index f = 0; f < n; ++f) table(j, f) = a(ctx, x, grid.frequency(static_cast<std::size_t>(f)));
    }
    return from_table(grid, table, a.order(), cap);
}

SpdoOperator SpdoOperator::multiplier(const TorusGrid& grid, std::vector<cplx> values, double order) {
    if (values.size() != grid.size()) throw GridMismatch("multiplier length does not match grid");
    SpdoOperator op(grid, Form::multiplier, order);
    op.multiplier_ = std::move(values);
    return op;
}

SpdoOperator SpdoOperator::from_table(const TorusGrid& grid, const Eigen::MatrixXcd& table, double order,
                                      std::size_t cap) {
    check_cap(grid, cap, "quantization table");
    const auto n = static_cast<Index>(grid.size());
    if (table.rows() != n || table.cols() != n) throw GridMismatch("symbol table shape does not match grid");
    auto kernel = std::make_shared<Eigen::MatrixXcd>(n, n);
    for (Index j = 0; j < n; ++j) {
        const Vec x = grid.node(static_cast<std::size_t>(j));
        for (Index f = 0; f < n; ++f)
            (*kernel)(j, f) = table(j, f) * plane_wave(x, grid.frequency(static_cast<std::size_t>(f)));
    }
    SpdoOperator op(grid, Form::quantized, order);
    op.matrix_ = std::move(kernel);
    return op;
}

SpdoOperator SpdoOperator::from_dense(const TorusGrid& grid, Eigen::MatrixXcd matrix, double order) {
    const auto n = static_cast<Index>(grid.size());
    if (matrix.rows() != n || matrix.cols() != n) throw GridMismatch("dense matrix shape does not match grid");
    SpdoOperator op(grid, Form::dense, order);
    op.matrix_ = std::make_shared<const Eigen::MatrixXcd>(std::move(matrix));
    return op;
}

SpdoOperator SpdoOperator::identity(const TorusGrid& grid) {
    return multiplier(grid, std::vector<cplx>(grid.size(), 1.0), 0.0);
}

SpectralField SpdoOperator::apply(const SpectralField& u) const {
    require_same_grid(grid_, u.grid(), "operator application");
    const auto n = static_cast<Index>(grid_.size());
    switch (form_) {
        case Form::multiplier: {
            std::vector<cplx> c(u.coefficients().begin(), u.coefficients().end());
            for (std::size_t f = 0; f < c.size(); ++f) c[f] *= multiplier_[f];
            return SpectralField::from_coefficients(grid_, std::move(c));
        }
        case Form::quantized:
        case Form::dense: {
            const bool physical = form_ == Form::dense || dense_cache_;
            const Eigen::MatrixXcd& mat = dense_cache_ ? *dense_cache_ : *matrix_;
            const auto in = physical ? u.values() : u.coefficients();
            Eigen::Map<const Eigen::VectorXcd> v(in.data(), n);
            Eigen::VectorXcd out = mat * v;
            return SpectralField::from_values(grid_, std::vector<cplx>(out.data(), out.data() + n));
        }
    }
    throw InvalidArgument("unknown operator form");
}

Eigen::MatrixXcd SpdoOperator::dense_matrix(std::size_t cap) const {
    check_cap(grid_, cap, "dense matrix");
    if (dense_cache_) return *dense_cache_;
    const auto n = static_cast<Index>(grid_.size());
    switch (form_) {
        case Form::multiplier: {
            Eigen::MatrixXcd kernel(n, n);
            for (Index j = 0; j < n; ++j) {
                const Vec x = grid_.node(static_cast<std::size_t>(j));
                for (Index f = 0; f < n; ++f)
                    kernel(j, f) = multiplier_[static_cast<std::size_t>(f)] *
                                   plane_wave(x, grid_.frequency(static_cast<std::size_t>(f)));
            }
            return rows_to_dense(grid_, kernel);
        }
        case Form::quantized: return rows_to_dense(grid_, *matrix_);
        case Form::dense: return *matrix_;
    }
    throw InvalidArgument("unknown operator form");
}

Eigen::MatrixXcd SpdoOperator::symbol_table() const {
    const auto n = static_cast<Index>(grid_.size());
    Eigen::MatrixXcd table(n, n);
    switch (form_) {
        case Form::multiplier:
            for (Index j = 0; j < n; ++j)
                for (Index f = 0; f < n; ++f) table(j, f) = multiplier_[static_cast<std::size_t>(f)];
            return table;
        case Form::quantized:
            for (Index j = 0; j < n; ++j) {
                const Vec x = grid_.node(static_cast<std::size_t>(j));
                for (Index f = 0; f < n; ++f)
                    table(j, f) = (*matrix_)(j, f) * std::conj(plane_wave(x, grid_.frequency(static_cast<std::size_t>(f))));
            }
            return table;
        case Form::dense: {
            // a(x_j, ξ) = e^{-i x_j·ξ} (A e^{i·ξ})(x_j)
            for (Index f = 0; f < n; ++f) {
                const Vec xi = grid_.frequency(static_cast<std::size_t>(f));
                Eigen::VectorXcd e(n);
                for (Index l = 0; l < n; ++l) e(l) = plane_wave(grid_.node(static_cast<std::size_t>(l)), xi);
                const Eigen::VectorXcd col = (*matrix_) * e;
                for (Index j = 0; j < n; ++j)
                    table(j, f) = col(j) * std::conj(plane_wave(grid_.node(static_cast<std::size_t>(j)), xi));
            }
            return table;
        }
    }
    throw InvalidArgument("unknown operator form");
}

const std::vector<cplx>& SpdoOperator::multiplier_values() const {
    if (form_ != Form::multiplier) throw InvalidArgument("operator is not a Fourier multiplier");
    return multiplier_;
}

SpdoOperator SpdoOperator::with_dense_cache(std::size_t cap) const {
    SpdoOperator copy = *this;
    if (form_ != Form::multiplier && !dense_cache_)
        copy.dense_cache_ = std::make_shared<const Eigen::MatrixXcd>(dense_matrix(cap));
    return copy;
}

SpdoOperator lambda_operator(const TorusGrid& grid, double s) {
    std::vector<cplx> v(grid.size());
    for (std::size_t f = 0; f < v.size(); ++f) v[f] = std::pow(1.0 + norm2(grid.frequency(f)), 0.5 * s);
    return SpdoOperator::multiplier(grid, std::move(v), s);
}

SpdoOperator adjoint(const SpdoOperator& a, std::size_t cap) {
    if (a.form() == SpdoOperator::Form::multiplier) {
        auto v = a.multiplier_values();
        for (auto& c : v) c = std::conj(c);
        return SpdoOperator::multiplier(a.grid(), std::move(v), a.order());
    }
    return SpdoOperator::from_dense(a.grid(), a.dense_matrix(cap).adjoint(), a.order());
}

SpdoOperator compose(const SpdoOperator& a, const SpdoOperator& b, std::size_t cap) {
    require_same_grid(a.grid(), b.grid(), "composition");
    if (a.form() == SpdoOperator::Form::multiplier && b.form() == SpdoOperator::Form::multiplier) {
        auto v = a.multiplier_values();
        const auto& w = b.multiplier_values();
        for (std::size_t f = 0; f < v.size(); ++f) v[f] *= w[f];
        return SpdoOperator::multiplier(a.grid(), std::move(v), a.order() + b.order());
    }
    return SpdoOperator::from_dense(a.grid(), a.dense_matrix(cap) * b.dense_matrix(cap), a.order() + b.order());
}

namespace {

// Five-point central differences along one axis, in ξ or in x.
cplx xi_derivative(const Symbol& a, const EvalContext& ctx, const Vec& x, Vec xi, int axis) {
    const double h = 1e-2 * (1.0 + std::sqrt(norm2(xi)));
    const double base = xi[axis];
    auto at = [&](double off) {
        xi[axis] = base + off;
        return a(ctx, x, xi);
    };
    return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
}

cplx x_derivative(const Symbol& a, const EvalContext& ctx, Vec x, const Vec& xi, int axis) {
    const double h = 2e-3;
    const double base = x[axis];
    auto at = [&](double off) {
        x[axis] = base + off;
        return a(ctx, x, xi);
    };
    return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
}

}  // namespace

Symbol asymptotic_composition_symbol(const Symbol& a, const Symbol& b) {
    SymbolTraits t;
    t.x_independent = a.traits().x_independent && b.traits().x_independent;
    t.path_independent = a.traits().path_independent && b.traits().path_independent;
    t.time_independent = a.traits().time_independent && b.traits().time_independent;
    return Symbol("asym1(" + a.name() + "," + b.name() + ")", a.order() + b.order(),
                  [a, b](const EvalContext& ctx, const Vec& x, const Vec& xi) {
                      cplx acc = a(ctx, x, xi) * b(ctx, x, xi);
                      if (b.traits().x_independent) return acc;
                      for (int axis = 0; axis < 2; ++axis) {
                          const cplx da = xi_derivative(a, ctx, x, xi, axis);
                          if (da == cplx(0.0)) continue;
                          // D_x = (1/i) ∂_x
                          acc += da * x_derivative(b, ctx, x, xi, axis) / cplx(0.0, 1.0);
                      }
                      return acc;
                  },
                  t);
}

Composition compose(const Symbol& a, const Symbol& b, const TorusGrid& grid, const EvalContext& ctx,
                    CompositionMode mode, std::size_t cap) {
    if (mode == CompositionMode::exact) {
        return Composition{compose(SpdoOperator::quantize(a, grid, ctx, cap), SpdoOperator::quantize(b, grid, ctx, cap), cap),
                           std::nullopt};
    }
    check_cap(grid, cap, "asymptotic composition");
    const auto n = static_cast<Index>(grid.size());
    Eigen::MatrixXcd table(n, n);
    std::vector<cplx> column(grid.size());
    Eigen::MatrixXcd b_table(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index f = 0; f < n; ++f)
            b_table(j, f) = b(ctx, grid.node(static_cast<std::size_t>(j)), grid.frequency(static_cast<std::size_t>(f)));
    for (Index j = 0; j < n; ++j) {
        const Vec x = grid.node(static_cast<std::size_t>(j));
        for (Index f = 0; f < n; ++f)
            table(j, f) = a(ctx, x, grid.frequency(static_cast<std::size_t>(f))) * b_table(j, f);
    }
    for (int axis = 0; axis < grid.dim(); ++axis) {
        for (Index f = 0; f < n; ++f) {
            for (Index j = 0; j < n; ++j) column[static_cast<std::size_t>(j)] = b_table(j, f);
            const auto db = differentiate(SpectralField::from_values(grid, column), axis, 1);
            const Vec xi = grid.frequency(static_cast<std::size_t>(f));
            for (Index j = 0; j < n; ++j) {
                const Vec x = grid.node(static_cast<std::size_t>(j));
                table(j, f) += xi_derivative(a, ctx, x, xi, axis) * db.values()[static_cast<std::size_t>(j)];
            }
        }
    }
    auto sym = asymptotic_composition_symbol(a, b);
    return Composition{SpdoOperator::from_table(grid, table, a.order() + b.order(), cap), std::move(sym)};
}

BoundednessReport boundedness_harness(const Symbol& a, int dim, const EvalContext& ctx,
                                      const BoundednessOptions& opts) {
    if (opts.cutoffs.empty()) throw InvalidArgument("boundedness harness needs at least one cutoff");
    BoundednessReport rep;
    rep.s = opts.s;
    rep.order = a.order();
    const double target = opts.s - a.order();
    for (std::size_t cutoff : opts.cutoffs) {
        const TorusGrid grid(dim, 2 * cutoff);
        const auto op = SpdoOperator::quantize(a, grid, ctx);
        BoundednessRow row;
        row.cutoff = cutoff;
        auto ratio = [&](const SpectralField& u) { return sobolev_norm(op.apply(u), target) / sobolev_norm(u, opts.s); };

        std::mt19937_64 rng(derive_stream(opts.seed, stream_domain::test_fields, cutoff));
        std::normal_distribution<double> normal;
        for (std::size_t trial = 0; trial < opts.trials; ++trial) {
            std::vector<cplx> c(grid.size());
            for (std::size_t f = 0; f < c.size(); ++f) {
                const double w = std::pow(1.0 + norm2(grid.frequency(f)), -0.5 * opts.s);
                c[f] = cplx(normal(rng), normal(rng)) * w;
            }
            auto u = SpectralField::from_coefficients(grid, std::move(c));
            u = u * (1.0 / sobolev_norm(u, opts.s));
            row.max_ratio_random = std::max(row.max_ratio_random, ratio(u));
        }

        const int top = static_cast<int>(cutoff);
        std::vector<std::array<int, 2>> modes;
        if (dim == 1) {
            modes = {{top - 1, 0}, {-top, 0}};
        } else {
            modes = {{top - 1, 0}, {0, top - 1}, {-top, 0}, {0, -top}, {top - 1, top - 1}, {-top, -top}};
        }
        for (const auto& k : modes) {
            const auto e = SpectralField::mode(grid, k);
            row.max_ratio_modes = std::max(row.max_ratio_modes, ratio(e));
        }
        row.max_ratio = std::max(row.max_ratio_random, row.max_ratio_modes);
        rep.rows.push_back(row);
    }
    double lo = kInfinity, hi = 0.0;
    for (const auto& r : rep.rows) {
        lo = std::min(lo, r.max_ratio);
        hi = std::max(hi, r.max_ratio);
    }
    rep.variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
    return rep;
}

double parametrix_cutoff(double magnitude, double radius) {
    if (magnitude <= radius) return 0.0;
    if (magnitude >= 2.0 * radius) return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * (magnitude - radius) / radius));
}

Parametrix left_parametrix(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx, double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("parametrix cutoff radius must be positive");
    SampleSet samples;
    samples.dim = grid.dim();
    samples.contexts = {ctx};
    for (std::size_t j = 0; j < grid.size(); ++j) samples.points.push_back(grid.node(j));
    const auto ell = check_elliptic(a, radius, samples, lattice_frequencies(grid, radius));
    if (!ell.is_elliptic)
        throw NotElliptic("symbol '" + a.name() + "' is not elliptic on |ξ| ≥ " + std::to_string(radius) +
                          " (C estimate " + std::to_string(ell.constant) + ")");
    Symbol b0("parametrix(" + a.name() + ")", -a.order(),
              [a, radius](const EvalContext& c, const Vec& x, const Vec& xi) -> cplx {
                  const double chi = parametrix_cutoff(std::sqrt(norm2(xi)), radius);
                  if (chi == 0.0) return 0.0;
                  return chi / a(c, x, xi);
              },
              a.traits(), a.integrability());
    auto op = SpdoOperator::quantize(b0, grid, ctx);
    return Parametrix{std::move(op), std::move(b0), ell};
}

Parametrix right_parametrix(const Symbol& a, const TorusGrid& grid, const EvalContext& ctx, double radius) {
    auto conj_left = left_parametrix(conjugate(a), grid, ctx, radius);
    auto op = adjoint(conj_left.op);
    return Parametrix{std::move(op), conjugate(conj_left.symbol), conj_left.ellipticity};
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs ≥ 2 matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return -kInfinity;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

ResidualStudy study(const TorusGrid& grid, int k_min, int k_max, const auto& residual_of) {
    if (k_min < 1 || k_max <= k_min) throw InvalidArgument("residual study needs 1 ≤ k_min < k_max");
    if (k_max >= static_cast<int>(grid.frequency_cutoff())) throw InvalidArgument("k_max outside retained band");
    ResidualStudy s;
    std::vector<double> ks, rs;
    for (int k = k_min; k <= k_max; ++k) {
        const auto e = SpectralField::mode(grid, {k, 0});
        const double r = l2_norm(residual_of(e));
        s.rows.push_back({k, r});
        ks.push_back(k);
        rs.push_back(r);
    }
    s.fitted_slope = log_log_slope(ks, rs);
    return s;
}

}  // namespace

ResidualStudy parametrix_residual(const SpdoOperator& a, const SpdoOperator& b, bool left, int k_min, int k_max) {
    require_same_grid(a.grid(), b.grid(), "parametrix residual");
    return study(a.grid(), k_min, k_max, [&](const SpectralField& e) {
        return (left ? b.apply(a.apply(e)) : a.apply(b.apply(e))) - e;
    });
}

ResidualStudy difference_decay(const SpdoOperator& x, const SpdoOperator& y, int k_min, int k_max) {
    require_same_grid(x.grid(), y.grid(), "difference decay");
    return study(x.grid(), k_min, k_max, [&](const SpectralField& e) { return x.apply(e) - y.apply(e); });
}

}  // namespace spdo
