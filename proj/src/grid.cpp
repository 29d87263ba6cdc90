#include "spdo/grid.hpp"

#include "spdo/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <string>

namespace spdo {

namespace {

bool is_power_of_two(std::size_t m) { return m >= 2 && (m & (m - 1)) == 0; }

// One kissfft instance per thread; plans are cached per length inside it.
Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine = [] {
        Eigen::FFT<double> e;
        e.SetFlag(Eigen::FFT<double>::Unscaled);
        return e;
    }();
    return engine;
}

// Unscaled transform along every axis; sign < 0 is e^{-i...}.
std::vector<cplx> transform(const TorusGrid& grid, std::span<const cplx> in, int sign) {
    const std::size_t m = grid.points_per_axis();
    auto& fft = fft_engine();
    std::vector<cplx> line_in(m), line_out(m);
    std::vector<cplx> out(in.begin(), in.end());

    auto run_line = [&](auto index_of) {
        for (std::size_t k = 0; k < m; ++k) line_in[k] = out[index_of(k)];
        if (sign < 0) {
            fft.fwd(line_out, line_in);
        } else {
            fft.inv(line_out, line_in);
        }
        for (std::size_t k = 0; k < m; ++k) out[index_of(k)] = line_out[k];
    };

    if (grid.dim() == 1) {
        run_line([](std::size_t k) { return k; });
    } else {
        for (std::size_t r = 0; r < m; ++r) run_line([&](std::size_t k) { return r * m + k; });
        for (std::size_t c = 0; c < m; ++c) run_line([&](std::size_t k) { return k * m + c; });
    }
    return out;
}

}  // namespace

TorusGrid::TorusGrid(int dim, std::size_t points_per_axis) : dim_(dim), m_(points_per_axis) {
    if (dim != 1 && dim != 2) throw InvalidArgument("torus dimension must be 1 or 2");
    if (!is_power_of_two(m_))
        throw InvalidArgument("points per axis must be a power of two, got " + std::to_string(m_));
    size_ = dim == 1 ? m_ : m_ * m_;
}

Vec TorusGrid::node(std::size_t flat) const {
    const double h = 2.0 * std::numbers::pi / static_cast<double>(m_);
    if (dim_ == 1) return {h * static_cast<double>(flat), 0.0};
    return {h * static_cast<double>(flat / m_), h * static_cast<double>(flat % m_)};
}

int TorusGrid::axis_frequency(std::size_t k) const noexcept {
    const auto n = static_cast<long>(m_ / 2);
    const auto kk = static_cast<long>(k);
    return static_cast<int>(kk < n ? kk : kk - static_cast<long>(m_));
}

Vec TorusGrid::frequency(std::size_t flat) const {
    if (dim_ == 1) return {static_cast<double>(axis_frequency(flat)), 0.0};
    return {static_cast<double>(axis_frequency(flat / m_)),
            static_cast<double>(axis_frequency(flat % m_))};
}

std::size_t TorusGrid::frequency_index(std::array<int, 2> xi) const {
    const int n = static_cast<int>(m_ / 2);
    auto axis = [&](int v) -> std::size_t {
        if (v < -n || v >= n) throw InvalidArgument("frequency outside retained band");
        return static_cast<std::size_t>(v >= 0 ? v : v + static_cast<int>(m_));
    };
    if (dim_ == 1) return axis(xi[0]);
    return axis(xi[0]) * m_ + axis(xi[1]);
}

std::vector<cplx> fft_forward(const TorusGrid& grid, std::span<const cplx> values) {
    if (values.size() != grid.size()) throw GridMismatch("value count does not match grid");
    auto out = transform(grid, values, -1);
    const double scale = grid.cell_weight();
    for (auto& c : out) c *= scale;
    return out;
}

std::vector<cplx> fft_inverse(const TorusGrid& grid, std::span<const cplx> coefficients) {
    if (coefficients.size() != grid.size()) throw GridMismatch("coefficient count does not match grid");
    return transform(grid, coefficients, +1);
}

SpectralField SpectralField::from_values(const TorusGrid& grid, std::vector<cplx> values) {
    auto coeffs = fft_forward(grid, values);
    return SpectralField(grid, std::move(values), std::move(coeffs));
}

SpectralField SpectralField::from_coefficients(const TorusGrid& grid, std::vector<cplx> coefficients) {
    auto values = fft_inverse(grid, coefficients);
    return SpectralField(grid, std::move(values), std::move(coefficients));
}

SpectralField SpectralField::zero(const TorusGrid& grid) {
    return SpectralField(grid, std::vector<cplx>(grid.size()), std::vector<cplx>(grid.size()));
}

SpectralField SpectralField::mode(const TorusGrid& grid, std::array<int, 2> k, cplx amplitude) {
    std::vector<cplx> coeffs(grid.size());
    coeffs[grid.frequency_index(k)] = amplitude;
    std::vector<cplx> values(grid.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        const Vec x = grid.node(j);
        values[j] = amplitude * std::polar(1.0, k[0] * x[0] + k[1] * x[1]);
    }
    return SpectralField(grid, std::move(values), std::move(coeffs));
}

SpectralField SpectralField::operator+(const SpectralField& o) const {
    require_same_grid(grid_, o.grid_, "field addition");
    auto v = values_;
    auto c = coefficients_;
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] += o.values_[j];
        c[j] += o.coefficients_[j];
    }
    return SpectralField(grid_, std::move(v), std::move(c));
}

SpectralField SpectralField::operator-(const SpectralField& o) const {
    require_same_grid(grid_, o.grid_, "field subtraction");
    auto v = values_;
    auto c = coefficients_;
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] -= o.values_[j];
        c[j] -= o.coefficients_[j];
    }
    return SpectralField(grid_, std::move(v), std::move(c));
}

SpectralField SpectralField::operator*(cplx s) const {
    auto v = values_;
    auto c = coefficients_;
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] *= s;
        c[j] *= s;
    }
    return SpectralField(grid_, std::move(v), std::move(c));
}

SpectralField forward_transform(const SpectralField& f) { return f; }

cplx inner_product(const SpectralField& f, const SpectralField& g) {
    require_same_grid(f.grid(), g.grid(), "inner product");
    cplx acc = 0.0;
    const auto a = f.values();
    const auto b = g.values();
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::conj(b[j]);
    return acc * f.grid().cell_weight();
}

double l2_norm(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& v : f.values()) acc += std::norm(v);
    return std::sqrt(acc * f.grid().cell_weight());
}

double sobolev_norm(const SpectralField& f, double s) {
    const auto& grid = f.grid();
    const auto c = f.coefficients();
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double weight = s == 0.0 ? 1.0 : std::pow(1.0 + norm2(grid.frequency(j)), s);
        acc += weight * std::norm(c[j]);
    }
    return std::sqrt(acc);
}

SpectralField differentiate(const SpectralField& f, int axis, int order) {
    const auto& grid = f.grid();
    if (axis < 0 || axis >= grid.dim()) throw InvalidArgument("differentiation axis out of range");
    if (order < 0) throw InvalidArgument("differentiation order must be nonnegative");
    std::vector<cplx> c(f.coefficients().begin(), f.coefficients().end());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::pow(grid.frequency(j)[axis], order);
    return SpectralField::from_coefficients(grid, std::move(c));
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string("grid mismatch in ") + where);
}

}  // namespace spdo
