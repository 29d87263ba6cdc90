#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spdo {

using cplx = std::complex<double>;

/// Point in physical or frequency space; unused trailing coordinates are 0.
using Vec = std::array<double, 2>;

inline double norm2(const Vec& v) { return v[0] * v[0] + v[1] * v[1]; }

/// Periodic grid on [0, 2π)^n, n ∈ {1, 2}, with M points per axis.
///
/// Physical nodes are x_j = 2πj/M. Frequencies per axis run over integers in
/// [−N, N−1] with N = M/2 and are stored in FFT order (index k ↔ ξ = k for
/// k < N, ξ = k − M otherwise). Multi-dimensional arrays are row-major with
/// axis 0 outermost.
class TorusGrid {
public:
    static constexpr std::size_t kDefaultPoints = 128;

    TorusGrid(int dim, std::size_t points_per_axis = kDefaultPoints);

    int dim() const noexcept { return dim_; }
    std::size_t points_per_axis() const noexcept { return m_; }
    std::size_t frequency_cutoff() const noexcept { return m_ / 2; }
    std::size_t size() const noexcept { return size_; }

    /// Weight of one node in the normalized measure dx/(2π)^n, i.e. M^{-n}.
    double cell_weight() const noexcept { return 1.0 / static_cast<double>(size_); }

    Vec node(std::size_t flat) const;
    Vec frequency(std::size_t flat) const;
    /// Signed integer frequency for a per-axis FFT index.
    int axis_frequency(std::size_t k) const noexcept;
    /// Flat FFT-order index of an integer frequency vector (each entry in [−N, N−1]).
    std::size_t frequency_index(std::array<int, 2> xi) const;

    bool operator==(const TorusGrid& o) const noexcept { return dim_ == o.dim_ && m_ == o.m_; }

private:
    int dim_;
    std::size_t m_;
    std::size_t size_;
};

/// Complex field on a TorusGrid holding both physical values and Fourier
/// coefficients û(ξ) = (2π)^{-n} ∫ e^{-ix·ξ} u(x) dx (discretely M^{-n} Σ_j).
/// Immutable; both forms are populated at construction.
class SpectralField {
public:
    static SpectralField from_values(const TorusGrid& grid, std::vector<cplx> values);
    static SpectralField from_coefficients(const TorusGrid& grid, std::vector<cplx> coefficients);
    static SpectralField zero(const TorusGrid& grid);
    /// e^{i k·x} for an integer mode k.
    static SpectralField mode(const TorusGrid& grid, std::array<int, 2> k, cplx amplitude = 1.0);

    template <typename F>
    static SpectralField sample(const TorusGrid& grid, F&& f) {
        std::vector<cplx> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
        return from_values(grid, std::move(v));
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> values() const noexcept { return values_; }
    std::span<const cplx> coefficients() const noexcept { return coefficients_; }

    SpectralField operator+(const SpectralField& o) const;
    SpectralField operator-(const SpectralField& o) const;
    SpectralField operator*(cplx s) const;
    friend SpectralField operator*(cplx s, const SpectralField& f) { return f * s; }

private:
    SpectralField(TorusGrid grid, std::vector<cplx> values, std::vector<cplx> coefficients)
        : grid_(grid), values_(std::move(values)), coefficients_(std::move(coefficients)) {}

    TorusGrid grid_;
    std::vector<cplx> values_;
    std::vector<cplx> coefficients_;
};

/// Fourier coefficients of physical samples (FFT, scaled by M^{-n}).
std::vector<cplx> fft_forward(const TorusGrid& grid, std::span<const cplx> values);
/// Physical samples from Fourier coefficients: u_j = Σ_ξ e^{i x_j·ξ} û(ξ).
std::vector<cplx> fft_inverse(const TorusGrid& grid, std::span<const cplx> coefficients);

/// Returns f with its frequency form populated. Fields always carry both
/// forms, so this is the identity on valid fields.
SpectralField forward_transform(const SpectralField& f);

/// ⟨f, g⟩ = (2π)^{-n} ∫ f ḡ dx by grid quadrature.
cplx inner_product(const SpectralField& f, const SpectralField& g);
/// Physical-quadrature L² norm in the normalized measure.
double l2_norm(const SpectralField& f);
/// ‖u‖_{H^s} = (Σ_ξ (1+|ξ|²)^s |û(ξ)|²)^{1/2}.
double sobolev_norm(const SpectralField& f, double s);
/// D_axis^order with D = (1/i)∂, i.e. multiplication of û(ξ) by ξ_axis^order.
SpectralField differentiate(const SpectralField& f, int axis, int order);

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

}  // namespace spdo
