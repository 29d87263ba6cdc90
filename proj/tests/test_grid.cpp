#include <doctest.h>

#include "spdo/errors.hpp"
#include "spdo/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace spdo;

namespace {

std::vector<cplx> random_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& c : v) c = {g(rng), g(rng)};
    return v;
}

// Defining sum û(ξ) = M^{-n} Σ_j e^{-i x_j·ξ} u_j, evaluated directly.
std::vector<cplx> direct_forward(const TorusGrid& grid, const std::vector<cplx>& u) {
    std::vector<cplx> out(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const Vec xi = grid.frequency(f);
        cplx acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Vec x = grid.node(j);
            acc += std::polar(1.0, -(x[0] * xi[0] + x[1] * xi[1])) * u[j];
        }
        out[f] = acc / static_cast<double>(grid.size());
    }
    return out;
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid validates its parameters") {
    CHECK_THROWS_AS(TorusGrid(3, 16), InvalidArgument);
    CHECK_THROWS_AS(TorusGrid(1, 12), InvalidArgument);
    const TorusGrid g(1, 16);
    CHECK(g.frequency_cutoff() == 8);
    CHECK(g.node(4)[0] == doctest::Approx(std::numbers::pi / 2));
    CHECK(g.axis_frequency(7) == 7);
    CHECK(g.axis_frequency(8) == -8);
    CHECK(g.frequency_index({-3, 0}) == 13);
}

TEST_CASE("pure mode and constant transform to single coefficients") {
    const TorusGrid g(1, 128);
    const auto u = SpectralField::sample(g, [](const Vec& x) { return std::polar(1.0, 2.0 * x[0]); });
    const auto c = forward_transform(u).coefficients();
    for (std::size_t f = 0; f < g.size(); ++f) {
        const double expect = g.frequency(f)[0] == 2.0 ? 1.0 : 0.0;
        CHECK(std::abs(c[f] - expect) <= 1e-13);
    }
    const auto one = SpectralField::sample(g, [](const Vec&) { return cplx(1.0); });
    CHECK(std::abs(one.coefficients()[0] - 1.0) <= 1e-13);
    for (std::size_t f = 1; f < g.size(); ++f) CHECK(std::abs(one.coefficients()[f]) <= 1e-13);
}

TEST_CASE("FFT matches the direct defining sum") {
    for (auto [dim, m] : {std::pair{1, 32}, std::pair{2, 8}, std::pair{2, 16}}) {
        const TorusGrid g(dim, static_cast<std::size_t>(m));
        const auto u = random_values(g.size(), 11);
        const auto fast = fft_forward(g, u);
        const auto slow = direct_forward(g, u);
        CHECK(max_abs_diff(fast, slow) <= 1e-13);
        const auto back = fft_inverse(g, fast);
        CHECK(max_abs_diff(back, u) <= 1e-12);
    }
}

TEST_CASE("smooth field round trip and Parseval") {
    const TorusGrid g(1, 128);
    const auto u = SpectralField::sample(g, [](const Vec& x) {
        return cplx(std::exp(std::sin(x[0])), std::cos(3.0 * x[0]));
    });
    const auto back = SpectralField::from_coefficients(g, {u.coefficients().begin(), u.coefficients().end()});
    double scale = 0.0;
    for (auto v : u.values()) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(back.values(), u.values()) / scale <= 1e-12);
    CHECK(std::abs(l2_norm(u) - sobolev_norm(u, 0.0)) / l2_norm(u) <= 1e-12);

    const TorusGrid g2(2, 16);
    const auto r = SpectralField::from_values(g2, random_values(g2.size(), 5));
    CHECK(std::abs(l2_norm(r) - sobolev_norm(r, 0.0)) / l2_norm(r) <= 1e-12);
}

TEST_CASE("sobolev norms of modes") {
    const TorusGrid g(1, 128);
    const auto e2 = SpectralField::mode(g, {2, 0});
    CHECK(sobolev_norm(e2, 1.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    CHECK(sobolev_norm(e2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    const auto two = SpectralField::mode(g, {1, 0}) + SpectralField::mode(g, {3, 0});
    CHECK(sobolev_norm(two, 2.0) == doctest::Approx(std::sqrt(104.0)).epsilon(1e-14));
    const auto r = SpectralField::from_values(g, random_values(g.size(), 3));
    CHECK(sobolev_norm(r, 0.5) <= sobolev_norm(r, 1.0));
}

TEST_CASE("differentiation is multiplication by ξ") {
    const TorusGrid g(1, 64);
    const auto e3 = SpectralField::mode(g, {3, 0});
    CHECK(max_abs_diff(differentiate(e3, 0, 1).values(), (e3 * 3.0).values()) <= 1e-12);
    const auto c = SpectralField::sample(g, [](const Vec&) { return cplx(2.5); });
    CHECK(l2_norm(differentiate(c, 0, 1)) <= 1e-13);
    const auto u = SpectralField::mode(g, {1, 0}) + SpectralField::mode(g, {2, 0});
    const auto expect = SpectralField::mode(g, {1, 0}) + SpectralField::mode(g, {2, 0}, 4.0);
    CHECK(max_abs_diff(differentiate(u, 0, 2).values(), expect.values()) <= 1e-12);

    const TorusGrid g2(2, 16);
    const auto r = SpectralField::from_values(g2, random_values(g2.size(), 9));
    const auto twice = differentiate(differentiate(r, 1, 1), 1, 2);
    const auto once = differentiate(r, 1, 3);
    double scale = 0.0;
    for (auto c : once.coefficients()) scale = std::max(scale, std::abs(c));
    // Same frequency-form product up to the rounding order of c·ξ·ξ² vs c·ξ³.
    CHECK(max_abs_diff(twice.coefficients(), once.coefficients()) <= 4.0 * 2.3e-16 * scale);
}

TEST_CASE("fields on different grids do not mix") {
    const auto a = SpectralField::zero(TorusGrid(1, 16));
    const auto b = SpectralField::zero(TorusGrid(1, 32));
    CHECK_THROWS_AS(a + b, GridMismatch);
    CHECK_THROWS_AS(inner_product(a, b), GridMismatch);
}
