#include <doctest.h>

#include "spdo/errors.hpp"
#include "spdo/paths.hpp"

#include <cmath>
#include <numbers>

using namespace spdo;

TEST_CASE("time grid endpoints are exact") {
    const TimeGrid tg(0.3, 7);
    CHECK(tg.node(0) == 0.0);
    CHECK(tg.node(7) == 0.3);
    CHECK(tg.nodes() == 8);
    CHECK_THROWS_AS(TimeGrid(-1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), InvalidArgument);
}

TEST_CASE("brownian paths are keyed by seed and index") {
    const TimeGrid one(1.0, 1);
    const auto p = sample_brownian(3, 0, one);
    REQUIRE(p.values.size() == 2);
    CHECK(p.values[0] == 0.0);
    const TimeGrid tg(1.0, 64);
    const auto a = sample_brownian(42, 7, tg);
    const auto b = sample_brownian(42, 7, tg);
    const auto c = sample_brownian(42, 8, tg);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(derive_stream(1, 2, 3) != derive_stream(1, 3, 2));
}

TEST_CASE("terminal variance of brownian paths") {
    const double T = 0.7;
    const TimeGrid tg(T, 256);
    const std::size_t n = 10000;
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sample_brownian(2024, i, tg).values.back();
        s2 += w * w;
        s4 += w * w * w * w;
    }
    const double var = s2 / n;
    // Var(w²) = 2T² for centred Gaussians; SE of the mean of w².
    const double se = std::sqrt((s4 / n - var * var) / n);
    CHECK(std::abs(var - T) <= 3.0 * se);
}

TEST_CASE("path slices enforce adaptedness") {
    const TimeGrid tg(1.0, 8);
    auto path = std::make_shared<const BrownianPath>(sample_brownian(1, 0, tg));
    const PathSlice s(path, 0.5);
    CHECK(s.at(0.5) == path->values[4]);
    CHECK(s.at(0.3) == path->values[2]);
    CHECK(s.at_node(4) == path->values[4]);
    CHECK_THROWS_AS(s.at(0.6), AdaptednessViolation);
    CHECK_THROWS_AS(s.at_node(5), AdaptednessViolation);

    const TorusGrid g(1, 16);
    FieldRule peeking = [](double t, const PathSlice& sl, const SpectralField& y) {
        return y * sl.at(t + 0.25);
    };
    CHECK_THROWS_AS(ito_process(peeking, zero_rule(), SpectralField::mode(g, {1, 0}), path), AdaptednessViolation);
}

TEST_CASE("windowed process without dynamics is the window times the initial field") {
    const TorusGrid g(1, 32);
    const TimeGrid tg(0.5, 32);
    auto path = std::make_shared<const BrownianPath>(sample_brownian(0, 0, tg));
    const auto phi = SpectralField::mode(g, {2, 0});
    const auto z = windowed_ito_process(zero_rule(), zero_rule(), sine_window(tg.horizon()), phi, path);
    CHECK(l2_norm(z.z.snapshots.front()) == 0.0);
    CHECK(l2_norm(z.z.snapshots.back()) == 0.0);
    for (std::size_t k = 1; k < tg.steps(); ++k) {
        const double eta = std::sin(std::numbers::pi * tg.node(k) / tg.horizon());
        CHECK(l2_norm(z.z.snapshots[k] - phi * eta) <= 1e-14);
    }
    const auto none = windowed_ito_process(zero_rule(), constant_rule(phi), [](double) { return 0.0; }, phi, path);
    for (const auto& s : none.z.snapshots) CHECK(l2_norm(s) == 0.0);
    CHECK_THROWS_AS(windowed_ito_process(zero_rule(), zero_rule(), [](double) { return 1.0; }, phi, path),
                    InvalidArgument);
}

TEST_CASE("Itô isometry and quadratic variation of additive noise") {
    const TorusGrid g(1, 16);
    const double T = 1.0;
    const TimeGrid tg(T, 64);
    const auto phi = SpectralField::mode(g, {1, 0}, 0.8) + SpectralField::mode(g, {-2, 0}, 0.3);
    const double phi2 = 0.64 + 0.09;
    const std::size_t n = 1000;
    double m1 = 0, m2 = 0, q1 = 0, q2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto path = std::make_shared<const BrownianPath>(sample_brownian(77, i, tg));
        const auto y = ito_process(zero_rule(), constant_rule(phi), SpectralField::zero(g), path);
        const double e = std::pow(l2_norm(y.snapshots[32]), 2);
        m1 += e;
        m2 += e * e;
        double qv = 0.0;
        for (double v : realized_quadratic_variation(y)) qv += v;
        q1 += qv;
        q2 += qv * qv;
    }
    m1 /= n;
    q1 /= n;
    const double se_m = std::sqrt((m2 / n - m1 * m1) / n);
    const double se_q = std::sqrt((q2 / n - q1 * q1) / n);
    CHECK(std::abs(m1 - 0.5 * T * phi2) <= 3.0 * se_m);
    CHECK(std::abs(q1 - T * phi2) <= 3.0 * se_q);
}

TEST_CASE("quadratic variation of smooth paths vanishes like 1/K") {
    const TorusGrid g(1, 16);
    const auto phi = SpectralField::mode(g, {1, 0});
    std::vector<double> totals;
    for (std::size_t K : {64, 128, 256, 512}) {
        const TimeGrid tg(1.0, K);
        auto path = std::make_shared<const BrownianPath>(sample_brownian(0, 0, tg));
        const auto z = windowed_ito_process(zero_rule(), zero_rule(), sine_window(1.0), phi, path);
        double total = 0.0;
        for (double v : realized_quadratic_variation(z.z)) {
            CHECK(v >= 0.0);
            total += v;
        }
        totals.push_back(total);
    }
    for (std::size_t i = 1; i < totals.size(); ++i) CHECK(std::log2(totals[i - 1] / totals[i]) >= 0.9);
    const TimeGrid tg(1.0, 16);
    Trajectory zero{tg, std::vector<SpectralField>(tg.nodes(), SpectralField::zero(g))};
    for (double v : realized_quadratic_variation(zero)) CHECK(v == 0.0);
}
