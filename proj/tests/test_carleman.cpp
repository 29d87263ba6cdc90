#include <doctest.h>

#include "spdo/carleman.hpp"
#include "spdo/catalog.hpp"
#include "spdo/errors.hpp"

#include <cmath>
#include <numbers>

using namespace spdo;
using catalog::SymbolSpec;

namespace {

Symbol sym(const std::string& name, double scale = 1.0) {
    SymbolSpec s;
    s.name = name;
    s.scale = scale;
    return catalog::make_symbol(s, 1);
}

CarlemanConfig deterministic_base(const TorusGrid& g, double T, double kappa, std::size_t K) {
    CarlemanConfig c;
    c.grid = g;
    c.horizon = T;
    c.mu = kappa / (T * T);
    c.steps = K;
    c.paths = 1;
    c.a1 = OperatorFamily::from_symbol(sym("transport", 0.5), g);
    c.b1 = OperatorFamily::zero(g);
    return c;
}

CarlemanConfig stochastic_base(const TorusGrid& g, std::size_t P, std::size_t K) {
    CarlemanConfig c;
    c.grid = g;
    c.horizon = 0.25;
    c.mu = 64.0 / (0.25 * 0.25);
    c.steps = K;
    c.paths = P;
    c.seed = 99;
    c.a1 = OperatorFamily::from_symbol(sym("transport", 0.5), g);
    c.b1 = OperatorFamily::from_symbol(sym("lambda"), g);
    c.process.sigma = 0.1;
    return c;
}

// Composite Simpson rule on [0, T] with n intervals (n even).
double simpson(const std::function<double(double)>& f, double T, std::size_t n) {
    const double h = T / static_cast<double>(n);
    double acc = f(0.0) + f(T);
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(h * static_cast<double>(i));
    return acc * h / 3.0;
}

struct Oracle {
    double lhs1, lhs2, rhs1;
};

// z = sin(πt/T)e^{ix}, B₁ = b on that mode (real), A₁ real on that mode.
Oracle scalar_oracle(double T, double mu, double b, std::size_t n) {
    const double w = std::numbers::pi / T;
    auto eta = [&](double t) { return std::sin(w * t); };
    auto deta = [&](double t) { return w * std::cos(w * t); };
    auto weight = [&](double t) { return std::exp(mu * (t - T) * (t - T)); };
    Oracle o;
    o.lhs1 = simpson([&](double t) { return weight(t) * eta(t) * eta(t); }, T, n);
    o.lhs2 = simpson([&](double t) {
                 const double d = mu * (t - T) - b;
                 return weight(t) * d * d * eta(t) * eta(t);
             }, T, n) / mu;
    o.rhs1 = 4.0 / mu * simpson([&](double t) {
                 return -weight(t) * (mu * (t - T) - b) * eta(t) * (deta(t) + b * eta(t));
             }, T, n);
    return o;
}

}  // namespace

TEST_CASE("configuration is validated") {
    const TorusGrid g(1, 16);
    auto c = deterministic_base(g, 0.25, 64.0, 64);
    c.mu = -1.0;
    CHECK_THROWS_AS(validate(c), InvalidArgument);
    c = deterministic_base(g, 0.25, 64.0, 8);
    CHECK_THROWS_AS(validate(c), InvalidArgument);
    c = deterministic_base(g, 0.25, 64.0, 64);
    c.paths = 0;
    CHECK_THROWS_AS(validate(c), InvalidArgument);
    c = deterministic_base(g, 0.25, 64.0, 64);
    c.b1 = OperatorFamily::zero(TorusGrid(1, 32));
    CHECK_THROWS_AS(validate(c), GridMismatch);
}

TEST_CASE("zero process gives equality") {
    const TorusGrid g(1, 32);
    auto c = stochastic_base(g, 4, 64);
    c.custom_process = [&](std::shared_ptr<const BrownianPath> path) {
        Trajectory z{path->time_grid, std::vector<SpectralField>(path->time_grid.nodes(), SpectralField::zero(g))};
        return Semimartingale{std::move(z), path};
    };
    const auto r = verify_inequality(c);
    for (double t : r.term_mean) CHECK(t == 0.0);
    CHECK(r.lhs_mean == 0.0);
    CHECK(r.rhs_mean == 0.0);
    CHECK(r.verdict);

    c = deterministic_base(g, 0.25, 64.0, 64);
    c.a1 = OperatorFamily::zero(g);
    c.process.amplitude = 0.0;
    const auto z = verify_inequality(c);
    CHECK(z.lhs_mean == 0.0);
    CHECK(z.rhs_mean == 0.0);
    CHECK(z.verdict);
}

TEST_CASE("self-adjoint B₁ annihilates the skew term") {
    const TorusGrid g(1, 32);
    auto c = stochastic_base(g, 8, 64);
    c.process.rho = 0.2;
    const auto r = verify_inequality(c);
    for (const auto& p : r.per_path) CHECK(std::abs(p.terms[3]) <= 1e-12);

    c.b1 = OperatorFamily::from_symbol(sym("abs_xi", 2.0), g);
    for (const auto& p : verify_inequality(c).per_path) CHECK(std::abs(p.terms[3]) <= 1e-12);

    // A non-self-adjoint B₁ does not.
    c.b1 = OperatorFamily::from_symbol(sym("modulation"), g);
    double skew = 0.0;
    for (const auto& p : verify_inequality(c).per_path) skew = std::max(skew, std::abs(p.terms[3]));
    CHECK(skew > 1e-6);
}

TEST_CASE("left-hand side matches the scalar quadrature oracle") {
    const TorusGrid g(1, 16);
    const double T = 0.25;
    for (double mu : {1.0, 2.0, 4.0, 1024.0}) {
        auto c = deterministic_base(g, T, mu * T * T, 512);
        const auto r = verify_inequality(c);
        const auto o = scalar_oracle(T, c.mu, 0.0, 5120);
        CHECK(std::abs(r.term_mean[0] - o.lhs1) <= 1e-2 * o.lhs1);
        CHECK(std::abs(r.term_mean[1] - o.lhs2) <= 1e-2 * o.lhs2);
    }
    double prev = 0.0;
    for (double mu : {1.0, 2.0, 4.0}) {
        const auto r = verify_inequality(deterministic_base(g, T, mu * T * T, 512));
        CHECK(r.term_mean[0] > prev);
        prev = r.term_mean[0];
    }
}

TEST_CASE("deterministic right-hand side terms") {
    const TorusGrid g(1, 16);
    const double T = 0.25;
    std::vector<double> t3, t4;
    for (std::size_t K : {256, 512, 1024, 2048}) {
        auto c = deterministic_base(g, T, 64.0, K);
        c.b1 = OperatorFamily::from_symbol(sym("lambda"), g);
        const auto r = verify_inequality(c);
        t3.push_back(std::abs(r.term_mean[4]));
        t4.push_back(std::abs(r.term_mean[5]));
    }
    for (std::size_t i = 1; i < t3.size(); ++i) {
        CHECK(std::log2(t3[i - 1] / t3[i]) >= 0.9);
        CHECK(std::log2(t4[i - 1] / t4[i]) >= 0.9);
    }

    // Terms 1–2 against the oracle, B₁ = Λ¹ acting as √2 on e^{ix}.
    auto c = deterministic_base(g, T, 64.0, 8192);
    c.b1 = OperatorFamily::from_symbol(sym("lambda"), g);
    const auto r = verify_inequality(c);
    const auto o = scalar_oracle(T, c.mu, std::sqrt(2.0), 81920);
    CHECK(std::abs(r.term_mean[2] - o.rhs1) <= 1e-2 * std::abs(o.rhs1));
    CHECK(std::abs(r.term_mean[3]) <= 1e-12);
}

TEST_CASE("deterministic baseline is stable under refinement") {
    const TorusGrid g(1, 128);
    const double T = 0.25;
    const auto a = verify_inequality(deterministic_base(g, T, 64.0, 512));
    const auto b = verify_inequality(deterministic_base(g, T, 64.0, 1024));
    CHECK(std::abs(a.lhs_mean - b.lhs_mean) <= 1e-2 * std::abs(b.lhs_mean));
    CHECK(std::abs(a.rhs_mean - b.rhs_mean) <= 1e-2 * std::abs(b.rhs_mean));
    const auto o = scalar_oracle(T, 64.0 / (T * T), 0.0, 10240);
    CHECK(std::abs(b.lhs_mean - (o.lhs1 + o.lhs2)) <= 1e-2 * (o.lhs1 + o.lhs2));
    CHECK(std::abs(b.rhs_mean - o.rhs1) <= 1e-2 * std::abs(o.rhs1));
    CHECK(a.se == 0.0);
}

TEST_CASE("stochastic reports are reproducible and consistent") {
    const TorusGrid g(1, 32);
    auto c = stochastic_base(g, 32, 128);
    c.threads = 1;
    const auto a = verify_inequality(c);
    c.threads = 3;
    const auto b = verify_inequality(c);
    CHECK(a.term_mean == b.term_mean);
    CHECK(a.term_se == b.term_se);
    CHECK(a.se == b.se);
    CHECK(a.verdict == b.verdict);
    CHECK(a.se > 0.0);
    CHECK(std::abs(a.lhs_mean - (a.term_mean[0] + a.term_mean[1])) <= 1e-10 * std::abs(a.lhs_mean));
    double rhs = 0.0;
    for (std::size_t j = 2; j < kCarlemanTerms; ++j) rhs += a.term_mean[j];
    CHECK(std::abs(a.rhs_mean - rhs) <= 1e-10 * std::abs(a.rhs_mean));
    for (double s : a.term_se) CHECK(s >= 0.0);
    c.seed = 100;
    CHECK(verify_inequality(c).term_mean != a.term_mean);
}

TEST_CASE("standard error scales like P^{-1/2}") {
    const TorusGrid g(1, 32);
    std::vector<double> se;
    for (std::size_t P : {64, 256, 1024}) se.push_back(verify_inequality(stochastic_base(g, P, 128)).se);
    for (std::size_t i = 1; i < se.size(); ++i) {
        const double ratio = se[i - 1] / se[i];
        CHECK(std::abs(ratio / 2.0 - 1.0) <= 0.2);
    }
}

TEST_CASE("scan") {
    const TorusGrid g(1, 16);
    auto base = deterministic_base(g, 0.25, 64.0, 128);
    const auto one = scan({64.0}, {0.25}, base);
    REQUIRE(one.reports.size() == 1);
    const auto direct = verify_inequality(base);
    CHECK(one.reports[0].term_mean == direct.term_mean);
    CHECK(one.reports[0].verdict == direct.verdict);

    const auto a = scan({16.0, 64.0, 256.0}, {0.25}, base);
    const auto b = scan({16.0, 64.0, 256.0}, {0.25}, base);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.reports[i].gap == b.reports[i].gap);
    CHECK(a.reports[2].mu == doctest::Approx(256.0 / 0.0625));

    const auto grid = scan({16.0, 64.0, 256.0}, {0.0625, 0.125, 0.25}, stochastic_base(g, 8, 64));
    CHECK(grid.reports.size() == 9);
    const auto raw = scan({100.0}, {0.5}, base, false);
    CHECK(raw.reports[0].mu == 100.0);
    CHECK_THROWS_AS(scan({}, {0.25}, base), InvalidArgument);
}
