#include <doctest.h>

#include "spdo/catalog.hpp"
#include "spdo/errors.hpp"
#include "spdo/symbol.hpp"

#include <cmath>

using namespace spdo;
using catalog::SymbolSpec;

namespace {

SampleSet samples_1d(std::size_t paths = 2) {
    SampleSetOptions o;
    o.paths = paths;
    return make_sample_set(TorusGrid(1, 64), TimeGrid(1.0, 64), o);
}

Symbol lambda_s(double s) {
    SymbolSpec spec;
    spec.name = "lambda";
    spec.s = s;
    return catalog::make_symbol(spec, 1);
}

const OrderEntry& entry(const OrderReport& r, int alpha, int beta) {
    for (const auto& e : r.entries)
        if (e.alpha[0] == alpha && e.beta[0] == beta) return e;
    throw std::runtime_error("missing entry");
}

}  // namespace

TEST_CASE("finite-difference derivatives match closed forms") {
    const auto a = lambda_s(1.0);
    const auto ctx = deterministic_context();
    const Vec xi{3.0, 0.0};
    const double d1 = 3.0 / std::sqrt(10.0);
    const double d2 = 1.0 / std::pow(10.0, 1.5);
    CHECK(std::abs(symbol_derivative(a, ctx, {0, 0}, xi, {1, 0}, {0, 0}) - d1) <= 1e-6);
    CHECK(std::abs(symbol_derivative(a, ctx, {0, 0}, xi, {2, 0}, {0, 0}) - d2) <= 1e-6);

    SymbolSpec v{.name = "variable_elliptic"};
    const auto b = catalog::make_symbol(v, 1);
    const Vec x{0.4, 0.0};
    const double expect = std::cos(0.4) * std::sqrt(10.0);
    CHECK(std::abs(symbol_derivative(b, ctx, x, xi, {0, 0}, {1, 0}) - expect) <= 1e-5);
}

TEST_CASE("order of Λ^s is recovered") {
    const auto samples = samples_1d();
    for (double s : {-1.0, 0.0, 1.0, 2.0}) {
        const auto r = verify_symbol_order(lambda_s(s), samples);
        CHECK(r.pass);
        const auto& e0 = entry(r, 0, 0);
        CHECK(std::abs(e0.fitted_exponent - s) <= 0.05);
        if (s != 0.0) CHECK(std::abs(entry(r, 1, 0).fitted_exponent - (s - 1.0)) <= 0.05);
    }
}

TEST_CASE("order of the identity symbol and misdeclared ξ²") {
    const auto samples = samples_1d();
    const auto id = verify_symbol_order(catalog::make_symbol({.name = "identity"}, 1), samples);
    CHECK(id.pass);
    CHECK(std::abs(entry(id, 0, 0).fitted_exponent) <= 0.05);
    CHECK(entry(id, 1, 0).below_floor);
    CHECK(std::isinf(entry(id, 1, 0).fitted_exponent));

    SymbolSpec sq{.name = "xi_squared"};
    sq.declared_order = 1.0;
    const auto bad = verify_symbol_order(catalog::make_symbol(sq, 1), samples);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.offending.has_value());
    const auto& off = bad.entries[*bad.offending];
    CHECK(off.fitted_exponent > off.bound + 0.05);
    CHECK(std::abs(entry(bad, 0, 0).fitted_exponent - 2.0) <= 0.05);

    sq.declared_order.reset();
    CHECK(verify_symbol_order(catalog::make_symbol(sq, 1), samples).pass);
}

TEST_CASE("order checks cover x, path and two-dimensional symbols") {
    const auto ve = catalog::make_symbol({.name = "variable_elliptic"}, 1);
    CHECK(verify_symbol_order(ve, samples_1d()).pass);
    SymbolSpec pl{.name = "path_lambda"};
    pl.path_gain = 0.5;
    CHECK(verify_symbol_order(catalog::make_symbol(pl, 1), samples_1d(3)).pass);

    SampleSetOptions o;
    o.x_stride = 16;
    const auto s2 = make_sample_set(TorusGrid(2, 32), TimeGrid(1.0, 16), o);
    SymbolSpec l2{.name = "lambda"};
    l2.s = 1.5;
    const auto r = verify_symbol_order(catalog::make_symbol(l2, 2), s2);
    CHECK(r.pass);
    CHECK(std::abs(r.entries.front().fitted_exponent - 1.5) <= 0.05);
}

TEST_CASE("evaluation failures carry the sample point") {
    const Symbol broken("broken", 0.0, [](const EvalContext&, const Vec&, const Vec& xi) -> cplx {
        if (xi[0] > 10.0) throw std::runtime_error("overflow");
        return 1.0;
    });
    try {
        verify_symbol_order(broken, samples_1d());
        FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("xi=") != std::string::npos);
    }
}

TEST_CASE("time integrability estimate") {
    SymbolSpec pl{.name = "path_lambda"};
    pl.path_gain = 0.5;
    pl.integrability = 2.0;
    const auto r = verify_symbol_order(catalog::make_symbol(pl, 1), samples_1d());
    CHECK(r.integrability == 2.0);
    CHECK(r.time_integrability_finite);
    CHECK(r.time_integrability_estimate > 0.0);
}

TEST_CASE("ellipticity checks") {
    const TorusGrid grid(1, 64);
    const auto samples = samples_1d();
    const auto freqs = lattice_frequencies(grid, 1.0);

    const auto ve = check_elliptic(catalog::make_symbol({.name = "variable_elliptic"}, 1), 1.0, samples, freqs);
    CHECK(ve.is_elliptic);
    // Oracle: min over the sampled x and lattice ξ of the closed form.
    double oracle = kInfinity;
    for (const auto& x : samples.points)
        for (const auto& xi : freqs) {
            const double r = std::abs(xi[0]);
            oracle = std::min(oracle, (2.0 + std::sin(x[0])) * std::sqrt(1.0 + r * r) / (1.0 + r));
        }
    CHECK(ve.constant == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(ve.constant >= 1.0 / std::sqrt(2.0));

    const auto xi = check_elliptic(catalog::make_symbol({.name = "xi"}, 1), 1.0, samples, freqs);
    CHECK(xi.is_elliptic);
    CHECK(xi.constant >= 0.5 - 1e-15);

    SymbolSpec sinx{.name = "variable_elliptic"};
    sinx.base = 0.0;
    const auto bad = check_elliptic(catalog::make_symbol(sinx, 1), 1.0, samples, freqs);
    CHECK_FALSE(bad.is_elliptic);
    CHECK(bad.constant <= kEllipticFloor);
}

TEST_CASE("sample sets and unit spheres") {
    CHECK(unit_sphere(1).size() == 2);
    const auto s = unit_sphere(2, 64);
    CHECK(s.size() == 64);
    for (const auto& v : s) CHECK(std::abs(norm2(v) - 1.0) <= 1e-15);
    const auto a = samples_1d();
    const auto b = samples_1d();
    REQUIRE(a.contexts.size() == b.contexts.size());
    for (std::size_t i = 0; i < a.contexts.size(); ++i) {
        CHECK(a.contexts[i].t == b.contexts[i].t);
        CHECK(a.contexts[i].path.current() == b.contexts[i].path.current());
    }
    CHECK_THROWS_AS(catalog::make_symbol({.name = "nope"}, 1), InvalidArgument);
}
