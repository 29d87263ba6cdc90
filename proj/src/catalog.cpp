#include "spdo/catalog.hpp"

#include "spdo/errors.hpp"

#include <algorithm>
#include <cmath>

namespace spdo::catalog {

namespace {

double japanese(const Vec& xi, double s) { return std::pow(1.0 + norm2(xi), 0.5 * s); }

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const std::vector<std::string>& symbol_names() {
    static const std::vector<std::string> names = {"zero",       "identity",   "lambda",       "xi",
                                                   "xi_squared", "abs_xi",     "transport",    "modulation",
                                                   "modulated_xi", "variable_elliptic", "path_lambda"};
    return names;
}

Symbol make_symbol(const SymbolSpec& spec, int dim) {
    if (!contains(symbol_names(), spec.name)) throw InvalidArgument("unknown catalog symbol '" + spec.name + "'");
    if (spec.axis < 0 || spec.axis >= dim) throw InvalidArgument("symbol axis out of range");

    const std::string& n = spec.name;
    const int axis = spec.axis;
    const double s = spec.s;

    enum class Freq { one, bracket, linear, square, magnitude, none };
    Freq freq = Freq::one;
    double order = 0.0;
    if (n == "zero") {
        freq = Freq::none;
    } else if (n == "lambda" || n == "variable_elliptic" || n == "path_lambda") {
        freq = Freq::bracket;
        order = s;
    } else if (n == "xi" || n == "transport" || n == "modulated_xi") {
        freq = Freq::linear;
        order = 1.0;
    } else if (n == "xi_squared") {
        freq = Freq::square;
        order = 2.0;
    } else if (n == "abs_xi") {
        freq = Freq::magnitude;
        order = 1.0;
    }

    enum class Space { one, sine, wave };
    Space space = Space::one;
    if (n == "variable_elliptic") space = Space::sine;
    if (n == "modulation" || n == "modulated_xi") space = Space::wave;

    const double gain = n == "path_lambda" || spec.path_gain != 0.0 ? spec.path_gain : 0.0;
    const double scale = spec.scale;
    const double base = spec.base;
    const double amp = spec.amplitude;
    const int mode = spec.mode;

    SymbolRule rule = [=](const EvalContext& ctx, const Vec& x, const Vec& xi) -> cplx {
        cplx f = 1.0;
        switch (freq) {
            case Freq::none: return 0.0;
            case Freq::one: break;
            case Freq::bracket: f = japanese(xi, s); break;
            case Freq::linear: f = xi[axis]; break;
            case Freq::square: f = xi[axis] * xi[axis]; break;
            case Freq::magnitude: f = std::sqrt(norm2(xi)); break;
        }
        cplx g = 1.0;
        switch (space) {
            case Space::one: break;
            case Space::sine: g = base + amp * std::sin(x[0]); break;
            case Space::wave: g = std::polar(1.0, mode * x[0]); break;
        }
        const double w = gain == 0.0 ? 1.0 : 1.0 + gain * std::sin(ctx.path.current());
        return scale * f * g * w;
    };

    SymbolTraits traits;
    traits.x_independent = space == Space::one;
    traits.path_independent = gain == 0.0;
    traits.time_independent = gain == 0.0;
    if (freq == Freq::linear || freq == Freq::square || freq == Freq::magnitude) traits.homogeneity = order;

    std::string label = n;
    if (freq == Freq::bracket) label += "(s=" + std::to_string(s) + ")";
    return Symbol(label, spec.declared_order.value_or(order), std::move(rule), traits, spec.integrability);
}

const std::vector<std::string>& principal_names() {
    static const std::vector<std::string> names = {"wave",        "laplace", "double_root", "transport",
                                                   "cubic_mixed", "cubic",   "custom"};
    return names;
}

PrincipalSymbol make_principal(const PrincipalSpec& spec, int dim) {
    if (!contains(principal_names(), spec.name))
        throw InvalidArgument("unknown catalog principal symbol '" + spec.name + "'");
    const double xa = spec.x_amplitude;
    const double gain = spec.path_gain;
    auto coef = [xa, gain](cplx value) -> CoefficientRule {
        return [=](const EvalContext& ctx, const Vec& x) -> cplx {
            cplx v = value;
            if (xa != 0.0) v *= 1.0 + xa * std::sin(x[0]);
            if (gain != 0.0) v *= 1.0 + gain * std::sin(ctx.path.current());
            return v;
        };
    };
    auto one_d_only = [&] {
        if (dim != 1) throw InvalidArgument("principal symbol '" + spec.name + "' is defined for n = 1 only");
    };

    const std::string& n = spec.name;
    int m = 2;
    std::vector<std::vector<MonomialTerm>> terms;
    if (n == "wave" || n == "laplace") {
        const cplx c0 = n == "wave" ? cplx(spec.speed * spec.speed) : cplx(-1.0);
        terms = {{{{2, 0}, coef(c0)}}, {}};
        if (dim == 2) terms[0].push_back({{0, 2}, coef(c0)});
    } else if (n == "double_root") {
        terms = {{{{2, 0}, coef(-1.0)}}, {{{1, 0}, coef(2.0)}}};
    } else if (n == "transport") {
        m = 1;
        terms = {{{{1, 0}, coef(spec.speed)}}};
    } else if (n == "cubic_mixed") {
        one_d_only();
        m = 3;
        // (τ − ξ)(τ² + ξ²) = τ³ − ξτ² + ξ²τ − ξ³
        terms = {{{{3, 0}, coef(1.0)}}, {{{2, 0}, coef(-1.0)}}, {{{1, 0}, coef(1.0)}}};
    } else if (n == "cubic") {
        one_d_only();
        m = 3;
        terms = {{{{3, 0}, coef(cplx(0.0, 1.0))}}, {{{2, 0}, coef(1.0)}}, {{{1, 0}, coef(1.0)}}};
    } else {
        one_d_only();
        if (spec.custom.empty()) throw InvalidArgument("custom principal symbol needs coefficients");
        m = static_cast<int>(spec.custom.size());
        terms.resize(spec.custom.size());
        for (int k = 0; k < m; ++k) terms[static_cast<std::size_t>(k)] = {{{m - k, 0}, coef(spec.custom[static_cast<std::size_t>(k)])}};
    }

    SymbolTraits traits;
    traits.x_independent = xa == 0.0;
    traits.path_independent = gain == 0.0;
    traits.time_independent = gain == 0.0;
    return PrincipalSymbol(n, dim, m, std::move(terms), traits);
}

}  // namespace spdo::catalog
