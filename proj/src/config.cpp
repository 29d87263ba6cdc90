#include "spdo/config.hpp"

#include "spdo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace spdo {

using nlohmann::ordered_json;

ExperimentConfig::ExperimentConfig() {
    symbol.name = "lambda";
    principal.name = "wave";
    carleman.a1.name = "transport";
    carleman.a1.scale = 0.5;
    carleman.b1.name = "lambda";
    carleman.process.sigma = 0.1;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"symbol-verify", "bounded-test", "elliptic-parametrix",
                                                   "roots-check",   "reduce",       "carleman-scan"};
    return names;
}

std::string canonical_subcommand(const std::string& name) {
    if (name == "parametrix-test") return "elliptic-parametrix";
    const auto& all = subcommands();
    if (std::find(all.begin(), all.end(), name) == all.end())
        throw ConfigError("unknown subcommand '" + name + "'", "command");
    return name;
}

ordered_json json_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

struct Ctx {
    const std::string& key;
    int line;
    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + why, key, line);
    }
};

double to_double(const std::string& s, const Ctx& c) {
    if (s == "inf") return kInfinity;
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) c.fail("expected a number, got '" + s + "'");
    return v;
}

long long to_integer(const std::string& s, const Ctx& c) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) c.fail("expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s, const Ctx& c) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) c.fail("expected an unsigned 64-bit integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s, const Ctx& c) {
    if (s == "true") return true;
    if (s == "false") return false;
    c.fail("expected true or false, got '" + s + "'");
}

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&, const Ctx&)> set;
    std::function<ordered_json(const ExperimentConfig&)> get;
};

using Range = std::function<bool(double)>;
const Range any = [](double) { return true; };
const Range positive = [](double v) { return v > 0.0; };
const Range nonnegative = [](double v) { return v >= 0.0; };

template <typename Member>
Field real(std::string key, Member m, Range ok = any, const char* rule = "") {
    return {key,
            [m, ok, rule](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                const double d = to_double(v, x);
                if (!std::isfinite(d) && d != kInfinity) x.fail("not a finite number");
                if (!ok(d)) x.fail(std::string("must be ") + rule);
                m(c) = d;
            },
            [m](const ExperimentConfig& c) { return json_number(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename T, typename Member>
Field integer(std::string key, Member m, long long lo, long long hi) {
    return {key,
            [m, lo, hi](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                const long long n = to_integer(v, x);
                if (n < lo || n > hi) x.fail("must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                m(c) = static_cast<T>(n);
            },
            [m](const ExperimentConfig& c) { return ordered_json(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Member>
Field text(std::string key, Member m, std::vector<std::string> allowed) {
    return {key,
            [m, allowed](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                    std::string list;
                    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
                    x.fail("must be one of " + list + ", got '" + v + "'");
                }
                m(c) = v;
            },
            [m](const ExperimentConfig& c) { return ordered_json(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Member>
Field flag(std::string key, Member m) {
    return {key, [m](ExperimentConfig& c, const std::string& v, const Ctx& x) { m(c) = to_bool(v, x); },
            [m](const ExperimentConfig& c) { return ordered_json(m(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Member>
Field real_list(std::string key, Member m, Range ok, const char* rule, bool allow_empty = false) {
    return {key,
            [m, ok, rule, allow_empty](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                std::vector<double> out;
                if (!v.empty())
                    for (const auto& item : split_list(v)) {
                        const double d = to_double(item, x);
                        if (!std::isfinite(d) || !ok(d)) x.fail(std::string("entries must be finite and ") + rule);
                        out.push_back(d);
                    }
                if (out.empty() && !allow_empty) x.fail("list must not be empty");
                m(c) = out;
            },
            [m](const ExperimentConfig& c) {
                ordered_json a = ordered_json::array();
                for (double d : m(const_cast<ExperimentConfig&>(c))) a.push_back(json_number(d));
                return a;
            }};
}

template <typename Member>
Field mode_vector(std::string key, Member m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                const auto items = split_list(v);
                if (items.empty() || items.size() > 2) x.fail("expected one or two integers");
                std::array<int, 2> k{0, 0};
                for (std::size_t i = 0; i < items.size(); ++i) {
                    const long long n = to_integer(items[i], x);
                    if (std::abs(n) > 1 << 20) x.fail("mode out of range");
                    k[i] = static_cast<int>(n);
                }
                m(c) = k;
            },
            [m](const ExperimentConfig& c) {
                const auto k = m(const_cast<ExperimentConfig&>(c));
                return ordered_json::array({k[0], k[1]});
            }};
}

std::vector<Field> symbol_fields(const std::string& prefix, std::function<catalog::SymbolSpec&(ExperimentConfig&)> s) {
    std::vector<Field> f;
    f.push_back(text(prefix, [s](ExperimentConfig& c) -> std::string& { return s(c).name; }, catalog::symbol_names()));
    f.push_back(real(prefix + ".s", [s](ExperimentConfig& c) -> double& { return s(c).s; }));
    f.push_back(real(prefix + ".scale", [s](ExperimentConfig& c) -> double& { return s(c).scale; }));
    f.push_back(real(prefix + ".base", [s](ExperimentConfig& c) -> double& { return s(c).base; }));
    f.push_back(real(prefix + ".amplitude", [s](ExperimentConfig& c) -> double& { return s(c).amplitude; }));
    f.push_back(integer<int>(prefix + ".mode", [s](ExperimentConfig& c) -> int& { return s(c).mode; }, -1024, 1024));
    f.push_back(integer<int>(prefix + ".axis", [s](ExperimentConfig& c) -> int& { return s(c).axis; }, 0, 1));
    f.push_back(real(prefix + ".path_gain", [s](ExperimentConfig& c) -> double& { return s(c).path_gain; }));
    f.push_back(real(prefix + ".integrability", [s](ExperimentConfig& c) -> double& { return s(c).integrability; },
                     [](double v) { return v >= 1.0; }, ">= 1 (use inf for p = inf)"));
    f.push_back({prefix + ".order",
                 [s](ExperimentConfig& c, const std::string& v, const Ctx& x) {
                     if (v == "auto") {
                         s(c).declared_order.reset();
                     } else {
                         const double d = to_double(v, x);
                         if (!std::isfinite(d)) x.fail("must be finite or auto");
                         s(c).declared_order = d;
                     }
                 },
                 [s](const ExperimentConfig& c) -> ordered_json {
                     const auto& o = s(const_cast<ExperimentConfig&>(c)).declared_order;
                     if (!o) return "auto";
                     return *o;
                 }});
    return f;
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        using C = ExperimentConfig;
        std::vector<Field> f;
        std::vector<std::string> commands = subcommands();
        commands.push_back("parametrix-test");
        f.push_back(text("command", [](C& c) -> std::string& { return c.command; }, commands));
        f.push_back(integer<int>("n", [](C& c) -> int& { return c.dim; }, 1, 2));
        f.push_back({"M",
                     [](C& c, const std::string& v, const Ctx& x) {
                         const long long n = to_integer(v, x);
                         if (n < 8 || n > (1 << 16) || (n & (n - 1)) != 0) x.fail("must be a power of two in [8, 65536]");
                         c.points = static_cast<std::size_t>(n);
                     },
                     [](const C& c) { return ordered_json(c.points); }});
        f.push_back(real("T", [](C& c) -> double& { return c.horizon; }, positive, "positive"));
        f.push_back(integer<std::size_t>("K", [](C& c) -> std::size_t& { return c.steps; }, 16, 1 << 22));
        f.push_back(integer<std::size_t>("P", [](C& c) -> std::size_t& { return c.paths; }, 1, 1 << 24));
        f.push_back({"seed", [](C& c, const std::string& v, const Ctx& x) { c.seed = to_u64(v, x); },
                     [](const C& c) { return ordered_json(c.seed); }});

        for (auto& s : symbol_fields("symbol", [](C& c) -> catalog::SymbolSpec& { return c.symbol; })) f.push_back(s);

        f.push_back(text("principal", [](C& c) -> std::string& { return c.principal.name; }, catalog::principal_names()));
        f.push_back(real("principal.speed", [](C& c) -> double& { return c.principal.speed; }));
        f.push_back(real("principal.x_amplitude", [](C& c) -> double& { return c.principal.x_amplitude; }));
        f.push_back(real("principal.path_gain", [](C& c) -> double& { return c.principal.path_gain; }));
        f.push_back(real_list("principal.custom", [](C& c) -> std::vector<double>& { return c.custom_real; }, any,
                              "real", true));
        f.push_back(real_list("principal.custom_imag", [](C& c) -> std::vector<double>& { return c.custom_imag; }, any,
                              "real", true));

        f.push_back(integer<std::size_t>("samples.paths", [](C& c) -> std::size_t& { return c.samples.paths; }, 1, 1024));
        f.push_back(integer<std::size_t>("samples.times", [](C& c) -> std::size_t& { return c.samples.times; }, 1, 1024));
        f.push_back(integer<std::size_t>("samples.x_stride", [](C& c) -> std::size_t& { return c.samples.x_stride; }, 1,
                                         1 << 16));

        f.push_back(real("verify.max_frequency", [](C& c) -> double& { return c.verify.max_frequency; },
                         [](double v) { return v >= 8.0; }, ">= 8"));
        f.push_back(integer<std::size_t>("verify.radii", [](C& c) -> std::size_t& { return c.verify.radii; }, 4, 1024));
        f.push_back(real("verify.tolerance", [](C& c) -> double& { return c.verify.tolerance; }, positive, "positive"));

        f.push_back(real("bounded.s", [](C& c) -> double& { return c.bounded.s; }));
        f.push_back(integer<std::size_t>("bounded.trials", [](C& c) -> std::size_t& { return c.bounded.trials; }, 1, 1 << 16));
        f.push_back({"bounded.cutoffs",
                     [](C& c, const std::string& v, const Ctx& x) {
                         std::vector<std::size_t> out;
                         for (const auto& item : split_list(v)) {
                             const long long n = to_integer(item, x);
                             if (n < 4 || n > (1 << 15) || (n & (n - 1)) != 0) x.fail("entries must be powers of two >= 4");
                             out.push_back(static_cast<std::size_t>(n));
                         }
                         if (out.empty()) x.fail("list must not be empty");
                         c.bounded.cutoffs = out;
                     },
                     [](const C& c) { return ordered_json(c.bounded.cutoffs); }});
        f.push_back(real("bounded.max_variation", [](C& c) -> double& { return c.bounded_max_variation; }, positive,
                         "positive"));
        f.push_back({"bounded.max_ratio",
                     [](C& c, const std::string& v, const Ctx& x) {
                         if (v == "none") {
                             c.bounded_max_ratio.reset();
                             return;
                         }
                         const double d = to_double(v, x);
                         if (!(d > 0.0)) x.fail("must be positive or none");
                         c.bounded_max_ratio = d;
                     },
                     [](const C& c) -> ordered_json {
                         if (!c.bounded_max_ratio) return "none";
                         return json_number(*c.bounded_max_ratio);
                     }});

        f.push_back(real("parametrix.radius", [](C& c) -> double& { return c.parametrix.radius; }, positive, "positive"));
        f.push_back(integer<int>("parametrix.k_min", [](C& c) -> int& { return c.parametrix.k_min; }, 1, 1 << 15));
        f.push_back(integer<int>("parametrix.k_max", [](C& c) -> int& { return c.parametrix.k_max; }, 0, 1 << 15));
        f.push_back(real("parametrix.max_slope", [](C& c) -> double& { return c.parametrix.max_slope; }));
        f.push_back(flag("parametrix.right", [](C& c) -> bool& { return c.parametrix.right; }));

        f.push_back(real("roots.epsilon", [](C& c) -> double& { return c.roots.epsilon; }, positive, "positive"));
        f.push_back(integer<std::size_t>("roots.angles", [](C& c) -> std::size_t& { return c.roots.angles; }, 1, 1 << 16));

        f.push_back(integer<int>("reduce.mode", [](C& c) -> int& { return c.reduce.mode; }, -1024, 1024));
        f.push_back(integer<std::size_t>("reduce.levels", [](C& c) -> std::size_t& { return c.reduce.levels; }, 2, 8));
        f.push_back(real("reduce.min_order", [](C& c) -> double& { return c.reduce.min_order; }));
        f.push_back(real("reduce.max_residual", [](C& c) -> double& { return c.reduce.max_residual; }, positive,
                         "positive"));

        f.push_back(real_list("carleman.kappa", [](C& c) -> std::vector<double>& { return c.carleman.kappa; }, positive,
                              "positive"));
        f.push_back(real_list("carleman.mu", [](C& c) -> std::vector<double>& { return c.carleman.mu; }, positive,
                              "positive", true));
        f.push_back(real_list("carleman.T", [](C& c) -> std::vector<double>& { return c.carleman.horizons; }, positive,
                              "positive"));
        f.push_back(text("carleman.family", [](C& c) -> std::string& { return c.carleman.family; },
                         {"catalog", "reduction"}));
        for (auto& s : symbol_fields("carleman.a1", [](C& c) -> catalog::SymbolSpec& { return c.carleman.a1; }))
            f.push_back(s);
        for (auto& s : symbol_fields("carleman.b1", [](C& c) -> catalog::SymbolSpec& { return c.carleman.b1; }))
            f.push_back(s);
        f.push_back(integer<std::size_t>("carleman.branch", [](C& c) -> std::size_t& { return c.carleman.branch; }, 0, 64));
        f.push_back(real("process.theta", [](C& c) -> double& { return c.carleman.process.theta; }));
        f.push_back(real("process.sigma", [](C& c) -> double& { return c.carleman.process.sigma; }));
        f.push_back(real("process.rho", [](C& c) -> double& { return c.carleman.process.rho; }));
        f.push_back(mode_vector("process.noise_mode", [](C& c) -> std::array<int, 2>& { return c.carleman.process.noise_mode; }));
        f.push_back(mode_vector("process.initial_mode",
                                [](C& c) -> std::array<int, 2>& { return c.carleman.process.initial_mode; }));
        f.push_back({"process.amplitude",
                     [](C& c, const std::string& v, const Ctx& x) { c.carleman.process.amplitude = to_double(v, x); },
                     [](const C& c) { return json_number(c.carleman.process.amplitude.real()); }});
        f.push_back(flag("output.paths", [](C& c) -> bool& { return c.carleman.dump_paths; }));
        return f;
    }();
    return fields;
}

const Field* find_field(const std::string& key) {
    for (const auto& f : schema())
        if (f.key == key) return &f;
    return nullptr;
}

void cross_validate(ExperimentConfig& c) {
    auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why, key); };
    if (c.symbol.axis >= c.dim) fail("symbol.axis", "axis must be smaller than n");
    if (!c.custom_imag.empty() && c.custom_imag.size() != c.custom_real.size())
        fail("principal.custom_imag", "must have as many entries as principal.custom");
    if (c.principal.name == "custom" && c.custom_real.empty()) fail("principal.custom", "required for principal = custom");
    c.principal.custom.clear();
    for (std::size_t i = 0; i < c.custom_real.size(); ++i)
        c.principal.custom.emplace_back(c.custom_real[i], c.custom_imag.empty() ? 0.0 : c.custom_imag[i]);
    if (c.dim == 2 && c.points * c.points > kDenseCap && c.command != "carleman-scan" && c.command != "roots-check")
        fail("M", "n = 2 grids need M^2 <= " + std::to_string(kDenseCap) + " for dense operators");
    if (c.parametrix.k_max != 0 && c.parametrix.k_max <= c.parametrix.k_min)
        fail("parametrix.k_max", "must exceed parametrix.k_min");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", {}, line);
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const Field* f = find_field(key);
        if (!f) throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'", key, line);
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'", key, line);
        f->set(c, value, Ctx{key, line});
    }
    if (!c.command.empty()) c.command = canonical_subcommand(c.command);
    cross_validate(c);
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ordered_json config_echo(const ExperimentConfig& c) {
    ordered_json out = ordered_json::object();
    for (const auto& f : schema()) out[f.key] = f.get(c);
    return out;
}

std::vector<std::pair<std::string, std::string>> config_schema() {
    const ExperimentConfig defaults;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : schema()) {
        const auto v = f.get(defaults);
        out.emplace_back(f.key, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return out;
}

}  // namespace spdo
