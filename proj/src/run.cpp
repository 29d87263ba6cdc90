#include "spdo/run.hpp"

#include "spdo/errors.hpp"
#include "spdo/reduction.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#ifndef SPDO_VERSION
#define SPDO_VERSION "0.0.0"
#endif

namespace spdo {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* artifact_version() { return SPDO_VERSION; }

std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read '" + path.string() + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

namespace {

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

    Csv& cell(double v) { return push(format_real(v)); }
    Csv& cell(std::size_t v) { return push(std::to_string(v)); }
    Csv& cell(int v) { return push(std::to_string(v)); }
    Csv& cell(bool v) { return push(v ? "true" : "false"); }
    Csv& cell(const std::string& v) { return push(v); }
    Csv& cell(const char* v) { return push(v); }

    void end_row() {
        if (current_.size() != columns_) throw InvalidArgument("csv row has the wrong number of cells");
        row_strings(current_);
        current_.clear();
    }

    const std::string& text() const noexcept { return text_; }

private:
    Csv& push(std::string s) {
        current_.push_back(std::move(s));
        return *this;
    }
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += '\n';
    }

    std::size_t columns_;
    std::vector<std::string> current_;
    std::string text_;
};

class Emitter {
public:
    explicit Emitter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write '" + (dir_ / name).string() + "'");
        out << content;
        out.close();
        if (!out) throw InvalidArgument("write failed for '" + (dir_ / name).string() + "'");
        if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    }
    void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

    const fs::path& dir() const noexcept { return dir_; }
    const std::vector<std::string>& files() const noexcept { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json environment_stamp() {
    ordered_json e;
    e["artifact"] = "spdo-lab";
    e["version"] = artifact_version();
#if defined(__clang__)
    e["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    e["compiler"] = std::string("gcc ") + __VERSION__;
#else
    e["compiler"] = "unknown";
#endif
    e["cxx_standard"] = static_cast<long>(__cplusplus);
    e["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
#ifdef NDEBUG
    e["build"] = "release";
#else
    e["build"] = "debug";
#endif
    e["csv"] = "'.' decimal, 17 significant digits, LF line endings";
    return e;
}

void write_manifest(Emitter& em, std::uint64_t seed, const ordered_json& echo) {
    ordered_json m;
    m["artifact"] = "spdo-lab";
    m["version"] = artifact_version();
    m["timestamp"] = utc_timestamp();
    m["seed"] = seed;
    m["config"] = echo;
    ordered_json files = ordered_json::array();
    for (const auto& name : em.files()) {
        ordered_json f;
        f["name"] = name;
        f["bytes"] = static_cast<std::uintmax_t>(fs::file_size(em.dir() / name));
        f["sha256"] = sha256_file(em.dir() / name);
        files.push_back(f);
    }
    m["files"] = files;
    em.write_json("manifest.json", m);
}

ordered_json error_record(const Error& e) {
    ordered_json r;
    r["kind"] = e.kind();
    r["message"] = e.what();
    if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
        if (!c->key().empty()) r["key"] = c->key();
        if (c->line() > 0) r["line"] = c->line();
    }
    if (const auto* s = dynamic_cast<const RootSolverError*>(&e)) r["residual"] = json_number(s->residual());
    return r;
}

struct Outcome {
    bool pass = false;
    ordered_json summary;
};

SampleSet samples_for(const ExperimentConfig& c) {
    SampleSetOptions o = c.samples;
    o.seed = c.seed;
    return make_sample_set(TorusGrid(c.dim, c.points), TimeGrid(c.horizon, c.steps), o);
}

Outcome symbol_verify(const ExperimentConfig& c, Emitter& em) {
    const Symbol a = catalog::make_symbol(c.symbol, c.dim);
    const OrderReport r = verify_symbol_order(a, samples_for(c), c.verify);
    Csv csv({"alpha1", "alpha2", "beta1", "beta2", "bound", "fitted_exponent", "bound_estimate", "below_floor", "pass"});
    for (const auto& e : r.entries) {
        csv.cell(e.alpha[0]).cell(e.alpha[1]).cell(e.beta[0]).cell(e.beta[1]).cell(e.bound).cell(e.fitted_exponent);
        csv.cell(e.bound_estimate).cell(e.below_floor).cell(e.pass).end_row();
    }
    em.write("symbol_verify.csv", csv.text());
    Outcome o;
    o.pass = r.pass;
    o.summary["symbol"] = a.name();
    o.summary["declared_order"] = json_number(r.declared_order);
    o.summary["integrability"] = json_number(r.integrability);
    o.summary["time_integrability_estimate"] = json_number(r.time_integrability_estimate);
    o.summary["time_integrability_finite"] = r.time_integrability_finite;
    if (r.offending) {
        const auto& e = r.entries[*r.offending];
        ordered_json off;
        off["alpha"] = {e.alpha[0], e.alpha[1]};
        off["beta"] = {e.beta[0], e.beta[1]};
        off["bound"] = json_number(e.bound);
        off["fitted_exponent"] = json_number(e.fitted_exponent);
        o.summary["offending"] = off;
    } else {
        o.summary["offending"] = nullptr;
    }
    return o;
}

Outcome bounded_test(const ExperimentConfig& c, Emitter& em) {
    const Symbol a = catalog::make_symbol(c.symbol, c.dim);
    BoundednessOptions opts = c.bounded;
    opts.seed = c.seed;
    const BoundednessReport r = boundedness_harness(a, c.dim, deterministic_context(0.0, c.horizon), opts);
    Csv csv({"cutoff", "max_ratio", "max_ratio_random", "max_ratio_modes"});
    double worst = 0.0;
    for (const auto& row : r.rows) {
        csv.cell(row.cutoff).cell(row.max_ratio).cell(row.max_ratio_random).cell(row.max_ratio_modes).end_row();
        worst = std::max(worst, row.max_ratio);
    }
    em.write("bounded.csv", csv.text());
    Outcome o;
    const bool stable = r.variation < c.bounded_max_variation;
    const bool bounded = !c.bounded_max_ratio || worst <= *c.bounded_max_ratio;
    o.pass = stable && bounded;
    o.summary["symbol"] = a.name();
    o.summary["s"] = json_number(r.s);
    o.summary["order"] = json_number(r.order);
    o.summary["variation"] = json_number(r.variation);
    o.summary["max_variation"] = json_number(c.bounded_max_variation);
    o.summary["max_ratio"] = json_number(worst);
    o.summary["ratio_bound"] = c.bounded_max_ratio ? json_number(*c.bounded_max_ratio) : ordered_json("none");
    o.summary["stable"] = stable;
    o.summary["bounded"] = bounded;
    return o;
}

inline constexpr double kExactResidual = 1e-12;

Outcome elliptic_parametrix(const ExperimentConfig& c, Emitter& em) {
    const Symbol a = catalog::make_symbol(c.symbol, c.dim);
    const TorusGrid grid(c.dim, c.points);
    const EvalContext ctx = deterministic_context(0.0, c.horizon);
    const SpdoOperator op = SpdoOperator::quantize(a, grid, ctx);
    const auto& opts = c.parametrix;
    const Parametrix b = opts.right ? right_parametrix(a, grid, ctx, opts.radius)
                                    : left_parametrix(a, grid, ctx, opts.radius);
    const int k_max = opts.k_max > 0 ? opts.k_max : static_cast<int>(grid.frequency_cutoff() / 2);
    if (k_max >= static_cast<int>(grid.frequency_cutoff()) || k_max <= opts.k_min)
        throw ConfigError("parametrix.k_max must lie in (k_min, M/2)", "parametrix.k_max");
    const ResidualStudy study = parametrix_residual(op, b.op, !opts.right, opts.k_min, k_max);
    Csv csv({"frequency", "residual_norm", "fitted_slope"});
    double worst = 0.0;
    for (const auto& row : study.rows) {
        csv.cell(row.frequency).cell(row.residual).cell(study.fitted_slope).end_row();
        worst = std::max(worst, row.residual);
    }
    em.write("parametrix.csv", csv.text());
    Outcome o;
    const bool exact = worst <= kExactResidual;
    const bool decays = study.fitted_slope <= opts.max_slope;
    o.pass = exact || decays;
    o.summary["symbol"] = a.name();
    o.summary["side"] = opts.right ? "right" : "left";
    o.summary["radius"] = json_number(opts.radius);
    o.summary["k_min"] = opts.k_min;
    o.summary["k_max"] = k_max;
    o.summary["fitted_slope"] = json_number(study.fitted_slope);
    o.summary["max_slope"] = json_number(opts.max_slope);
    o.summary["max_residual"] = json_number(worst);
    o.summary["exact"] = exact;
    o.summary["ellipticity_constant"] = json_number(b.ellipticity.constant);
    return o;
}

ordered_json hypotheses_json(const HypothesisReport& r) {
    ordered_json j;
    j["epsilon"] = json_number(r.epsilon);
    j["h1_margin"] = json_number(r.h1_margin);
    j["h2_margin"] = json_number(r.h2_margin);
    j["h3_margin"] = json_number(r.h3_margin);
    j["samples"] = r.samples;
    j["complex_roots"] = r.complex_roots;
    j["h1_pass"] = r.h1_pass;
    j["h2_pass"] = r.h2_pass;
    j["h3_pass"] = r.h3_pass;
    j["pass"] = r.pass();
    return j;
}

Outcome roots_check(const ExperimentConfig& c, Emitter& em) {
    const PrincipalSymbol p = catalog::make_principal(c.principal, c.dim);
    const HypothesisReport r = check_hypotheses(p, samples_for(c), unit_sphere(c.dim, c.roots.angles), c.roots.epsilon);
    ordered_json j = hypotheses_json(r);
    j["principal"] = p.name();
    j["order"] = p.order();
    em.write_json("hypotheses.json", j);
    Outcome o;
    o.pass = r.pass();
    o.summary = j;
    return o;
}

/// u(t) = sin(πt/T)·e^{i k x₁} with exact D_t^j u = (−iω)^j sin(ωt + jπ/2)·e^{ikx₁}.
ManufacturedSolution manufactured(const TorusGrid& grid, int mode, double horizon) {
    const double w = std::numbers::pi / horizon;
    const SpectralField base = SpectralField::mode(grid, {mode, 0});
    return [base, w](double t, int order) {
        cplx factor = std::sin(w * t + order * std::numbers::pi / 2.0);
        for (int j = 0; j < order; ++j) factor *= cplx(0.0, -w);
        return factor * base;
    };
}

Outcome reduce(const ExperimentConfig& c, Emitter& em) {
    const PrincipalSymbol p = catalog::make_principal(c.principal, c.dim);
    const TorusGrid grid(c.dim, c.points);
    const RootSplitting split = split_roots(p, samples_for(c), unit_sphere(c.dim, c.roots.angles), grid);

    std::vector<std::string> header = {"t", "x", "angle", "branch", "re_lambda", "im_lambda", "resid"};
    if (c.dim == 2) header.insert(header.begin() + 2, "y");
    Csv table(header);
    double worst_residual = 0.0;
    std::size_t degenerate = 0;
    for (const auto& s : split.samples) {
        if (std::isnan(s.residual))
            ++degenerate;
        else
            worst_residual = std::max(worst_residual, s.residual);
        for (std::size_t b = 0; b < s.lambda.size(); ++b) {
            table.cell(s.t).cell(s.x[0]);
            if (c.dim == 2) table.cell(s.x[1]);
            table.cell(s.angle).cell(b).cell(s.lambda[b].real()).cell(s.lambda[b].imag()).cell(s.residual).end_row();
        }
    }
    em.write("reduce.csv", table.text());

    Outcome o;
    o.summary["principal"] = p.name();
    o.summary["order"] = p.order();
    o.summary["samples"] = split.samples.size();
    o.summary["degenerate_samples"] = degenerate;
    o.summary["max_diagonalization_residual"] = json_number(worst_residual);
    ordered_json branches = ordered_json::array();
    for (const auto& b : split.branches) {
        ordered_json j;
        j["branch"] = b.branch;
        j["flag"] = to_string(b.flag);
        j["reconstruction_error"] = json_number(b.reconstruction_error);
        j["ellipticity_constant"] = b.ellipticity ? json_number(b.ellipticity->constant) : ordered_json(nullptr);
        branches.push_back(j);
    }
    o.summary["branches"] = branches;
    bool pass = degenerate == 0 && worst_residual <= c.reduce.max_residual;

    if (p.traits().path_independent) {
        const ConsistencyStudy study = reduction_convergence(p, grid, manufactured(grid, c.reduce.mode, c.horizon),
                                                             c.horizon, c.steps, c.reduce.levels);
        Csv cons({"steps", "max_original", "max_system", "discrepancy", "order"});
        for (std::size_t i = 0; i < study.rows.size(); ++i) {
            const auto& r = study.rows[i];
            const double order = i == 0 ? std::nan("") : study.orders[i - 1];
            cons.cell(r.steps).cell(r.max_original).cell(r.max_system).cell(r.discrepancy).cell(order).end_row();
        }
        em.write("reduce_consistency.csv", cons.text());
        const bool converges = study.min_order >= c.reduce.min_order;
        o.summary["consistency"] = {{"min_order", json_number(study.min_order)},
                                    {"required_order", json_number(c.reduce.min_order)},
                                    {"pass", converges}};
        pass = pass && converges;
    } else {
        o.summary["consistency"] = "skipped: path-dependent coefficients";
    }
    o.pass = pass;
    return o;
}

const char* trend(const std::vector<double>& v) {
    if (v.size() < 2) return "n/a";
    bool up = true, down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        up = up && v[i] >= v[i - 1];
        down = down && v[i] <= v[i - 1];
    }
    if (up && down) return "constant";
    return up ? "increasing" : down ? "decreasing" : "mixed";
}

OperatorFamily family_for(const catalog::SymbolSpec& spec, const ExperimentConfig& c, const TorusGrid& grid) {
    return OperatorFamily::from_symbol(catalog::make_symbol(spec, c.dim), grid);
}

Outcome carleman_scan(const ExperimentConfig& c, Emitter& em) {
    const TorusGrid grid(c.dim, c.points);
    const auto& k = c.carleman;
    CarlemanConfig base;
    base.grid = grid;
    base.steps = c.steps;
    base.paths = c.paths;
    base.seed = c.seed;
    base.process = k.process;
    ordered_json family;
    family["family"] = k.family;
    if (k.family == "reduction") {
        const PrincipalSymbol p = catalog::make_principal(c.principal, c.dim);
        const RootSplitting split = split_roots(p, samples_for(c), unit_sphere(c.dim, c.roots.angles), grid);
        if (k.branch >= split.branches.size())
            throw ConfigError("carleman.branch exceeds the number of root branches", "carleman.branch");
        const SplitRoot& b = split.branches[k.branch];
        base.a1 = OperatorFamily::from_symbol(b.a1, grid);
        base.b1 = OperatorFamily::from_symbol(b.b1, grid);
        family["principal"] = p.name();
        family["branch"] = k.branch;
        family["flag"] = to_string(b.flag);
    } else {
        base.a1 = family_for(k.a1, c, grid);
        base.b1 = family_for(k.b1, c, grid);
    }
    family["a1"] = base.a1.name();
    family["b1"] = base.b1.name();

    const bool raw_mu = !k.mu.empty();
    const ScanResult res = scan(raw_mu ? k.mu : k.kappa, k.horizons, base, !raw_mu);

    Csv csv({"mu", "T", "K", "P", "lhs", "rhs", "gap", "se", "verdict", "term1", "term2", "term3", "term4", "term5",
             "term6", "borderline"});
    ordered_json table = ordered_json::array();
    for (const auto& r : res.reports) {
        csv.cell(r.mu).cell(r.horizon).cell(r.steps).cell(r.paths).cell(r.lhs_mean).cell(r.rhs_mean).cell(r.gap);
        csv.cell(r.se).cell(r.verdict ? "pass" : "fail");
        for (double t : r.term_mean) csv.cell(t);
        csv.cell(r.borderline).end_row();

        ordered_json row;
        row["mu"] = json_number(r.mu);
        row["T"] = json_number(r.horizon);
        row["lhs"] = json_number(r.lhs_mean);
        row["lhs_se"] = json_number(r.lhs_se);
        row["rhs"] = json_number(r.rhs_mean);
        row["rhs_se"] = json_number(r.rhs_se);
        row["gap"] = json_number(r.gap);
        row["se"] = json_number(r.se);
        row["verdict"] = r.verdict ? "pass" : "fail";
        row["borderline"] = r.borderline;
        ordered_json terms;
        for (std::size_t i = 0; i < kCarlemanTerms; ++i)
            terms[kCarlemanTermNames[i]] = {{"mean", json_number(r.term_mean[i])}, {"se", json_number(r.term_se[i])}};
        row["terms"] = terms;
        table.push_back(row);
    }
    em.write("scan.csv", csv.text());

    if (k.dump_paths) {
        const TimeGrid tg(*std::max_element(k.horizons.begin(), k.horizons.end()), c.steps);
        Csv paths({"path_index", "k", "t", "w"});
        for (std::size_t p = 0; p < c.paths; ++p) {
            const BrownianPath w = sample_brownian(c.seed, p, tg);
            for (std::size_t i = 0; i < tg.nodes(); ++i) paths.cell(p).cell(i).cell(tg.node(i)).cell(w.values[i]).end_row();
        }
        em.write("paths.csv", paths.text());
    }

    // Trends over μ at each T (reports are T-major).
    const std::size_t n_mu = raw_mu ? k.mu.size() : k.kappa.size();
    ordered_json trends = ordered_json::array();
    for (std::size_t h = 0; h < k.horizons.size(); ++h) {
        std::vector<double> lhs, rhs, ratio;
        for (std::size_t i = 0; i < n_mu; ++i) {
            const auto& r = res.reports[h * n_mu + i];
            lhs.push_back(r.lhs_mean);
            rhs.push_back(r.rhs_mean);
            ratio.push_back(r.rhs_mean != 0.0 ? r.lhs_mean / r.rhs_mean : std::nan(""));
        }
        trends.push_back({{"T", json_number(k.horizons[h])},
                          {"lhs_in_mu", trend(lhs)},
                          {"rhs_in_mu", trend(rhs)},
                          {"lhs_over_rhs_in_mu", trend(ratio)}});
    }

    Outcome o;
    o.pass = res.passes > 0;
    o.summary["family"] = family;
    o.summary["mu_mode"] = raw_mu ? "mu" : "kappa / T^2";
    o.summary["cells"] = res.reports.size();
    o.summary["passes"] = res.passes;
    o.summary["largest_pass_T"] = res.largest_pass_horizon ? json_number(*res.largest_pass_horizon) : ordered_json(nullptr);
    o.summary["smallest_pass_mu"] = res.smallest_pass_mu ? json_number(*res.smallest_pass_mu) : ordered_json(nullptr);
    o.summary["trends"] = trends;
    o.summary["table"] = table;
    return o;
}

ordered_json base_report(const std::string& command) {
    ordered_json r;
    r["command"] = command;
    r["environment"] = environment_stamp();
    return r;
}

}  // namespace

RunResult run_failed(const std::string& subcommand, const Error& error, const fs::path& out_dir) {
    RunResult result;
    Emitter em(out_dir);
    result.report = base_report(subcommand);
    result.report["status"] = "error";
    result.report["exit_code"] = kExitError;
    result.report["error"] = error_record(error);
    em.write_json("report.json", result.report);
    write_manifest(em, 0, nullptr);
    result.exit_code = kExitError;
    result.files = em.files();
    return result;
}

RunResult run(const std::string& subcommand, ExperimentConfig config, const fs::path& out_dir) {
    std::string command;
    try {
        command = canonical_subcommand(subcommand);
        if (!config.command.empty() && config.command != command)
            throw ConfigError("config command '" + config.command + "' does not match subcommand '" + command + "'",
                              "command");
    } catch (const Error& e) {
        return run_failed(subcommand, e, out_dir);
    }
    config.command = command;
    const ordered_json echo = config_echo(config);

    Emitter em(out_dir);
    RunResult result;
    result.report = base_report(command);
    result.report["config"] = echo;
    try {
        Outcome o;
        if (command == "symbol-verify")
            o = symbol_verify(config, em);
        else if (command == "bounded-test")
            o = bounded_test(config, em);
        else if (command == "elliptic-parametrix")
            o = elliptic_parametrix(config, em);
        else if (command == "roots-check")
            o = roots_check(config, em);
        else if (command == "reduce")
            o = reduce(config, em);
        else
            o = carleman_scan(config, em);
        result.exit_code = o.pass ? kExitPass : kExitFail;
        result.report["status"] = o.pass ? "pass" : "fail";
        result.report["summary"] = o.summary;
    } catch (const Error& e) {
        result.exit_code = kExitError;
        result.report["status"] = "error";
        result.report["error"] = error_record(e);
    } catch (const std::exception& e) {
        result.exit_code = kExitError;
        result.report["status"] = "error";
        result.report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    }
    result.report["exit_code"] = result.exit_code;
    em.write_json("report.json", result.report);
    write_manifest(em, config.seed, echo);
    result.files = em.files();
    return result;
}

}  // namespace spdo
