#include "spdo/config.hpp"
#include "spdo/errors.hpp"
#include "spdo/run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spdo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("test_config_out") / name;
    fs::remove_all(dir);
    return dir;
}

int error_line(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_key(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

std::string echo_to_text(const nlohmann::ordered_json& echo) {
    std::string out;
    for (const auto& [key, value] : echo.items()) {
        std::string v;
        if (value.is_string()) {
            v = value.get<std::string>();
        } else if (value.is_array()) {
            for (const auto& item : value) v += (v.empty() ? "" : ", ") + (item.is_string() ? item.get<std::string>() : item.dump());
        } else {
            v = value.dump();
        }
        out += key + " = " + v + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const auto c = parse_config_text("command = roots-check\nprincipal = wave\n");
    CHECK(c.command == "roots-check");
    CHECK(c.points == 128);
    CHECK(c.steps == 512);
    CHECK(c.paths == 256);
    CHECK(c.dim == 1);
    CHECK(c.principal.name == "wave");
}

TEST_CASE("comments, blank lines and aliases") {
    const auto c = parse_config_text("# heading\n\ncommand = parametrix-test   # alias\nsymbol = lambda\nsymbol.s = 2\n");
    CHECK(c.command == "elliptic-parametrix");
    CHECK(c.symbol.s == 2.0);
}

TEST_CASE("schema violations name the key and line") {
    CHECK(error_key("command = reduce\nT = -1\n") == "T");
    CHECK(error_line("command = reduce\nT = -1\n") == 2);
    CHECK(error_key("M = 128\nnot_a_key = 3\n") == "not_a_key");
    CHECK(error_line("M = 128\nnot_a_key = 3\n") == 2);
    CHECK(error_key("M = 100\n") == "M");
    CHECK(error_key("K = 8\n") == "K");
    CHECK(error_key("P = 0\n") == "P");
    CHECK(error_key("symbol = nonsense\n") == "symbol");
    CHECK(error_key("T = 1\nT = 2\n") == "T");
    CHECK(error_key("carleman.kappa = 64, -1\n") == "carleman.kappa");
    CHECK(error_key("roots.epsilon = abc\n") == "roots.epsilon");
    CHECK(error_key("seed = -4\n") == "seed");
    CHECK(error_line("\n\njust words\n") == 3);
    CHECK_THROWS_AS(parse_config("definitely/missing.cfg"), ConfigError);
}

TEST_CASE("echo round-trips after default filling") {
    const std::string text =
        "command = carleman-scan\nM = 64\nK = 256\nP = 32\nseed = 7\ncarleman.kappa = 64, 256\n"
        "carleman.T = 0.125, 0.25\ncarleman.a1 = transport\ncarleman.a1.scale = 0.5\nprocess.sigma = 0.1\n"
        "symbol.order = 1\nsymbol.integrability = inf\n";
    const auto c = parse_config_text(text);
    const auto echo = config_echo(c);
    CHECK(echo["M"] == 64);
    CHECK(echo["symbol.order"] == 1.0);
    CHECK(echo["symbol.integrability"] == "inf");
    const auto again = config_echo(parse_config_text(echo_to_text(echo)));
    CHECK(again == echo);
    CHECK(config_schema().size() == echo.size());
}

TEST_CASE("number formatting and digests") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(4.0) == "4");
    CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
    const fs::path dir = scratch("digest");
    fs::create_directories(dir);
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("roots-check on the wave symbol") {
    auto c = parse_config_text("command = roots-check\nprincipal = wave\nroots.epsilon = 1\n");
    const fs::path out = scratch("roots");
    const auto r = run("roots-check", c, out);
    CHECK(r.exit_code == kExitPass);
    const auto h = nlohmann::json::parse(slurp(out / "hypotheses.json"));
    CHECK(h["h1_margin"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(h["h2_margin"] == "inf");
    CHECK(h["h3_margin"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
    REQUIRE(r.files.size() == 3);
    CHECK(r.files.back() == "manifest.json");
}

TEST_CASE("manifest digests match emitted files") {
    auto c = parse_config_text("command = bounded-test\nsymbol = xi\nbounded.cutoffs = 16, 32\nbounded.trials = 4\n");
    const fs::path out = scratch("manifest");
    REQUIRE(run("bounded-test", c, out).exit_code == kExitPass);
    const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    REQUIRE(m["files"].size() == 2);
    for (const auto& f : m["files"]) CHECK(sha256_file(out / f["name"].get<std::string>()) == f["sha256"]);
    CHECK(m["seed"] == 0);
    CHECK(m.contains("timestamp"));
    auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK_FALSE(report.contains("timestamp"));
    CHECK(report["config"]["command"] == "bounded-test");
}

TEST_CASE("misdeclared symbol fails with exit 1") {
    auto c = parse_config_text("command = symbol-verify\nsymbol = xi_squared\nsymbol.order = 1\n");
    const auto r = run("symbol-verify", c, scratch("misdeclared"));
    CHECK(r.exit_code == kExitFail);
    CHECK(r.report["status"] == "fail");
}

TEST_CASE("module errors map to exit 2 with a record") {
    auto c = parse_config_text("symbol = variable_elliptic\nsymbol.base = 0\n");
    const fs::path out = scratch("not_elliptic");
    const auto r = run("elliptic-parametrix", c, out);
    CHECK(r.exit_code == kExitError);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["error"]["kind"] == "not_elliptic");
    CHECK(fs::exists(out / "manifest.json"));

    auto mismatch = parse_config_text("command = reduce\n");
    const auto m = run("roots-check", mismatch, scratch("mismatch"));
    CHECK(m.exit_code == kExitError);
    CHECK(m.report["error"]["key"] == "command");
}

TEST_CASE("repeated runs are byte-identical apart from the timestamp") {
    auto c = parse_config_text("command = reduce\nprincipal = cubic_mixed\nK = 64\n");
    const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
    const auto ra = run("reduce", c, a);
    const auto rb = run("reduce", c, b);
    CHECK(ra.exit_code == rb.exit_code);
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) {
        if (f == "manifest.json") continue;
        CHECK(slurp(a / f) == slurp(b / f));
    }
    auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
    auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
    ma.erase("timestamp");
    mb.erase("timestamp");
    CHECK(ma == mb);
}
