#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bandclt/commands.hpp"
#include "bandclt/config.hpp"
#include "bandclt/error.hpp"

using namespace bandclt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bandclt_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

int run(const std::string& sub, const fs::path& config, const fs::path& out, std::string* err = nullptr,
        std::optional<int> workers = std::nullopt) {
    cli::Invocation inv;
    inv.subcommand = sub;
    if (!config.empty()) inv.config_path = config.string();
    inv.out = out.string();
    inv.workers = workers;
    std::ostringstream e;
    const int rc = cli::dispatch(inv, e);
    if (err) *err = e.str();
    return rc;
}

void check_manifest(const fs::path& out) {
    const json m = json::parse(slurp(out / "manifest.json"));
    CHECK(m["version"] == cli::kToolVersion);
    CHECK(m.contains("started"));
    CHECK(m.contains("finished"));
    CHECK(m.contains("config"));
    CHECK(!m["outputs"].empty());
    for (const auto& o : m["outputs"]) {
        CHECK(o["sha256"] == cli::sha256_file((out / o["file"].get<std::string>()).string()));
    }
}

}  // namespace

TEST_CASE("minimal config resolves with defaults") {
    const RunConfig c = parse_config_text(
        R"({"n": 64, "b": 8, "sigma": 1.0, "dist": "uniform", "phi": "x^2", "reps": 50, "seed": 3})");
    CHECK(c.ensemble.n == 64);
    CHECK(c.ensemble.band_radius == 8);
    CHECK(c.ensemble.topology == Topology::Periodic);
    CHECK(c.ensemble.offdiag.kind == EntryDistribution::Kind::Uniform);
    CHECK(c.ensemble.diag.variance == 2.0);
    CHECK(c.kappa4 == doctest::Approx(-1.2));
    CHECK(c.workers == 1);
    CHECK(c.b_list == std::vector<std::size_t>{8});
    const json echoed = to_json(c);
    CHECK(echoed["topology"] == "periodic");
    CHECK(echoed["t_grid"].size() == 3);
    CHECK(echoed["phi"] == "x^2");
}

TEST_CASE("config validation errors name the field") {
    try {
        parse_config_text(R"({"n": 10, "b": 10})");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "b");
        CHECK(std::string(e.what()) == "band_radius exceeds n/2");
    }
    try {
        parse_config_text(R"({"n": 10, "b": 2, "bandwidth": 3})");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "bandwidth");
        CHECK(std::string(e.what()).find("bandwidth") != std::string::npos);
    }
    try {
        parse_config_text("{\"n\": 10,\n \"b\": }");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text(R"({"n": 10, "b": 2, "phi": "sinh"})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"n": 10, "b": 2, "reps": 1})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"n": -4, "b": 2})"), ValidationError);
    CHECK_THROWS_AS(parse_config_text(R"({"n": 10, "b": 2, "dist": {"kind": "custom", "atoms": [0, 1], "weights": [1, 1]}})"),
                    ValidationError);
}

TEST_CASE("test function specs") {
    CHECK(parse_test_function(json::array({1, 2, 3}), "phi").coefficients() == std::vector<double>{1, 2, 3});
    CHECK(parse_test_function("x^3", "phi").degree() == 3);
    CHECK(parse_test_function("x", "phi").degree() == 1);
    CHECK_FALSE(parse_test_function(json{{"name", "tanh"}, {"scale", 2.0}}, "phi").is_polynomial());
    CHECK(parse_test_function(json{{"poly", {0, 1}}}, "phi").degree() == 1);
}

TEST_CASE("moments writes gamma and moment tables") {
    const fs::path dir = scratch_dir("moments");
    cli::Invocation inv{"moments", std::nullopt, (dir / "out").string(), std::nullopt, std::nullopt, std::nullopt, 10u};
    std::ostringstream err;
    REQUIRE(cli::dispatch(inv, err) == 0);
    const std::string g = slurp(dir / "out" / "gamma.csv");
    CHECK(g.rfind("k,gamma_num,gamma_den,gamma_float\n0,1,1,1\n1,1,1,1\n2,3,4,0.75\n", 0) == 0);
    const std::string c = slurp(dir / "out" / "moments.csv");
    CHECK(c.rfind("l,m,c_num,c_den,c_float\n", 0) == 0);
    CHECK(c.find("\n2,2,7,4,1.75\n") != std::string::npos);
    check_manifest(dir / "out");
}

TEST_CASE("analytic-var reports the x^2 anchor") {
    const fs::path dir = scratch_dir("analytic");
    const fs::path cfg = write_config(dir, R"({"sigma": 1.0, "phi": "x^2", "kappa4": 0})");
    REQUIRE(run("analytic-var", cfg, dir / "out") == 0);
    const json r = json::parse(slurp(dir / "out" / "variance.json"));
    CHECK(std::abs(r["total"].get<double>() - 8.0) <= 1e-3);
    CHECK(r["method"]["kernel"] == "chebyshev-series");
    for (const char* key : {"kernel_term", "kappa4_term", "total", "error_estimate"}) CHECK(r.contains(key));
    check_manifest(dir / "out");
}

TEST_CASE("simulate is byte-for-byte reproducible across runs and worker counts") {
    const fs::path dir = scratch_dir("simulate");
    const fs::path cfg = write_config(
        dir, R"({"n": 64, "b": 8, "sigma": 1, "dist": "gaussian", "phi": "x^2", "reps": 12, "seed": 17})");
    REQUIRE(run("simulate", cfg, dir / "a") == 0);
    REQUIRE(run("simulate", cfg, dir / "b") == 0);
    REQUIRE(run("simulate", cfg, dir / "c", nullptr, 4) == 0);
    const std::string a = slurp(dir / "a" / "replicates.csv");
    CHECK(a.rfind("replicate,value\n", 0) == 0);
    CHECK(a == slurp(dir / "b" / "replicates.csv"));
    CHECK(a == slurp(dir / "c" / "replicates.csv"));
    CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "c" / "summary.json"));
    const json s = json::parse(slurp(dir / "a" / "summary.json"));
    for (const char* key : {"n", "b", "phi", "variance", "ci_low", "ci_high", "skew", "exkurt", "ks", "failures"}) {
        CHECK(s.contains(key));
    }
    check_manifest(dir / "a");
}

TEST_CASE("failures emit error JSON and leave no outputs") {
    const fs::path dir = scratch_dir("failure");
    const fs::path cfg = write_config(dir, R"({"n": 10, "b": 10})");
    std::string err;
    CHECK(run("simulate", cfg, dir / "out", &err) == 1);
    const json e = json::parse(err);
    CHECK(e["error"]["kind"] == "validation");
    CHECK(e["error"]["field"] == "b");
    CHECK(e["error"]["message"] == "band_radius exceeds n/2");
    CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));

    // analytic-var without sigma > 0 fails after parsing.
    const fs::path cfg2 = write_config(dir, R"({"sigma": 0.0})");
    CHECK(run("analytic-var", cfg2, dir / "out2", &err) == 1);
    CHECK(json::parse(err)["error"]["field"] == "sigma");
    CHECK(run("no-such-command", {}, dir / "out3", &err) == 1);
}

TEST_CASE("other subcommands produce their artifacts") {
    const fs::path dir = scratch_dir("others");
    const fs::path cfg = write_config(dir, R"({"n": 48, "b": 6, "phi": "x", "reps": 4, "seed": 2,
        "b_list": [2, 4, 8], "t_grid": [0.0, 0.5], "max_order": 8})");
    const std::vector<std::pair<std::string, std::string>> expect = {
        {"bilinear", "summary.json"}, {"empirical-a", "replicates.csv"}, {"sweep", "sweep.csv"},
        {"band-norm", "band_norm.csv"}, {"resolvent", "resolvent.csv"}, {"gamma", "gamma.csv"},
    };
    for (const auto& [sub, file] : expect) {
        std::string err;
        const int rc = run(sub, cfg, dir / sub, &err);
        INFO(sub, ": ", err);
        CHECK(rc == 0);
        CHECK(fs::exists(dir / sub / file));
        check_manifest(dir / sub);
    }
    CHECK(slurp(dir / "empirical-a" / "replicates.csv").rfind("replicate,t,value_re,value_im\n", 0) == 0);
}

TEST_CASE("the executable reports errors as JSON with a nonzero exit status") {
    const fs::path dir = scratch_dir("exe");
    const fs::path cfg = write_config(dir, R"({"n": 10, "b": 2, "bandwidth": 3})");
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(BANDCLT_CLI_PATH) + " simulate --config " + cfg.string() + " --out " +
                            (dir / "out").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CHECK(status != 0);
    const json e = json::parse(slurp(err));
    CHECK(e["error"]["field"] == "bandwidth");

    const std::string ok = std::string(BANDCLT_CLI_PATH) + " moments --max-order 4 --out " + (dir / "m").string();
    CHECK(std::system(ok.c_str()) == 0);
    CHECK(fs::exists(dir / "m" / "manifest.json"));
}
