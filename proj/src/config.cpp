#include "bandclt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bandclt/error.hpp"

namespace bandclt {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "n",    "b",         "sigma",   "topology", "dist",   "diag_dist",    "phi",
    "f",    "g",         "reps",    "seed",     "workers", "kappa4",      "t_grid",
    "b_list", "z",       "max_order", "variance_nodes", "calibration_batches",
    "calibration_quantile", "out",
};

std::uint64_t get_u64(const json& j, const std::string& field) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
        throw ValidationError(field, "field '" + field + "' must be a nonnegative integer");
    }
    if (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
        throw ValidationError(field, "field '" + field + "' must be a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

double get_double(const json& j, const std::string& field) {
    if (!j.is_number()) throw ValidationError(field, "field '" + field + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(field, "field '" + field + "' must be finite");
    return v;
}

std::vector<double> get_double_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field, "field '" + field + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(get_double(v, field));
    return out;
}

EntryDistribution parse_distribution(const json& j, double variance, const std::string& field) {
    std::string kind;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (key != "kind" && key != "atoms" && key != "weights" && key != "sigma5") {
                throw ValidationError(field + "." + key, "unknown key '" + key + "' in " + field);
            }
        }
        if (!j.contains("kind") || !j["kind"].is_string()) {
            throw ValidationError(field + ".kind", "field '" + field + ".kind' must be a string");
        }
        kind = j["kind"].get<std::string>();
    } else {
        throw ValidationError(field, "field '" + field + "' must be a string or an object");
    }
    EntryDistribution::Kind k;
    try {
        k = parse_distribution_kind(kind);
    } catch (const Error& e) {
        throw ValidationError(field, e.what());
    }
    switch (k) {
        case EntryDistribution::Kind::Gaussian: return EntryDistribution::gaussian(variance);
        case EntryDistribution::Kind::Uniform: return EntryDistribution::uniform(variance);
        case EntryDistribution::Kind::Rademacher: return EntryDistribution::rademacher(variance);
        case EntryDistribution::Kind::ShiftedCustom: break;
    }
    if (!j.is_object() || !j.contains("atoms") || !j.contains("weights")) {
        throw ValidationError(field, "custom distribution needs 'atoms' and 'weights'");
    }
    std::optional<double> sigma5;
    if (j.contains("sigma5")) sigma5 = get_double(j["sigma5"], field + ".sigma5");
    auto dist = EntryDistribution::custom(get_double_list(j["atoms"], field + ".atoms"),
                                          get_double_list(j["weights"], field + ".weights"), variance, sigma5);
    try {
        cumulants(dist);
    } catch (const Error& e) {
        throw ValidationError(field, e.what());
    }
    return dist;
}

}  // namespace

TestFunction parse_test_function(const json& j, const std::string& field) {
    try {
        if (j.is_array()) return TestFunction::polynomial(get_double_list(j, field));
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            if (s == "x") return TestFunction::identity();
            if (s.rfind("x^", 0) == 0) {
                std::size_t pos = 0;
                const int k = std::stoi(s.substr(2), &pos);
                if (pos != s.size() - 2 || k < 0 || k > 64) {
                    throw ValidationError(field, "bad monomial '" + s + "' in field '" + field + "'");
                }
                std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
                c.back() = 1.0;
                return TestFunction::polynomial(c);
            }
            return TestFunction::named(s);
        }
        if (j.is_object()) {
            for (const auto& [key, value] : j.items()) {
                if (key != "poly" && key != "name" && key != "scale") {
                    throw ValidationError(field + "." + key, "unknown key '" + key + "' in " + field);
                }
            }
            if (j.contains("poly")) return TestFunction::polynomial(get_double_list(j["poly"], field + ".poly"));
            if (j.contains("name") && j["name"].is_string()) {
                const double scale = j.contains("scale") ? get_double(j["scale"], field + ".scale") : 1.0;
                return TestFunction::named(j["name"].get<std::string>(), scale);
            }
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(field, "field '" + field + "': " + e.what());
    }
    throw ValidationError(field, "field '" + field + "' is not a recognized test function");
}

void validate_config(const RunConfig& cfg) {
    if (cfg.has_ensemble) {
        const auto& e = cfg.ensemble;
        if (e.n == 0) throw ValidationError("n", "n must be positive");
        if (e.band_radius > e.n / 2) throw ValidationError("b", "band_radius exceeds n/2");
        if (!(e.sigma >= 0.0)) throw ValidationError("sigma", "sigma must be nonnegative");
        for (std::size_t b : cfg.b_list) {
            if (b > e.n / 2) throw ValidationError("b_list", "band_radius exceeds n/2 in b_list");
        }
    }
    if (cfg.reps < 2) throw ValidationError("reps", "reps must be at least 2");
    if (cfg.workers < 1) throw ValidationError("workers", "workers must be at least 1");
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
        if (cfg.t_grid[i] < 0.0 || (i > 0 && cfg.t_grid[i] < cfg.t_grid[i - 1])) {
            throw ValidationError("t_grid", "t_grid must be sorted and nonnegative");
        }
    }
    if (cfg.z.imag() == 0.0) throw ValidationError("z", "z must have a nonzero imaginary part");
    if (cfg.variance_nodes < 8) throw ValidationError("variance_nodes", "variance_nodes must be at least 8");
    if (cfg.calibration_batches == 0) {
        throw ValidationError("calibration_batches", "calibration_batches must be positive");
    }
    if (!(cfg.calibration_quantile > 0.0 && cfg.calibration_quantile < 1.0)) {
        throw ValidationError("calibration_quantile", "calibration_quantile must lie in (0, 1)");
    }
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Parse, "configuration must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!kKnownKeys.count(key)) throw ValidationError(key, "unknown key '" + key + "'");
    }

    RunConfig cfg;
    if (j.contains("n") != j.contains("b")) {
        throw ValidationError(j.contains("n") ? "b" : "n", "n and b must be given together");
    }
    cfg.has_ensemble = j.contains("n");
    double sigma = 1.0;
    if (j.contains("sigma")) sigma = get_double(j["sigma"], "sigma");
    if (sigma < 0.0) throw ValidationError("sigma", "sigma must be nonnegative");
    if (j.contains("dist")) cfg.dist = j["dist"];
    if (j.contains("diag_dist")) cfg.diag_dist = j["diag_dist"];

    auto& e = cfg.ensemble;
    e.sigma = sigma;
    if (cfg.has_ensemble) {
        e.n = get_u64(j["n"], "n");
        e.band_radius = get_u64(j["b"], "b");
    }
    if (j.contains("topology")) {
        if (!j["topology"].is_string()) throw ValidationError("topology", "field 'topology' must be a string");
        try {
            e.topology = parse_topology(j["topology"].get<std::string>());
        } catch (const Error& err) {
            throw ValidationError("topology", err.what());
        }
    }
    e.offdiag = parse_distribution(cfg.dist, sigma * sigma, "dist");
    e.diag = cfg.diag_dist.is_null() ? e.offdiag.with_variance(2.0 * sigma * sigma)
                                     : parse_distribution(cfg.diag_dist, 2.0 * sigma * sigma, "diag_dist");
    if (j.contains("seed")) e.seed = get_u64(j["seed"], "seed");

    if (j.contains("phi")) cfg.phi_json = j["phi"];
    cfg.phi = parse_test_function(cfg.phi_json, "phi");
    cfg.f_json = j.contains("f") ? j["f"] : cfg.phi_json;
    cfg.f = parse_test_function(cfg.f_json, "f");
    cfg.g_json = j.contains("g") ? j["g"] : cfg.f_json;
    cfg.g = parse_test_function(cfg.g_json, "g");

    if (j.contains("reps")) cfg.reps = get_u64(j["reps"], "reps");
    if (j.contains("workers")) {
        const auto w = get_u64(j["workers"], "workers");
        if (w > 1024) throw ValidationError("workers", "workers must be at most 1024");
        cfg.workers = static_cast<int>(w);
    }
    if (j.contains("kappa4")) {
        cfg.kappa4 = get_double(j["kappa4"], "kappa4");
        cfg.kappa4_from_dist = false;
    } else {
        cfg.kappa4 = cumulants(e.offdiag).kappa4;
    }
    if (j.contains("t_grid")) cfg.t_grid = get_double_list(j["t_grid"], "t_grid");
    if (j.contains("b_list")) {
        if (!j["b_list"].is_array()) throw ValidationError("b_list", "field 'b_list' must be an array");
        for (const auto& v : j["b_list"]) cfg.b_list.push_back(get_u64(v, "b_list"));
    }
    if (cfg.b_list.empty() && cfg.has_ensemble) cfg.b_list = {e.band_radius};
    if (j.contains("z")) {
        const auto zz = get_double_list(j["z"], "z");
        if (zz.size() != 2) throw ValidationError("z", "field 'z' must be [re, im]");
        cfg.z = {zz[0], zz[1]};
    }
    if (j.contains("max_order")) cfg.max_order = static_cast<unsigned>(get_u64(j["max_order"], "max_order"));
    if (j.contains("variance_nodes")) {
        cfg.variance_nodes = static_cast<unsigned>(get_u64(j["variance_nodes"], "variance_nodes"));
    }
    if (j.contains("calibration_batches")) {
        cfg.calibration_batches = get_u64(j["calibration_batches"], "calibration_batches");
    }
    if (j.contains("calibration_quantile")) {
        cfg.calibration_quantile = get_double(j["calibration_quantile"], "calibration_quantile");
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) throw ValidationError("out", "field 'out' must be a string");
        cfg.out = j["out"].get<std::string>();
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

json to_json(const RunConfig& cfg) {
    json j;
    if (cfg.has_ensemble) {
        j["n"] = cfg.ensemble.n;
        j["b"] = cfg.ensemble.band_radius;
        j["b_list"] = cfg.b_list;
    }
    j["sigma"] = cfg.ensemble.sigma;
    j["topology"] = to_string(cfg.ensemble.topology);
    j["dist"] = cfg.dist;
    j["diag_dist"] = cfg.diag_dist;
    j["seed"] = cfg.ensemble.seed;
    j["phi"] = cfg.phi_json;
    j["f"] = cfg.f_json;
    j["g"] = cfg.g_json;
    j["reps"] = cfg.reps;
    j["workers"] = cfg.workers;
    j["kappa4"] = cfg.kappa4;
    j["t_grid"] = cfg.t_grid;
    j["z"] = {cfg.z.real(), cfg.z.imag()};
    j["max_order"] = cfg.max_order;
    j["variance_nodes"] = cfg.variance_nodes;
    j["calibration_batches"] = cfg.calibration_batches;
    j["calibration_quantile"] = cfg.calibration_quantile;
    j["out"] = cfg.out;
    return j;
}

}  // namespace bandclt
