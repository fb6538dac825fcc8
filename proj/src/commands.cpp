#include "bandclt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <openssl/evp.h>

#include "bandclt/combinatorics.hpp"
#include "bandclt/config.hpp"
#include "bandclt/error.hpp"
#include "bandclt/montecarlo.hpp"
#include "bandclt/spectral.hpp"
#include "bandclt/varengine.hpp"

namespace bandclt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Collects the artifacts of one run so they can be digested or removed.
class OutputDir {
  public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
        const fs::path p = dir_ / name;
        files_.push_back(name);
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    json digests() const {
        json list = json::array();
        for (const auto& name : files_) {
            const fs::path p = dir_ / name;
            list.push_back({{"file", name}, {"sha256", sha256_file(p.string())}, {"bytes", fs::file_size(p)}});
        }
        return list;
    }

    void remove_all() noexcept {
        std::error_code ec;
        for (const auto& name : files_) fs::remove(dir_ / name, ec);
        files_.clear();
    }

  private:
    fs::path dir_;
    std::vector<std::string> files_;
};

const EnsembleSpec& require_ensemble(const RunConfig& cfg, const std::string& sub) {
    if (!cfg.has_ensemble) throw ValidationError("n", "fields 'n' and 'b' are required by " + sub);
    return cfg.ensemble;
}

std::string replicate_csv(const std::vector<double>& values) {
    std::string s = "replicate,value\n";
    for (std::size_t r = 0; r < values.size(); ++r) s += std::to_string(r) + "," + num(values[r]) + "\n";
    return s;
}

json summary_json(const McSummary& s, std::size_t reps) {
    json j{{"n", s.n},
           {"b", s.b},
           {"phi", s.phi},
           {"reps", reps},
           {"mean", finite_or_null(s.mean)},
           {"variance", s.variance},
           {"ci_low", s.ci_low},
           {"ci_high", s.ci_high},
           {"skew", nullptr},
           {"exkurt", nullptr},
           {"ks", nullptr},
           {"ks_pvalue", nullptr},
           {"failures", s.failures}};
    if (s.diagnostics && !s.diagnostics->degenerate) {
        j["skew"] = s.diagnostics->skew;
        j["exkurt"] = s.diagnostics->exkurt;
        j["ks"] = s.diagnostics->ks;
        j["ks_pvalue"] = s.diagnostics->ks_pvalue;
    }
    return j;
}

std::vector<Spectrum> successful(const std::vector<std::optional<Spectrum>>& spectra) {
    std::vector<Spectrum> out;
    for (const auto& s : spectra) {
        if (s) out.push_back(*s);
    }
    return out;
}

void cmd_simulate(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "simulate");
    const auto spectra = collect_spectra(spec, cfg.reps, cfg.workers);
    const McSummary s = summarize_linear_stat(spectra, spec, cfg.phi, cfg.reps);
    const RadiusTail tail = spectral_radius_tail(successful(spectra), spec.sigma);
    json j = summary_json(s, cfg.reps);
    j["radius_tail_fraction"] = tail.fraction;
    j["max_norm"] = tail.max_norm;
    out.write("replicates.csv", replicate_csv(s.values));
    out.write_json("summary.json", j);
}

void cmd_clt_check(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "clt-check");
    const McSummary s = run_linear_stat({spec, cfg.phi, cfg.reps, cfg.workers});
    std::vector<double> ok;
    for (double v : s.values) {
        if (std::isfinite(v)) ok.push_back(v);
    }
    const CltDiagnostics d = clt_diagnostics(ok);
    const double threshold =
        calibrate_ks_threshold(ok.size(), cfg.calibration_batches, cfg.calibration_quantile, spec.seed);
    json j = summary_json(s, cfg.reps);
    j["degenerate"] = d.degenerate;
    j["ks_threshold"] = threshold;
    j["calibration_batches"] = cfg.calibration_batches;
    j["calibration_quantile"] = cfg.calibration_quantile;
    j["skew_ok"] = !d.degenerate && std::abs(d.skew) <= 0.25;
    j["exkurt_ok"] = !d.degenerate && std::abs(d.exkurt) <= 0.5;
    j["ks_ok"] = !d.degenerate && d.ks < threshold;
    out.write("replicates.csv", replicate_csv(s.values));
    out.write_json("clt.json", j);
}

void cmd_bilinear(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "bilinear");
    const BilinearEstimate est = empirical_bilinear(spec, cfg.f, cfg.g, cfg.reps, cfg.workers);
    McSummary s = summarize_values(est.values);
    s.n = spec.n;
    s.b = spec.band_radius;
    s.phi = cfg.f.name() + "," + cfg.g.name();
    json j = summary_json(s, cfg.reps);
    j["f"] = cfg.f.name();
    j["g"] = cfg.g.name();
    j["se"] = est.se;
    j["mean_ci_low"] = est.ci_low;
    j["mean_ci_high"] = est.ci_high;
    if (spec.sigma > 0.0) {
        j["limit"] = cfg.f.is_polynomial() && cfg.g.is_polynomial()
                         ? limit_bilinear_poly(cfg.f.coefficients(), cfg.g.coefficients(), spec.sigma)
                         : bilinear_coefficient_form([&](double x) { return cfg.f.value(x); },
                                                     [&](double x) { return cfg.g.value(x); }, spec.sigma, 200);
    }
    out.write("replicates.csv", replicate_csv(est.values));
    out.write_json("summary.json", j);
}

void cmd_empirical_a(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "empirical-a");
    const EmpiricalA a = empirical_a(spec, cfg.phi, cfg.t_grid, cfg.reps, cfg.workers);
    std::string csv = "replicate,t,value_re,value_im\n";
    for (std::size_t r = 0; r < a.per_rep.size(); ++r) {
        for (std::size_t i = 0; i < a.t.size(); ++i) {
            csv += std::to_string(r) + "," + num(a.t[i]) + "," + num(a.per_rep[r][i].real()) + "," +
                   num(a.per_rep[r][i].imag()) + "\n";
        }
    }
    json rows = json::array();
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        json row{{"t", a.t[i]}, {"mean_re", a.mean[i].real()}, {"mean_im", a.mean[i].imag()}};
        if (spec.sigma > 0.0) {
            const auto lim = a_limit(a.t[i], cfg.phi, spec.sigma);
            row["limit_re"] = lim.real();
            row["limit_im"] = lim.imag();
        }
        rows.push_back(row);
    }
    json j{{"n", spec.n}, {"b", spec.band_radius}, {"phi", cfg.phi.name()}, {"reps", cfg.reps},
           {"failures", a.failures}, {"rows", rows}};
    out.write("replicates.csv", csv);
    out.write_json("summary.json", j);
}

void cmd_sweep(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "sweep");
    const auto rows = sweep_band_scaling({spec, cfg.phi, cfg.reps, cfg.workers}, cfg.b_list);
    std::string table = "b,variance,ci_low,ci_high,skew,exkurt,ks,failures\n";
    json jrows = json::array();
    for (const auto& row : rows) {
        const auto& d = row.summary.diagnostics;
        const bool diag = d && !d->degenerate;
        table += std::to_string(row.b) + "," + num(row.summary.variance) + "," + num(row.summary.ci_low) + "," +
                 num(row.summary.ci_high) + "," + (diag ? num(d->skew) : "") + "," + (diag ? num(d->exkurt) : "") +
                 "," + (diag ? num(d->ks) : "") + "," + std::to_string(row.summary.failures) + "\n";
        out.write("replicates_b" + std::to_string(row.b) + ".csv", replicate_csv(row.summary.values));
        jrows.push_back(summary_json(row.summary, cfg.reps));
    }
    out.write("sweep.csv", table);
    out.write_json("summary.json", json{{"n", spec.n}, {"phi", cfg.phi.name()}, {"rows", jrows}});
}

void cmd_analytic_var(const RunConfig& cfg, OutputDir& out) {
    const double sigma = cfg.ensemble.sigma;
    if (!(sigma > 0.0)) throw ValidationError("sigma", "analytic-var needs sigma > 0");
    VarianceOptions opt;
    opt.nodes = cfg.variance_nodes;
    const VarianceReport r = var_band(cfg.phi, sigma, cfg.kappa4, opt);
    json j{{"kernel_term", r.kernel_term},
           {"kappa4_term", r.kappa4_term},
           {"total", r.total},
           {"method",
            {{"kernel", r.method.kernel},
             {"series_order", r.method.series_order},
             {"nodes", r.method.nodes},
             {"diag_threshold", r.method.diag_threshold},
             {"grid", r.method.grid}}},
           {"error_estimate", r.error_estimate},
           {"phi", cfg.phi.name()},
           {"smoothness", cfg.phi.smoothness()},
           {"sigma", sigma},
           {"kappa4", cfg.kappa4}};
    out.write_json("variance.json", j);
}

std::string rational_row(const mpq_class& q) {
    return q.get_num().get_str() + "," + q.get_den().get_str() + "," + num(q.get_d());
}

void cmd_moments(const RunConfig& cfg, OutputDir& out) {
    std::string g = "k,gamma_num,gamma_den,gamma_float\n";
    for (unsigned k = 0; k <= cfg.max_order; ++k) g += std::to_string(k) + "," + rational_row(gamma_closed(k)) + "\n";
    std::string c = "l,m,c_num,c_den,c_float\n";
    for (unsigned l = 0; l <= cfg.max_order; ++l) {
        for (unsigned m = 0; l + m <= cfg.max_order; ++m) {
            c += std::to_string(l) + "," + std::to_string(m) + "," + rational_row(moment_coeff(l, m).value) + "\n";
        }
    }
    out.write("gamma.csv", g);
    out.write("moments.csv", c);
}

void cmd_gamma(const RunConfig& cfg, OutputDir& out) {
    std::string s = "k,gamma_num,gamma_den,gamma_float,gamma_quad,quad_error,abs_diff\n";
    for (unsigned k = 0; k <= cfg.max_order; ++k) {
        const mpq_class exact = gamma_closed(k);
        const GammaQuadrature q = gamma_quadrature_report(k);
        s += std::to_string(k) + "," + rational_row(exact) + "," + num(q.value) + "," + num(q.error) + "," +
             num(std::abs(q.value - exact.get_d())) + "\n";
    }
    out.write("gamma.csv", s);
}

void cmd_band_norm(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& spec = require_ensemble(cfg, "band-norm");
    const auto stats = banded_unitary_norm(spec.n, cfg.b_list, cfg.reps, spec.seed, cfg.workers);
    std::string csv = "b,replicate,norm\n";
    json rows = json::array();
    for (const auto& st : stats) {
        for (std::size_t r = 0; r < st.norms.size(); ++r) {
            csv += std::to_string(st.b) + "," + std::to_string(r) + "," + num(st.norms[r]) + "\n";
        }
        rows.push_back({{"b", st.b}, {"mean", st.mean}, {"sd", st.sd}, {"min", st.min}, {"max", st.max}});
    }
    json j{{"n", spec.n}, {"reps", cfg.reps}, {"rows", rows}};
    if (stats.size() >= 3) {
        const LogFit fit = fit_log_trend(stats);
        j["fit"] = {{"a", fit.a}, {"c", fit.c}, {"r2", fit.r2}};
    }
    out.write("band_norm.csv", csv);
    out.write_json("summary.json", j);
}

void cmd_resolvent(const RunConfig& cfg, OutputDir& out) {
    const EnsembleSpec& base = require_ensemble(cfg, "resolvent");
    std::string csv = "b,max_abs_mean,argmax_p,argmax_s\n";
    json rows = json::array();
    json warnings = json::array();
    for (std::size_t b : cfg.b_list) {
        EnsembleSpec spec = base;
        spec.band_radius = b;
        const ResolventStats st = resolvent_offdiag_mean(spec, cfg.z, cfg.reps, cfg.workers);
        csv += std::to_string(b) + "," + num(st.max_abs_mean) + "," + std::to_string(st.argmax_p) + "," +
               std::to_string(st.argmax_s) + "\n";
        rows.push_back({{"b", b}, {"max_abs_mean", st.max_abs_mean}, {"argmax_p", st.argmax_p},
                        {"argmax_s", st.argmax_s}});
        if (st.warning && warnings.empty()) warnings.push_back(*st.warning);
    }
    out.write("resolvent.csv", csv);
    out.write_json("summary.json", json{{"n", base.n},
                                        {"reps", cfg.reps},
                                        {"z_re", cfg.z.real()},
                                        {"z_im", cfg.z.imag()},
                                        {"rows", rows},
                                        {"warnings", warnings}});
}

using Command = std::function<void(const RunConfig&, OutputDir&)>;

const std::map<std::string, Command>& command_table() {
    static const std::map<std::string, Command> table = {
        {"simulate", cmd_simulate},       {"analytic-var", cmd_analytic_var}, {"moments", cmd_moments},
        {"gamma", cmd_gamma},             {"bilinear", cmd_bilinear},         {"empirical-a", cmd_empirical_a},
        {"sweep", cmd_sweep},             {"band-norm", cmd_band_norm},       {"resolvent", cmd_resolvent},
        {"clt-check", cmd_clt_check},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"simulate", "analytic-var", "moments",   "gamma",     "bilinear",
                                                   "empirical-a", "sweep",    "band-norm", "resolvent", "clt-check"};
    return names;
}

std::string error_json(const std::string& kind, const std::string& message, const std::optional<std::string>& field) {
    json e{{"kind", kind}, {"message", message}};
    if (field) e["field"] = *field;
    return json{{"error", e}}.dump();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

int dispatch(const Invocation& inv, std::ostream& err) {
    const auto it = command_table().find(inv.subcommand);
    if (it == command_table().end()) {
        err << error_json("invalid_argument", "unknown subcommand '" + inv.subcommand + "'") << "\n";
        return 1;
    }
    std::optional<OutputDir> out;
    try {
        const std::string started = utc_now();
        RunConfig cfg = inv.config_path ? parse_config(*inv.config_path) : RunConfig{};
        if (inv.seed) cfg.ensemble.seed = *inv.seed;
        if (inv.workers) cfg.workers = *inv.workers;
        if (inv.reps) cfg.reps = *inv.reps;
        if (inv.max_order) cfg.max_order = *inv.max_order;
        if (inv.out) cfg.out = *inv.out;
        validate_config(cfg);
        set_blas_single_threaded();

        out.emplace(cfg.out);
        it->second(cfg, *out);

        json manifest{{"tool", "bandclt"},
                      {"version", kToolVersion},
                      {"subcommand", inv.subcommand},
                      {"config", to_json(cfg)},
                      {"seed", cfg.ensemble.seed},
                      {"started", started},
                      {"finished", utc_now()},
                      {"outputs", out->digests()}};
        out->write_json("manifest.json", manifest);
        return 0;
    } catch (const ValidationError& e) {
        if (out) out->remove_all();
        err << error_json(to_string(e.kind()), e.what(), e.field()) << "\n";
    } catch (const Error& e) {
        if (out) out->remove_all();
        err << error_json(to_string(e.kind()), e.what()) << "\n";
    } catch (const std::exception& e) {
        if (out) out->remove_all();
        err << error_json("internal", e.what()) << "\n";
    }
    return 1;
}

}  // namespace bandclt::cli
