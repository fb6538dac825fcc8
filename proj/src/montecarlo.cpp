#include "bandclt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "bandclt/error.hpp"
#include "bandclt/parallel.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/rng.hpp"

namespace bandclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_failures(std::size_t failures, std::size_t total) {
    if (total > 0 && failures * 100 > total) {
        throw Error(ErrorKind::ReplicateFailure,
                    std::to_string(failures) + " of " + std::to_string(total) +
                        " replicates failed (more than 1%)");
    }
}

// Runs body(r) for every replicate, recording ReplicateFailure errors
// instead of propagating them.
template <class Body>
std::vector<char> run_replicates(std::size_t reps, int workers, Body&& body) {
    std::vector<char> failed(reps, 0);
    parallel_for(reps, workers, [&](std::size_t r) {
        try {
            body(r);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ReplicateFailure) throw;
            failed[r] = 1;
        }
    });
    return failed;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_fitted_normal(std::vector<double> x, double mean, double sd) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = normal_cdf((x[i] - mean) / sd);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace

CltDiagnostics clt_diagnostics(const std::vector<double>& samples) {
    if (samples.size() < 100) {
        throw Error(ErrorKind::InsufficientData, "CLT diagnostics need at least 100 samples");
    }
    CltDiagnostics d;
    d.count = samples.size();
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) {
        d.degenerate = true;
        d.skew = d.exkurt = d.ks = kNaN;
        d.ks_pvalue = kNaN;
        return d;
    }
    d.skew = m3 / std::pow(m2, 1.5);
    d.exkurt = m4 / (m2 * m2) - 3.0;
    const double sd = std::sqrt(m2 * n / (n - 1.0));
    d.ks = ks_fitted_normal(samples, mean, sd);
    d.ks_pvalue = kolmogorov_tail(std::sqrt(n) * d.ks);
    return d;
}

McSummary summarize_values(std::vector<double> values) {
    McSummary s;
    std::vector<double> ok;
    for (double v : values) {
        if (std::isfinite(v)) ok.push_back(v);
    }
    s.failures = values.size() - ok.size();
    s.values = std::move(values);
    const double m = static_cast<double>(ok.size());
    if (ok.empty()) return s;
    s.mean = std::accumulate(ok.begin(), ok.end(), 0.0) / m;
    if (ok.size() >= 2) {
        double ss = 0.0;
        for (double v : ok) ss += (v - s.mean) * (v - s.mean);
        s.variance = ss / (m - 1.0);
        const boost::math::chi_squared chi(m - 1.0);
        s.ci_low = (m - 1.0) * s.variance / boost::math::quantile(chi, 0.975);
        s.ci_high = (m - 1.0) * s.variance / boost::math::quantile(chi, 0.025);
    }
    if (ok.size() >= 100) s.diagnostics = clt_diagnostics(ok);
    return s;
}

std::vector<std::optional<Spectrum>> collect_spectra(const EnsembleSpec& spec, std::size_t reps, int workers) {
    spec.validate();
    std::vector<std::optional<Spectrum>> out(reps);
    const auto failed = run_replicates(reps, workers, [&](std::size_t r) { out[r] = eigenvalues(sample(spec, r)); });
    (void)failed;
    return out;
}

McSummary summarize_linear_stat(const std::vector<std::optional<Spectrum>>& spectra, const EnsembleSpec& spec,
                                const TestFunction& phi, std::size_t count) {
    if (count > spectra.size()) throw Error(ErrorKind::InvalidArgument, "more replicates requested than computed");
    const double norm = std::sqrt(static_cast<double>(std::max<std::size_t>(spec.band_radius, 1)) /
                                  static_cast<double>(spec.n));
    std::vector<double> values(count, kNaN);
    for (std::size_t r = 0; r < count; ++r) {
        if (spectra[r]) values[r] = norm * linear_statistic(*spectra[r], phi);
    }
    McSummary s = summarize_values(std::move(values));
    check_failures(s.failures, count);
    s.n = spec.n;
    s.b = spec.band_radius;
    s.phi = phi.name();
    return s;
}

McSummary run_linear_stat(const McConfig& cfg) {
    if (cfg.replicates < 2) throw Error(ErrorKind::InvalidArgument, "at least 2 replicates are needed");
    return summarize_linear_stat(collect_spectra(cfg.ensemble, cfg.replicates, cfg.workers), cfg.ensemble,
                                 cfg.phi, cfg.replicates);
}

BilinearEstimate empirical_bilinear(const EnsembleSpec& spec, const TestFunction& f, const TestFunction& g,
                                    std::size_t reps, int workers) {
    spec.validate();
    if (reps < 2) throw Error(ErrorKind::InvalidArgument, "at least 2 replicates are needed");
    const Eigen::MatrixXd mask = band_mask(spec.n, spec.band_radius, spec.topology);
    BilinearEstimate est;
    est.values.assign(reps, kNaN);
    const auto failed = run_replicates(reps, workers, [&](std::size_t r) {
        const Spectrum s = eigen_decomposition(sample(spec, r));
        const Eigen::MatrixXd fm = matrix_function(s, [&](double x) { return f.value(x); });
        const Eigen::MatrixXd gm = matrix_function(s, [&](double x) { return g.value(x); });
        est.values[r] = mask.cwiseProduct(fm).cwiseProduct(gm).sum() / static_cast<double>(spec.n);
    });
    est.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
    check_failures(est.failures, reps);
    std::vector<double> ok;
    for (double v : est.values) {
        if (std::isfinite(v)) ok.push_back(v);
    }
    const double m = static_cast<double>(ok.size());
    est.mean = std::accumulate(ok.begin(), ok.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : ok) ss += (v - est.mean) * (v - est.mean);
    est.se = ok.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    est.ci_low = est.mean - 1.959963984540054 * est.se;
    est.ci_high = est.mean + 1.959963984540054 * est.se;
    return est;
}

EmpiricalA empirical_a(const EnsembleSpec& spec, const TestFunction& phi, const std::vector<double>& t_grid,
                       std::size_t reps, int workers) {
    spec.validate();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0) || (i > 0 && t_grid[i] < t_grid[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "t_grid must be sorted and nonnegative");
        }
    }
    const Eigen::MatrixXd mask = band_mask(spec.n, spec.band_radius, spec.topology);
    const quad::Rule gl = quad::gauss_legendre(7);
    const double prefactor = -2.0 * spec.sigma * spec.sigma / static_cast<double>(spec.n);

    EmpiricalA out;
    out.t = t_grid;
    out.per_rep.assign(reps, std::vector<std::complex<double>>(t_grid.size(), kNaN));
    const auto failed = run_replicates(reps, workers, [&](std::size_t r) {
        const Spectrum s = eigen_decomposition(sample(spec, r));
        const Eigen::MatrixXd& q = *s.eigenvectors;
        const Eigen::MatrixXd band = mask.cwiseProduct(matrix_function(s, [&](double x) { return phi.derivative(x); }));
        // Band sum of U_jk(t) phi'(M)_jk = sum_l h_l exp(i t lambda_l), h = diag(Q^T B Q).
        const Eigen::MatrixXd bq = band * q;
        const Eigen::VectorXd h = q.cwiseProduct(bq).colwise().sum().transpose();
        auto integrand = [&](double t1) {
            std::complex<double> acc = 0.0;
            for (Eigen::Index l = 0; l < h.size(); ++l) {
                const double a = t1 * s.eigenvalues(l);
                acc += h(l) * std::complex<double>(std::cos(a), std::sin(a));
            }
            return acc;
        };
        std::complex<double> integral = 0.0;
        double t_prev = 0.0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double span = t_grid[i] - t_prev;
            const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(64.0 * span)));
            const double width = span / static_cast<double>(panels);
            for (std::size_t p = 0; p < panels && span > 0.0; ++p) {
                const double mid = t_prev + (static_cast<double>(p) + 0.5) * width;
                for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                    integral += 0.5 * width * gl.weights[k] * integrand(mid + 0.5 * width * gl.nodes[k]);
                }
            }
            out.per_rep[r][i] = prefactor * integral;
            t_prev = t_grid[i];
        }
    });
    out.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
    check_failures(out.failures, reps);
    out.mean.assign(t_grid.size(), 0.0);
    const double ok = static_cast<double>(reps - out.failures);
    for (std::size_t r = 0; r < reps; ++r) {
        if (failed[r]) continue;
        for (std::size_t i = 0; i < t_grid.size(); ++i) out.mean[i] += out.per_rep[r][i] / ok;
    }
    return out;
}

std::vector<SweepRow> sweep_band_scaling(const McConfig& base, std::vector<std::size_t> b_list) {
    std::sort(b_list.begin(), b_list.end());
    b_list.erase(std::unique(b_list.begin(), b_list.end()), b_list.end());
    std::vector<SweepRow> rows;
    for (std::size_t b : b_list) {
        McConfig cfg = base;
        cfg.ensemble.band_radius = b;
        rows.push_back({b, run_linear_stat(cfg)});
    }
    return rows;
}

std::vector<double> synthetic_normal(std::size_t count, std::uint64_t seed, std::uint64_t batch) {
    const rng::Key key = rng::derive_key(seed, rng::Domain::SyntheticNormal);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = rng::standard_normal(rng::uniform_pair(key, static_cast<std::uint32_t>(i),
                                                        static_cast<std::uint32_t>(i >> 32), batch));
    }
    return out;
}

double calibrate_ks_threshold(std::size_t sample_size, std::size_t batches, double quantile, std::uint64_t seed) {
    if (batches == 0 || !(quantile > 0.0 && quantile < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "calibration needs batches > 0 and a quantile in (0, 1)");
    }
    std::vector<double> ks(batches);
    for (std::size_t b = 0; b < batches; ++b) ks[b] = clt_diagnostics(synthetic_normal(sample_size, seed, b)).ks;
    std::sort(ks.begin(), ks.end());
    const auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(batches))) - 1;
    return ks[std::min(idx, batches - 1)];
}

}  // namespace bandclt
