#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandclt/ensemble.hpp"
#include "bandclt/spectral.hpp"
#include "bandclt/test_function.hpp"

namespace bandclt {

struct McConfig {
    EnsembleSpec ensemble;  // ensemble.seed is the master seed
    TestFunction phi = TestFunction::square();
    std::size_t replicates = 100;
    int workers = 1;
};

struct CltDiagnostics {
    std::size_t count = 0;
    double skew = 0.0;
    double exkurt = 0.0;
    double ks = 0.0;          // sup distance to the normal with fitted mean and variance
    double ks_pvalue = 1.0;   // Kolmogorov tail at sqrt(count) * ks; conservative with fitted parameters
    bool degenerate = false;  // constant samples: moments and KS are not computed
};

/// Requires at least 100 samples (InsufficientData otherwise).
CltDiagnostics clt_diagnostics(const std::vector<double>& samples);

struct McSummary {
    std::size_t n = 0;
    std::size_t b = 0;
    std::string phi;
    std::vector<double> values;  // normalized statistic per replicate; NaN where the replicate failed
    std::size_t failures = 0;
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n - 1 denominator) of the centered values
    double ci_low = 0.0;    // 95% chi-square interval for the variance
    double ci_high = 0.0;
    std::optional<CltDiagnostics> diagnostics;  // present with >= 100 successful replicates
};

/// Mean, variance and chi-square interval of the finite entries of `values`;
/// diagnostics are attached when there are enough of them.
McSummary summarize_values(std::vector<double> values);

/// Runs (b/n)^{1/2} sum phi(lambda_l) over independent replicates. Failed
/// eigensolves are counted; more than 1% failures raises ReplicateFailure.
McSummary run_linear_stat(const McConfig& cfg);

/// Eigenvalues of replicates 0..reps-1 (nullopt where the solver failed).
std::vector<std::optional<Spectrum>> collect_spectra(const EnsembleSpec& spec, std::size_t reps,
                                                     int workers = 1);

/// run_linear_stat on precomputed spectra, using the first `count` of them.
McSummary summarize_linear_stat(const std::vector<std::optional<Spectrum>>& spectra,
                                const EnsembleSpec& spec, const TestFunction& phi, std::size_t count);

struct BilinearEstimate {
    std::vector<double> values;  // per replicate
    std::size_t failures = 0;
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// n^{-1} sum over the band index set of f(M)_jk g(M)_jk, averaged over
/// replicates.
BilinearEstimate empirical_bilinear(const EnsembleSpec& spec, const TestFunction& f, const TestFunction& g,
                                    std::size_t reps, int workers = 1);

struct EmpiricalA {
    std::vector<double> t;
    std::vector<std::complex<double>> mean;                   // per t
    std::vector<std::vector<std::complex<double>>> per_rep;   // [replicate][t]
    std::size_t failures = 0;
};

/// A_n(t) = -(2 sigma^2 / n) * integral over (0, t) of the band sum of
/// U_jk(t1) phi'(M)_jk, by composite Gauss-Legendre with at least 64 panels
/// per unit t. t_grid must be sorted and nonnegative.
EmpiricalA empirical_a(const EnsembleSpec& spec, const TestFunction& phi, const std::vector<double>& t_grid,
                       std::size_t reps, int workers = 1);

struct SweepRow {
    std::size_t b = 0;
    McSummary summary;
};

/// run_linear_stat for each b with the same master seed, ordered by b.
std::vector<SweepRow> sweep_band_scaling(const McConfig& base, std::vector<std::size_t> b_list);

/// Exact-normal samples for calibration runs, addressed by (seed, batch).
std::vector<double> synthetic_normal(std::size_t count, std::uint64_t seed, std::uint64_t batch);

/// Quantile of the fitted-normal KS distance over `batches` synthetic
/// normal samples of the given size.
double calibrate_ks_threshold(std::size_t sample_size, std::size_t batches, double quantile,
                              std::uint64_t seed);

}  // namespace bandclt
