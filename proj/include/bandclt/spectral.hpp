#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandclt/ensemble.hpp"
#include "bandclt/test_function.hpp"

namespace bandclt {

struct Spectrum {
    Eigen::VectorXd eigenvalues;                  // ascending
    std::optional<Eigen::MatrixXd> eigenvectors;  // columns match eigenvalues

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Pins the BLAS backend to one thread; replicate-level parallelism is
/// handled by the caller. Safe to call repeatedly.
void set_blas_single_threaded();

/// Checks the BLAS matrix product against a plain product. Some OpenBLAS
/// builds pick a faulty dgemm kernel on recent AVX-512 CPUs; when the check
/// fails and OPENBLAS_CORETYPE is unset, this sets it to a known-good core
/// and re-executes the program with `argv`. Call at the top of main().
/// Throws NumericInput if the product is still wrong.
void ensure_blas_ok(char** argv);

/// True when BLAS dgemm agrees with a reference product on a few shapes.
bool blas_self_test();

/// Eigenvalues only. Throws NumericInput on non-finite entries and
/// ReplicateFailure if the solver does not converge.
Spectrum eigenvalues(const Eigen::MatrixXd& m);
Spectrum eigenvalues(const BandMatrix& m);

/// Eigenvalues and an orthogonal eigenvector matrix.
Spectrum eigen_decomposition(const Eigen::MatrixXd& m);
Spectrum eigen_decomposition(const BandMatrix& m);

/// Sum of phi over the eigenvalues, i.e. Tr phi(M).
double linear_statistic(const Spectrum& s, const TestFunction& phi);

/// Q f(Lambda) Q^T. Requires eigenvectors.
Eigen::MatrixXd matrix_function(const Spectrum& s, const std::function<double(double)>& f);
Eigen::MatrixXcd matrix_function_complex(const Spectrum& s,
                                         const std::function<std::complex<double>(double)>& f);

/// (z - M)^{-1} from the decomposition.
Eigen::MatrixXcd resolvent(const Spectrum& s, std::complex<double> z);

/// Orthogonal factor of the QR decomposition of an i.i.d. standard Gaussian
/// matrix, with column signs fixed so that R has a positive diagonal.
Eigen::MatrixXd haar_orthogonal(std::size_t n, std::uint64_t seed, std::uint64_t replicate);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& a);

/// Copy of `a` with entries at circular distance greater than b set to zero.
Eigen::MatrixXd periodic_band_part(const Eigen::MatrixXd& a, std::size_t b);

struct BandNormStats {
    std::size_t b = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> norms;  // per replicate
};

/// Operator norms of the banded part of random orthogonal matrices. The
/// same orthogonal matrix is reused for every b within a replicate.
std::vector<BandNormStats> banded_unitary_norm(std::size_t n, const std::vector<std::size_t>& b_list,
                                               std::size_t reps, std::uint64_t seed, int workers = 1);
BandNormStats banded_unitary_norm(std::size_t n, std::size_t b, std::size_t reps,
                                  std::uint64_t seed, int workers = 1);

/// Least-squares fit of mean norm = a + c ln(b + 1).
struct LogFit {
    double a = 0.0;
    double c = 0.0;
    double r2 = 0.0;
};
LogFit fit_log_trend(const std::vector<BandNormStats>& stats);

struct ResolventStats {
    double max_abs_mean = 0.0;
    std::size_t argmax_p = 0;
    std::size_t argmax_s = 0;
    std::size_t reps = 0;
    std::complex<double> z;
    std::optional<std::string> warning;
};

/// Max over p != s of |sample mean of R_ps(z)|, averaged over replicates
/// in index order.
ResolventStats resolvent_offdiag_mean(const EnsembleSpec& spec, std::complex<double> z,
                                      std::size_t reps, int workers = 1);

struct RadiusTail {
    double fraction = 0.0;  // share of replicates with ||M|| >= 10 sigma
    double max_norm = 0.0;
    std::size_t reps = 0;
};

RadiusTail spectral_radius_tail(const EnsembleSpec& spec, std::size_t reps, int workers = 1);
RadiusTail spectral_radius_tail(const std::vector<Spectrum>& spectra, double sigma);

}  // namespace bandclt
