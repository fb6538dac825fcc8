#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "bandclt/test_function.hpp"

namespace bandclt {

/// Edge of the semicircle support, 2 sqrt(2) sigma.
double semicircle_radius(double sigma);

/// Rescaled Chebyshev polynomial of the second kind, U_k(x / (2 sqrt 2 sigma))
/// in the standard normalization, via the three-term recurrence.
double cheb_u(unsigned k, double x, double sigma);

/// U_0(x), ..., U_K(x) in one pass.
std::vector<double> cheb_u_all(unsigned K, double x, double sigma);

struct ChebBasis {
    double sigma = 1.0;
    unsigned max_order = 0;

    double radius() const { return semicircle_radius(sigma); }
    double operator()(unsigned k, double x) const { return cheb_u(k, x, sigma); }
};

double semicircle_density(double x, double sigma);

/// v(t), integral of exp(i t y) against the semicircle density, by
/// Gauss-Chebyshev quadrature of the second kind.
std::complex<double> semicircle_transform(double t, double sigma);
/// Independent route: adaptive Gauss-Kronrod on the density directly.
double semicircle_transform_adaptive(double t, double sigma);
/// Closed form 2 J_1(R t) / (R t).
double semicircle_transform_bessel(double t, double sigma);

/// (v * v)(t) = integral over (0, t) of v(s) v(t - s) ds, by quadrature.
double semicircle_convolution(double t, double sigma);
/// The same quantity from its single-integral form
/// (1 / (8 pi sigma^4)) * integral of sin(t mu) mu sqrt(8 sigma^2 - mu^2) dmu.
double semicircle_convolution_closed(double t, double sigma);

/// f_k = integral of f U_k rho over the support, k = 0..K, using at least
/// 4K Gauss-Chebyshev nodes.
std::vector<double> cheb_coeffs(const std::function<double(double)>& f, double sigma, int K);
std::vector<double> cheb_coeffs(const TestFunction& f, double sigma, int K);

/// Coefficients of exp(i t x): 2 i^k (k + 1) J_{k+1}(R t) / (R t).
std::vector<std::complex<double>> cheb_coeffs_exp(double t, double sigma, int K);

/// sum over k of f_k g_k gamma_k, with coefficients from cheb_coeffs.
double bilinear_coefficient_form(const std::function<double(double)>& f,
                                 const std::function<double(double)>& g, double sigma, int K);

struct KernelValue {
    double value = 0.0;
    double error = 0.0;
    unsigned order = 0;
};

/// Summation multipliers for the kernel series: 1 for k <= K/2, then a
/// smooth roll-off reaching 0 at k = K.
std::vector<double> kernel_series_multipliers(unsigned K);

/// Two-point kernel from (pi / (2 sigma^2)) sum U_k(x) U_k(y) gamma_k, summed
/// with kernel_series_multipliers. The error estimate compares orders K/2,
/// 3K/4 and K. Throws KernelSingularity when |x - y| is below 1e-9 sigma and
/// InvalidArgument outside the open support.
KernelValue f_kernel_series(double x, double y, double sigma, unsigned K = 2000);

struct KernelIntegralOptions {
    unsigned half_periods = 64;
    unsigned euler_levels = 20;
    double tolerance = 1e-9;  // relative
};

/// Kernel from its oscillatory s-integral, with the leading sinc powers of
/// the integrand handled in closed form and the remainder summed over
/// half-periods with Euler averaging.
KernelValue f_kernel_integral(double x, double y, double sigma, const KernelIntegralOptions& options = {});

/// Integrand of the s-integral; finite at s = 0.
double f_kernel_integrand(double s, double x, double y, double sigma);

/// A(t) = -2 sigma^2 * integral over (0, t) of <exp(i t1 x), phi'> dt1 with the
/// bilinear form evaluated in Chebyshev coefficients.
std::complex<double> a_limit(double t, const TestFunction& phi, double sigma);

struct VarianceMethod {
    std::string kernel = "chebyshev-series";
    unsigned series_order = 0;
    unsigned nodes = 0;
    double diag_threshold = 0.0;
    std::string grid;
};

struct VarianceReport {
    double kernel_term = 0.0;
    double kappa4_term = 0.0;
    double total = 0.0;
    VarianceMethod method;
    double error_estimate = 0.0;
};

struct VarianceOptions {
    unsigned nodes = 200;         // per axis; the series order follows it
    double tolerance = 1e-6;      // relative, on the node-halving difference
    double diag_threshold = 1e-4; // in units of sigma
};

/// Gaussian-part limiting variance by triple quadrature.
VarianceReport var_gauss(const TestFunction& phi, double sigma, const VarianceOptions& options = {});

/// var_gauss plus the fourth-cumulant correction.
VarianceReport var_band(const TestFunction& phi, double sigma, double kappa4,
                        const VarianceOptions& options = {});

/// integral of phi(l) (4 sigma^2 - l^2) / sqrt(8 sigma^2 - l^2) over the support.
double kappa4_integral(const TestFunction& phi, double sigma, unsigned nodes = 400);

/// Independent route for the Gaussian part: (1/4) sum k a_k^2 gamma_{k-1}
/// with a_k the first-kind Chebyshev coefficients of phi on the support.
double var_gauss_coefficient_form(const TestFunction& phi, double sigma, int K = 200);

}  // namespace bandclt
