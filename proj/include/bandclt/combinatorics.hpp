#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace bandclt {

/// (2s)! / (s! (s+1)!)
mpz_class catalan(unsigned s);

/// Probability that a sum of k independent uniforms on [-1/2, 1/2] lies in
/// [-1/2, 1/2], from the alternating Irwin-Hall sum. Cached; thread-safe.
mpq_class gamma_closed(unsigned k);

struct GammaQuadratureOptions {
    unsigned half_periods = 64;  // integration range [0, half_periods * pi]
    unsigned euler_levels = 20;  // averaging depth for odd powers
    double tolerance = 1e-10;    // required absolute error estimate
};

struct GammaQuadrature {
    double value = 0.0;
    double error = 0.0;
};

/// (2/pi) * integral over (0, inf) of (sin x / x)^(k+1), summed over
/// half-periods. Odd powers alternate and are accelerated by Euler
/// averaging; even powers get an asymptotic tail beyond the last
/// half-period. Throws AccuracyError when the estimate exceeds the tolerance.
GammaQuadrature gamma_quadrature_report(unsigned k, const GammaQuadratureOptions& options = {});
double gamma_quadrature(unsigned k, const GammaQuadratureOptions& options = {});

/// gamma_k as a double for k < count: exact values converted for small k,
/// quadrature beyond. Cached and extended on demand; thread-safe.
std::vector<double> gamma_table(std::size_t count);

struct GammaMonteCarlo {
    std::vector<double> estimate;  // index k = 0..max_k
    std::vector<double> se;
};

/// Fractions of `draws` running sums of uniforms on [-1/2, 1/2] that lie in
/// [-1/2, 1/2] after k terms. All k share the same draws.
GammaMonteCarlo gamma_monte_carlo(unsigned max_k, std::size_t draws, std::uint64_t seed);

/// Number of Dyck paths of length l + m with height k after l steps.
mpz_class dyck_count_at(unsigned l, unsigned m, unsigned k);

/// Every Dyck path of the given length as its height profile
/// s(0), ..., s(length). Odd length gives an empty list.
std::vector<std::vector<int>> dyck_enumerate(unsigned length);

struct MomentCoefficient {
    enum class Source { ClosedForm, DyckSum };
    unsigned l = 0;
    unsigned m = 0;
    mpq_class value;
    Source source = Source::ClosedForm;
};

/// C_{l,m} from the closed binomial form.
MomentCoefficient moment_coeff(unsigned l, unsigned m);

/// C_{l,m} as sum over k of dyck_count_at(l, m, k) * gamma_k.
MomentCoefficient moment_coeff_dyck(unsigned l, unsigned m);

/// Limit bilinear form of polynomials given by coefficients in x:
/// sum a_i b_j (sqrt 2 sigma)^(i+j) C_{i,j}, exact up to the final rounding.
double limit_bilinear_poly(const std::vector<double>& p, const std::vector<double>& q, double sigma);

/// Same form for polynomials given in the scaled variable u = x / (sqrt 2 sigma):
/// sum a_i b_j C_{i,j}.
mpq_class limit_bilinear_scaled(const std::vector<mpq_class>& p, const std::vector<mpq_class>& q);

/// Coefficients of the k-th rescaled Chebyshev polynomial of the second kind
/// in u = x / (sqrt 2 sigma): U_0 = 1, U_1 = u, U_{k+1} = u U_k - U_{k-1}.
std::vector<mpq_class> chebyshev_u_scaled(unsigned k);

}  // namespace bandclt
