#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace bandclt::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Adaptive Gauss-Kronrod (15 points) on [a, b]. `error` receives the
/// estimated absolute error when non-null.
double adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                double* error = nullptr, unsigned max_depth = 20);
std::complex<double> adaptive_complex(const std::function<std::complex<double>(double)>& f, double a,
                                      double b, double tol = 1e-12, double* error = nullptr,
                                      unsigned max_depth = 20);

/// Fixed 30-point Gauss-Legendre on [a, b].
double gauss_legendre30(const std::function<double(double)>& f, double a, double b);

/// Gauss-Legendre nodes and weights on [-1, 1]; order is one of 7, 10, 15,
/// 20, 25, 30.
Rule gauss_legendre(std::size_t order);

/// Rule for integral over (-1, 1) of f(u) sqrt(1 - u^2) du, exact for
/// polynomials of degree 2N - 1: nodes cos(i pi / (N + 1)).
Rule gauss_chebyshev_u(std::size_t n);

/// Rule for integral over (-1, 1) of f(u) / sqrt(1 - u^2) du:
/// nodes cos((2i - 1) pi / (2N)), weights pi / N.
Rule gauss_chebyshev_t(std::size_t n);

/// Repeated averaging of consecutive partial sums of an alternating
/// series (the Euler transform). Returns the final value and an error
/// estimate from the last two levels.
struct Accelerated {
    double value = 0.0;
    double error = 0.0;
};
Accelerated euler_average(std::vector<double> partial_sums, std::size_t levels);

}  // namespace bandclt::quad
