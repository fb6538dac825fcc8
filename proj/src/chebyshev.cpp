#include <cmath>
#include <numbers>

#include "bandclt/combinatorics.hpp"
#include "bandclt/error.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/varengine.hpp"

namespace bandclt {

namespace {

void require_positive_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::InvalidArgument, "sigma must be positive and finite");
    }
}

}  // namespace

double semicircle_radius(double sigma) { return 2.0 * std::numbers::sqrt2 * sigma; }

double cheb_u(unsigned k, double x, double sigma) {
    require_positive_sigma(sigma);
    const double u = x / (std::numbers::sqrt2 * sigma);
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = u;
    for (unsigned i = 1; i < k; ++i) {
        const double next = u * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> cheb_u_all(unsigned K, double x, double sigma) {
    require_positive_sigma(sigma);
    const double u = x / (std::numbers::sqrt2 * sigma);
    std::vector<double> out(K + 1);
    out[0] = 1.0;
    if (K >= 1) out[1] = u;
    for (unsigned i = 1; i < K; ++i) out[i + 1] = u * out[i] - out[i - 1];
    return out;
}

double semicircle_density(double x, double sigma) {
    require_positive_sigma(sigma);
    const double r2 = 8.0 * sigma * sigma;
    if (x * x >= r2) return 0.0;
    return std::sqrt(r2 - x * x) / (4.0 * std::numbers::pi * sigma * sigma);
}

std::complex<double> semicircle_transform(double t, double sigma) {
    require_positive_sigma(sigma);
    const double R = semicircle_radius(sigma);
    const auto n = static_cast<std::size_t>(std::ceil(R * std::abs(t))) + 40;
    const quad::Rule rule = quad::gauss_chebyshev_u(n);
    // rho(x) dx = (2 / pi) sqrt(1 - u^2) du with x = R u
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = t * R * rule.nodes[i];
        re += rule.weights[i] * std::cos(a);
        im += rule.weights[i] * std::sin(a);
    }
    const double c = 2.0 / std::numbers::pi;
    return {c * re, c * im};
}

double semicircle_transform_adaptive(double t, double sigma) {
    require_positive_sigma(sigma);
    const double R = semicircle_radius(sigma);
    return quad::adaptive([&](double x) { return std::cos(t * x) * semicircle_density(x, sigma); },
                          -R, R, 1e-14);
}

double semicircle_transform_bessel(double t, double sigma) {
    require_positive_sigma(sigma);
    const double a = std::abs(semicircle_radius(sigma) * t);
    if (a < 1e-8) return 1.0 - a * a / 8.0;
    return 2.0 * std::cyl_bessel_j(1.0, a) / a;
}

double semicircle_convolution(double t, double sigma) {
    if (t == 0.0) return 0.0;
    const double lo = std::min(0.0, t), hi = std::max(0.0, t);
    const double v = quad::adaptive(
        [&](double s) {
            return semicircle_transform_bessel(s, sigma) * semicircle_transform_bessel(t - s, sigma);
        },
        lo, hi, 1e-14);
    return t > 0.0 ? v : -v;
}

double semicircle_convolution_closed(double t, double sigma) {
    require_positive_sigma(sigma);
    const double R = semicircle_radius(sigma);
    const double s4 = sigma * sigma * sigma * sigma;
    // mu = R cos(a): mu sqrt(R^2 - mu^2) dmu = R^3 cos(a) sin^2(a) da
    const double v = quad::adaptive(
        [&](double a) {
            const double s = std::sin(a);
            return std::sin(t * R * std::cos(a)) * std::cos(a) * s * s;
        },
        0.0, std::numbers::pi, 1e-14);
    return R * R * R * v / (8.0 * std::numbers::pi * s4);
}

std::vector<double> cheb_coeffs(const std::function<double(double)>& f, double sigma, int K) {
    require_positive_sigma(sigma);
    if (K < 0) throw Error(ErrorKind::InvalidArgument, "cheb_coeffs: K must be nonnegative");
    const double R = semicircle_radius(sigma);
    const std::size_t n = 4 * static_cast<std::size_t>(K) + 64;
    const quad::Rule rule = quad::gauss_chebyshev_u(n);
    std::vector<double> out(static_cast<std::size_t>(K) + 1, 0.0);
    const double h = std::numbers::pi / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = h * static_cast<double>(i + 1);
        const double st = std::sin(th);
        const double w = rule.weights[i] * f(R * rule.nodes[i]) * 2.0 / std::numbers::pi;
        for (int k = 0; k <= K; ++k) {
            out[static_cast<std::size_t>(k)] += w * std::sin((k + 1) * th) / st;
        }
    }
    return out;
}

std::vector<double> cheb_coeffs(const TestFunction& f, double sigma, int K) {
    return cheb_coeffs([&](double x) { return f.value(x); }, sigma, K);
}

std::vector<std::complex<double>> cheb_coeffs_exp(double t, double sigma, int K) {
    require_positive_sigma(sigma);
    if (K < 0) throw Error(ErrorKind::InvalidArgument, "cheb_coeffs_exp: K must be nonnegative");
    std::vector<std::complex<double>> out(static_cast<std::size_t>(K) + 1, 0.0);
    const double a = semicircle_radius(sigma) * t;
    const double aa = std::abs(a);
    std::complex<double> ipow = 1.0;
    for (int k = 0; k <= K; ++k) {
        double ratio;  // J_{k+1}(a) / a
        if (aa < 1e-8) {
            ratio = k == 0 ? 0.5 : 0.0;
        } else {
            ratio = std::cyl_bessel_j(static_cast<double>(k + 1), aa) / aa;
            if (a < 0.0 && k % 2 == 1) ratio = -ratio;  // J_n(-a) = (-1)^n J_n(a)
        }
        out[static_cast<std::size_t>(k)] = 2.0 * ipow * static_cast<double>(k + 1) * ratio;
        ipow *= std::complex<double>(0.0, 1.0);
    }
    return out;
}

double bilinear_coefficient_form(const std::function<double(double)>& f,
                                 const std::function<double(double)>& g, double sigma, int K) {
    const auto fk = cheb_coeffs(f, sigma, K);
    const auto gk = cheb_coeffs(g, sigma, K);
    const auto gamma = gamma_table(static_cast<std::size_t>(K) + 1);
    double sum = 0.0;
    for (int k = 0; k <= K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        sum += fk[i] * gk[i] * gamma[i];
    }
    return sum;
}

}  // namespace bandclt
