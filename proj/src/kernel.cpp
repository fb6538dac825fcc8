#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "bandclt/combinatorics.hpp"
#include "bandclt/error.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/varengine.hpp"

namespace bandclt {

namespace {

constexpr double kPi = std::numbers::pi;

void check_kernel_args(double x, double y, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::InvalidArgument, "sigma must be positive and finite");
    }
    const double R = semicircle_radius(sigma);
    if (!(std::abs(x) < R) || !(std::abs(y) < R)) {
        throw Error(ErrorKind::InvalidArgument, "kernel arguments must lie inside the open support");
    }
    if (std::abs(x - y) < 1e-9 * sigma) {
        throw Error(ErrorKind::KernelSingularity, "kernel is undefined on the diagonal x = y");
    }
}

double sinc(double s) { return s == 0.0 ? 1.0 : std::sin(s) / s; }

// Coefficients c_0..c_n of the power series in r of
// (r - r^3) / (d0 + d1 r + d2 r^2 + d3 r^3 + d4 r^4).
template <std::size_t N>
std::array<double, N> integrand_series(double x, double y, double sigma) {
    const double s2 = sigma * sigma;
    const std::array<double, 5> d{2.0 * s2, -x * y, x * x + y * y - 4.0 * s2, -x * y, 2.0 * s2};
    std::array<double, N> c{};
    for (std::size_t n = 0; n < N; ++n) {
        double num = n == 1 ? 1.0 : (n == 3 ? -1.0 : 0.0);
        for (std::size_t i = 1; i <= std::min<std::size_t>(n, 4); ++i) num -= d[i] * c[n - i];
        c[n] = num / d[0];
    }
    return c;
}

}  // namespace

std::vector<double> kernel_series_multipliers(unsigned K) {
    // 1 up to K/2, then an infinitely differentiable roll-off to 0 at K. With
    // a smooth amplitude gamma_k the tail error then decays faster than any
    // power of K |x - y| instead of like 1 / (K |x - y|^2) for Cesaro means.
    std::vector<double> w(K + 1);
    for (unsigned k = 0; k <= K; ++k) {
        const double u = 2.0 * k / K - 1.0;
        if (u <= 0.0) {
            w[k] = 1.0;
        } else if (u >= 1.0) {
            w[k] = 0.0;
        } else {
            w[k] = 1.0 / (1.0 + std::exp(1.0 / (1.0 - u) - 1.0 / u));
        }
    }
    return w;
}

namespace {

double tapered_sum(const std::vector<double>& terms, unsigned K) {
    const auto w = kernel_series_multipliers(K);
    double s = 0.0;
    for (unsigned k = 0; k <= K; ++k) s += w[k] * terms[k];
    return s;
}

}  // namespace

KernelValue f_kernel_series(double x, double y, double sigma, unsigned K) {
    check_kernel_args(x, y, sigma);
    if (K < 8) throw Error(ErrorKind::InvalidArgument, "kernel series order must be at least 8");
    const double R = semicircle_radius(sigma);
    const double th = std::acos(x / R);
    const double ps = std::acos(y / R);
    const auto gamma = gamma_table(K + 1);
    std::vector<double> terms(K + 1);
    for (unsigned k = 0; k <= K; ++k) {
        terms[k] = gamma[k] * std::sin((k + 1) * th) * std::sin((k + 1) * ps);
    }
    const double full = tapered_sum(terms, K);
    const double half = tapered_sum(terms, K / 2);
    const double three_quarter = tapered_sum(terms, 3 * K / 4);
    const double scale = kPi / (2.0 * sigma * sigma) / (std::sin(th) * std::sin(ps));
    KernelValue out;
    out.value = scale * full;
    out.error = std::abs(scale) * 2.0 * std::max(std::abs(full - half), std::abs(full - three_quarter));
    out.order = K;
    return out;
}

double f_kernel_integrand(double s, double x, double y, double sigma) {
    const double r = sinc(s);
    const double r2 = r * r;
    const double s2 = sigma * sigma;
    const double d = 2.0 * s2 * (1.0 - r2) * (1.0 - r2) - x * y * r * (1.0 + r2) + r2 * (x * x + y * y);
    const double num = r * (1.0 - r2);
    if (num == 0.0) return 0.0;
    return num / d;
}

KernelValue f_kernel_integral(double x, double y, double sigma, const KernelIntegralOptions& opt) {
    check_kernel_args(x, y, sigma);
    if (opt.half_periods < opt.euler_levels + 2) {
        throw AccuracyError("f_kernel_integral: half_periods must exceed euler_levels + 1", INFINITY);
    }
    // G = sum c_j r^j; the first four powers of sinc integrate in closed form
    // over the real line (pi, pi, 3 pi / 4, 2 pi / 3), and the remainder
    // decays like s^-5.
    const auto c = integrand_series<5>(x, y, sigma);
    auto remainder = [&](double s) {
        const double r = sinc(s);
        const double poly = r * (c[1] + r * (c[2] + r * (c[3] + r * c[4])));
        return f_kernel_integrand(s, x, y, sigma) - poly;
    };
    const double closed = kPi * c[1] + kPi * c[2] + 0.75 * kPi * c[3] + 2.0 * kPi / 3.0 * c[4];

    std::vector<double> partial;
    partial.reserve(opt.half_periods);
    double acc = 0.0, quad_err = 0.0;
    constexpr unsigned kAdaptive = 4;  // the peak near s = 0 sharpens as x -> y
    for (unsigned m = 0; m < opt.half_periods; ++m) {
        if (m < kAdaptive) {
            double e = 0.0;
            acc += quad::adaptive(remainder, m * kPi, (m + 1) * kPi, 1e-12, &e, 15);
            quad_err += e;
        } else {
            acc += quad::gauss_legendre30(remainder, m * kPi, (m + 1) * kPi);
        }
        partial.push_back(acc);
    }
    const quad::Accelerated a = quad::euler_average(partial, opt.euler_levels);
    KernelValue out;
    out.value = 2.0 * a.value + closed;
    out.error = 2.0 * (a.error + quad_err);
    out.order = opt.half_periods;
    const double scale = std::max(std::abs(out.value), 1e-3 / (sigma * sigma));
    if (!std::isfinite(out.value) || out.error > opt.tolerance * scale) {
        std::string trace;
        for (std::size_t i = partial.size() >= 5 ? partial.size() - 5 : 0; i < partial.size(); ++i) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%s%.12g", trace.empty() ? "" : ", ", 2.0 * partial[i] + closed);
            trace += buf;
        }
        throw AccuracyError("f_kernel_integral did not converge; last partial sums: " + trace, out.error);
    }
    return out;
}

std::complex<double> a_limit(double t, const TestFunction& phi, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    if (t == 0.0) return 0.0;
    constexpr int kDeriv = 160;
    auto d = cheb_coeffs([&](double x) { return phi.derivative(x); }, sigma, kDeriv);
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, std::abs(v));
    while (d.size() > 1 && std::abs(d.back()) <= 1e-15 * dmax) d.pop_back();
    const auto gamma = gamma_table(d.size());
    const int K = std::min(static_cast<int>(d.size()) - 1,
                           static_cast<int>(std::ceil(semicircle_radius(sigma) * std::abs(t))) + 40);
    auto integrand = [&](double t1) {
        const auto ck = cheb_coeffs_exp(t1, sigma, K);
        std::complex<double> s = 0.0;
        for (int k = 0; k <= K; ++k) {
            const auto i = static_cast<std::size_t>(k);
            s += ck[i] * d[i] * gamma[i];
        }
        return s;
    };
    const double lo = std::min(0.0, t), hi = std::max(0.0, t);
    std::complex<double> integral = quad::adaptive_complex(integrand, lo, hi, 1e-13);
    if (t < 0.0) integral = -integral;
    return -2.0 * sigma * sigma * integral;
}

}  // namespace bandclt
