#include <cmath>
#include <numbers>

#include "bandclt/combinatorics.hpp"
#include "bandclt/error.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/varengine.hpp"

namespace bandclt {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::InvalidArgument, "sigma must be positive and finite");
    }
}

// (phi(x) - phi(l)) / (x - l), switching to the midpoint expansion
// phi'(m) + h^2 phi'''(m) / 24 when the nodes nearly coincide.
double divided_difference(const TestFunction& phi, double x, double l, double threshold) {
    const double h = x - l;
    if (std::abs(h) < threshold) {
        const double m = 0.5 * (x + l);
        return phi.derivative(m) + h * h / 24.0 * phi.third_derivative(m);
    }
    return (phi.value(x) - phi.value(l)) / h;
}

// Kernel term on an N-node grid per axis with series order N. The x grid is
// Gauss-Chebyshev of the second kind, the y grid the staggered midpoint rule
// in the angle, and the lambda grid Gauss-Chebyshev of the first kind; for N
// even the x and y nodes never coincide. Since the kernel table is
// Ux diag(c_k) Uy^T, the double sum over (x_i, y_j) is evaluated as a sum
// over k of projected coefficients, which is the same number as tabulating
// f_kernel_series at every node pair.
double kernel_term_on_grid(const TestFunction& phi, double sigma, unsigned N, double threshold) {
    const double R = semicircle_radius(sigma);
    const double R2 = R * R;
    const unsigned K = N;
    const auto gamma = gamma_table(K + 1);
    const auto mult = kernel_series_multipliers(K);

    std::vector<double> lambda(N);
    for (unsigned l = 0; l < N; ++l) lambda[l] = R * std::cos((2.0 * l + 1.0) * kPi / (2.0 * N));

    std::vector<double> a(K + 1, 0.0), b(K + 1, 0.0);
    for (unsigned i = 1; i <= N; ++i) {
        const double th = i * kPi / (N + 1.0);
        const double st = std::sin(th);
        const double x = R * std::cos(th);
        double g = 0.0;
        for (double l : lambda) g += divided_difference(phi, x, l, threshold);
        g /= N;
        const double w = R2 * (kPi / (N + 1.0)) * st * st * g;
        for (unsigned k = 0; k <= K; ++k) a[k] += w * std::sin((k + 1) * th) / st;
    }
    for (unsigned j = 1; j <= N; ++j) {
        const double ps = (j - 0.5) * kPi / N;
        const double sp = std::sin(ps);
        const double v = R2 * (kPi / N) * sp * sp * phi.derivative(R * std::cos(ps));
        for (unsigned k = 0; k <= K; ++k) b[k] += v * std::sin((k + 1) * ps) / sp;
    }
    double sum = 0.0;
    for (unsigned k = 0; k <= K; ++k) sum += mult[k] * gamma[k] * a[k] * b[k];
    const double kernel_scale = kPi / (2.0 * sigma * sigma);
    return kernel_scale * sum / (4.0 * kPi * kPi * kPi);
}

}  // namespace

VarianceReport var_gauss(const TestFunction& phi, double sigma, const VarianceOptions& opt) {
    require_positive_sigma(sigma);
    if (opt.nodes < 8) throw Error(ErrorKind::InvalidArgument, "var_gauss needs at least 8 nodes");
    // Multiples of 4 keep both N and N/2 even, so x and y grids stay disjoint.
    const unsigned N = (opt.nodes + 3) / 4 * 4;
    const double threshold = opt.diag_threshold * sigma;
    const double fine = kernel_term_on_grid(phi, sigma, N, threshold);
    const double coarse = kernel_term_on_grid(phi, sigma, N / 2, threshold);
    VarianceReport rep;
    rep.kernel_term = fine;
    rep.kappa4_term = 0.0;
    rep.total = fine;
    rep.error_estimate = std::abs(fine - coarse);
    rep.method.series_order = N;
    rep.method.nodes = N;
    rep.method.diag_threshold = threshold;
    rep.method.grid = "x: Gauss-Chebyshev U; y: staggered angular midpoint; lambda: Gauss-Chebyshev T";
    if (!std::isfinite(fine) || rep.error_estimate > opt.tolerance * std::abs(fine) + 1e-14) {
        throw AccuracyError("var_gauss: node-halving difference " + std::to_string(rep.error_estimate) +
                                " exceeds the relative tolerance",
                            rep.error_estimate);
    }
    return rep;
}

double kappa4_integral(const TestFunction& phi, double sigma, unsigned nodes) {
    require_positive_sigma(sigma);
    const double R = semicircle_radius(sigma);
    const quad::Rule rule = quad::gauss_chebyshev_t(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double l = R * rule.nodes[i];
        sum += rule.weights[i] * phi.value(l) * (4.0 * sigma * sigma - l * l);
    }
    return sum;
}

VarianceReport var_band(const TestFunction& phi, double sigma, double kappa4, const VarianceOptions& opt) {
    VarianceReport rep = var_gauss(phi, sigma, opt);
    if (kappa4 != 0.0) {
        const double I = kappa4_integral(phi, sigma);
        const double s8 = std::pow(sigma, 8);
        rep.kappa4_term = kappa4 / (16.0 * kPi * kPi * s8) * I * I;
    }
    rep.total = rep.kernel_term + rep.kappa4_term;
    return rep;
}

double var_gauss_coefficient_form(const TestFunction& phi, double sigma, int K) {
    require_positive_sigma(sigma);
    if (K < 1) throw Error(ErrorKind::InvalidArgument, "coefficient form needs K >= 1");
    const double R = semicircle_radius(sigma);
    const std::size_t n = 4 * static_cast<std::size_t>(K) + 64;
    std::vector<double> f(n), alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = (2.0 * static_cast<double>(i) + 1.0) * kPi / (2.0 * static_cast<double>(n));
        f[i] = phi.value(R * std::cos(alpha[i]));
    }
    const auto gamma = gamma_table(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (int k = 1; k <= K; ++k) {
        double ak = 0.0;
        for (std::size_t i = 0; i < n; ++i) ak += f[i] * std::cos(k * alpha[i]);
        ak *= 2.0 / static_cast<double>(n);
        sum += k * ak * ak * gamma[static_cast<std::size_t>(k - 1)];
    }
    return 0.25 * sum;
}

}  // namespace bandclt
