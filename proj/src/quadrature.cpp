#include "bandclt/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bandclt/error.hpp"

namespace bandclt::quad {

double adaptive(const std::function<double(double)>& f, double a, double b, double tol, double* error,
                unsigned max_depth) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol, &err);
    if (error) *error = err;
    return v;
}

std::complex<double> adaptive_complex(const std::function<std::complex<double>(double)>& f, double a,
                                      double b, double tol, double* error, unsigned max_depth) {
    double err_re = 0.0, err_im = 0.0;
    const double re = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x) { return f(x).real(); }, a, b, max_depth, tol, &err_re);
    const double im = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x) { return f(x).imag(); }, a, b, max_depth, tol, &err_im);
    if (error) *error = std::hypot(err_re, err_im);
    return {re, im};
}

double gauss_legendre30(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

namespace {

template <unsigned N>
Rule expand_boost_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    // Boost stores the nonnegative half; the node at zero appears once.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(-x[i]);
        r.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(x[i]);
        r.weights.push_back(w[i]);
    }
    return r;
}

}  // namespace

Rule gauss_legendre(std::size_t order) {
    switch (order) {
        case 7: return expand_boost_rule<7>();
        case 10: return expand_boost_rule<10>();
        case 15: return expand_boost_rule<15>();
        case 20: return expand_boost_rule<20>();
        case 25: return expand_boost_rule<25>();
        case 30: return expand_boost_rule<30>();
        default:
            throw Error(ErrorKind::InvalidArgument,
                        "Gauss-Legendre order must be one of 7, 10, 15, 20, 25, 30");
    }
}

Rule gauss_chebyshev_u(std::size_t n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double h = std::numbers::pi / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = h * static_cast<double>(i + 1);
        const double s = std::sin(th);
        r.nodes[i] = std::cos(th);
        r.weights[i] = h * s * s;
    }
    return r;
}

Rule gauss_chebyshev_t(std::size_t n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.assign(n, std::numbers::pi / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        r.nodes[i] = std::cos((2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi /
                              (2.0 * static_cast<double>(n)));
    }
    return r;
}

Accelerated euler_average(std::vector<double> s, std::size_t levels) {
    if (s.size() < levels + 2) {
        throw AccuracyError("too few partial sums for the requested averaging depth", INFINITY);
    }
    double previous = s.back();
    for (std::size_t l = 0; l < levels; ++l) {
        previous = s.back();
        for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
        s.pop_back();
    }
    return {s.back(), std::abs(s.back() - previous)};
}

}  // namespace bandclt::quad
