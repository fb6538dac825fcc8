#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bandclt/combinatorics.hpp"
#include "bandclt/error.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/varengine.hpp"

using namespace bandclt;

// Reference values below were computed independently with scipy/mpmath
// (Bessel functions, adaptive quadrature, oscillatory quadrature).

TEST_CASE("Chebyshev basis matches the trigonometric form") {
    const double sigma = 0.8;
    const double r = semicircle_radius(sigma);
    for (double th : {0.3, 1.1, 2.9}) {
        const double x = r * std::cos(th);
        const auto all = cheb_u_all(12, x, sigma);
        for (unsigned k = 0; k <= 12; ++k) {
            const double want = std::sin((k + 1) * th) / std::sin(th);
            CHECK(cheb_u(k, x, sigma) == doctest::Approx(want).epsilon(1e-12));
            CHECK(all[k] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("Chebyshev basis is orthonormal for the semicircle") {
    const double sigma = 1.3;
    const double r = semicircle_radius(sigma);
    const quad::Rule rule = quad::gauss_chebyshev_u(40);
    for (unsigned i = 0; i < 10; ++i) {
        for (unsigned j = 0; j < 10; ++j) {
            double s = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = r * rule.nodes[q];
                s += rule.weights[q] * r * semicircle_density(x, sigma) / std::sqrt(1.0 - rule.nodes[q] * rule.nodes[q]) *
                     cheb_u(i, x, sigma) * cheb_u(j, x, sigma);
            }
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("semicircle transform by three routes") {
    for (double t : {0.0, 1.0, 5.0, -2.5, 30.0}) {
        const double a = semicircle_transform(t, 1.0).real();
        CHECK(std::abs(semicircle_transform(t, 1.0).imag()) < 1e-15);
        CHECK(a == doctest::Approx(semicircle_transform_adaptive(t, 1.0)).epsilon(1e-10).scale(1.0));
        CHECK(a == doctest::Approx(semicircle_transform_bessel(t, 1.0)).epsilon(1e-10).scale(1.0));
    }
    CHECK(semicircle_transform_bessel(1.0, 1.0) == doctest::Approx(0.2829799868805425).epsilon(1e-13));
    CHECK(semicircle_transform(5.0, 1.0).real() == doctest::Approx(0.021893548253388965).epsilon(1e-11));
}

TEST_CASE("v * v convolution against its single-integral form") {
    CHECK(semicircle_convolution(0.3, 1.0) == doctest::Approx(0.2824001762632438).epsilon(1e-11));
    CHECK(semicircle_convolution_closed(0.3, 1.0) == doctest::Approx(0.2824001762632438).epsilon(1e-11));
    CHECK(semicircle_convolution(1.0, 1.0) == doctest::Approx(0.4795280821510106).epsilon(1e-11));
    CHECK(semicircle_convolution_closed(1.0, 1.0) == doctest::Approx(0.4795280821510106).epsilon(1e-11));
    for (double t : {0.1, 2.0, 4.5}) {
        CHECK(semicircle_convolution(t, 0.7) == doctest::Approx(semicircle_convolution_closed(t, 0.7)).epsilon(1e-9));
    }
}

TEST_CASE("Chebyshev coefficients of low-degree polynomials") {
    const double sigma = 1.5;
    const auto cx = cheb_coeffs(TestFunction::identity(), sigma, 6);
    CHECK(cx[1] == doctest::Approx(std::numbers::sqrt2 * sigma));
    const auto cx2 = cheb_coeffs(TestFunction::square(), sigma, 6);
    CHECK(cx2[0] == doctest::Approx(2 * sigma * sigma));
    CHECK(cx2[2] == doctest::Approx(2 * sigma * sigma));
    for (int k : {1, 3, 4, 5, 6}) CHECK(std::abs(cx2[static_cast<std::size_t>(k)]) < 1e-12);
}

TEST_CASE("coefficients of exp(itx) match quadrature") {
    const double sigma = 1.0, t = 1.7;
    const auto closed = cheb_coeffs_exp(t, sigma, 12);
    const auto re = cheb_coeffs([t](double x) { return std::cos(t * x); }, sigma, 12);
    const auto im = cheb_coeffs([t](double x) { return std::sin(t * x); }, sigma, 12);
    for (std::size_t k = 0; k <= 12; ++k) {
        CHECK(closed[k].real() == doctest::Approx(re[k]).scale(1.0).epsilon(1e-12));
        CHECK(closed[k].imag() == doctest::Approx(im[k]).scale(1.0).epsilon(1e-12));
    }
    const auto neg = cheb_coeffs_exp(-t, sigma, 4);
    for (std::size_t k = 0; k <= 4; ++k) CHECK(std::abs(neg[k] - std::conj(closed[k])) < 1e-14);
}

TEST_CASE("Parseval route: coefficient form equals the moment form for polynomials") {
    const std::vector<std::vector<double>> polys = {
        {1.0}, {0.0, 1.0}, {0.3, -1.0, 2.0}, {0.0, 0.0, 0.0, 1.0}, {1.0, -2.0, 0.5, 0.25, -0.1},
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0}, {0.2, 0.1, -0.3, 0.0, 0.4, -0.05, 0.01},
    };
    for (double sigma : {0.6, 1.0}) {
        for (const auto& p : polys) {
            for (const auto& q : polys) {
                const auto fp = TestFunction::polynomial(p);
                const auto fq = TestFunction::polynomial(q);
                const double coeff = bilinear_coefficient_form([&](double x) { return fp.value(x); },
                                                               [&](double x) { return fq.value(x); }, sigma, 12);
                const double moment = limit_bilinear_poly(p, q, sigma);
                CHECK(coeff == doctest::Approx(moment).epsilon(1e-8).scale(1.0));
            }
        }
    }
}

TEST_CASE("kernel series multipliers") {
    const auto w = kernel_series_multipliers(100);
    CHECK(w.size() == 101);
    for (std::size_t k = 0; k <= 50; ++k) CHECK(w[k] == 1.0);
    CHECK(w[100] == 0.0);
    for (std::size_t k = 51; k <= 100; ++k) CHECK(w[k] <= w[k - 1]);
}

TEST_CASE("kernel: series and integral routes") {
    const auto a = f_kernel_series(1.0, -1.0, 1.0);
    const auto b = f_kernel_integral(1.0, -1.0, 1.0);
    CHECK(a.value == doctest::Approx(0.17789088249742143).epsilon(1e-9));
    CHECK(b.value == doctest::Approx(0.17789088249742143).epsilon(1e-9));
    CHECK(f_kernel_integral(0.5, -1.2, 1.0).value == doctest::Approx(0.31744699017231594).epsilon(1e-9));
    for (auto [x, y, s] : {std::tuple{0.6, -0.4, 0.7}, std::tuple{-2.5, 2.6, 1.0}, std::tuple{2.0, 2.5, 1.0}}) {
        const double fs = f_kernel_series(x, y, s).value;
        CHECK(fs == doctest::Approx(f_kernel_integral(x, y, s).value).epsilon(1e-6));
        CHECK(fs == doctest::Approx(f_kernel_series(y, x, s).value).epsilon(1e-12));
    }
}

TEST_CASE("kernel argument errors") {
    try {
        f_kernel_series(0.4, 0.4, 1.0);
        FAIL("expected a singularity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::KernelSingularity);
    }
    CHECK_THROWS_AS(f_kernel_integral(0.4, 0.4, 1.0), Error);
    CHECK_THROWS_AS(f_kernel_series(3.0, 0.0, 1.0), Error);
    CHECK_THROWS_AS(f_kernel_series(0.1, 0.0, 0.0), Error);
}

TEST_CASE("Gaussian-part variance anchors") {
    const double vx = var_gauss(TestFunction::identity(), 1.0).total;
    CHECK(std::abs(vx - 2.0) <= 1e-6 * 2.0);
    CHECK(var_gauss(TestFunction::square(), 1.0).total == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(var_gauss(TestFunction::polynomial({0, 1, 0, 1}), 1.0).total == doctest::Approx(116.0).epsilon(1e-6));
    CHECK(var_gauss(TestFunction::named("tanh"), 1.0).total == doctest::Approx(0.4072192824467473).epsilon(1e-6));
    CHECK(var_gauss(TestFunction::constant(3.0), 1.0).total == doctest::Approx(0.0).scale(1.0));
    // sigma scaling: Var[x^2] = 8 sigma^4, Var[x] = 2 sigma^2
    CHECK(var_gauss(TestFunction::square(), 0.5).total == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(var_gauss(TestFunction::identity(), 2.0).total == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("variance: triple integral versus coefficient form") {
    for (const auto& phi : {TestFunction::named("tanh", 0.7), TestFunction::named("sin"),
                            TestFunction::polynomial({0.0, -0.5, 0.3, 0.2})}) {
        const double tri = var_gauss(phi, 1.1).total;
        CHECK(tri == doctest::Approx(var_gauss_coefficient_form(phi, 1.1)).epsilon(1e-6));
    }
}

TEST_CASE("fourth-cumulant term") {
    CHECK(kappa4_integral(TestFunction::square(), 1.0) == doctest::Approx(-8.0 * std::numbers::pi).epsilon(1e-10));
    CHECK(std::abs(kappa4_integral(TestFunction::identity(), 1.0)) < 1e-12);
    const VarianceReport r = var_band(TestFunction::square(), 1.0, -1.2);
    CHECK(r.kappa4_term == doctest::Approx(-4.8).epsilon(1e-8));
    CHECK(r.total == doctest::Approx(3.2).epsilon(1e-6));
    CHECK(r.method.kernel == "chebyshev-series");
    CHECK(var_band(TestFunction::identity(), 1.0, -2.0).total == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("A(t) limit") {
    CHECK(a_limit(0.0, TestFunction::identity(), 1.0) == std::complex<double>(0.0, 0.0));
    const double want[] = {-0.9207117041100357, -1.4519635099975536, -1.4154989460905099};
    const double ts[] = {0.5, 1.0, 2.0};
    for (int i = 0; i < 3; ++i) {
        const auto a = a_limit(ts[i], TestFunction::identity(), 1.0);
        CHECK(a.real() == doctest::Approx(want[i]).epsilon(1e-10));
        CHECK(std::abs(a.imag()) < 1e-12);
    }
    const auto sq = a_limit(1.0, TestFunction::square(), 1.0);
    CHECK(std::abs(sq.real()) < 1e-12);
    CHECK(sq.imag() == doctest::Approx(-2.868080052477831).epsilon(1e-10));
}
