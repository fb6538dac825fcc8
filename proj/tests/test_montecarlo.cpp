#include <doctest.h>

#include <cmath>

#include "bandclt/error.hpp"
#include "bandclt/montecarlo.hpp"
#include "bandclt/varengine.hpp"

using namespace bandclt;

TEST_CASE("synthetic normal calibration of the diagnostics") {
    const auto x = synthetic_normal(100000, 5, 0);
    const CltDiagnostics d = clt_diagnostics(x);
    CHECK(std::abs(d.skew) < 0.05);
    CHECK(std::abs(d.exkurt) < 0.1);
    CHECK(d.ks < 0.01);
    CHECK(synthetic_normal(10, 5, 0) == std::vector<double>(x.begin(), x.begin() + 10));
    CHECK(synthetic_normal(10, 5, 1) != std::vector<double>(x.begin(), x.begin() + 10));
}

TEST_CASE("diagnostics input checks") {
    CHECK_THROWS_AS(clt_diagnostics(std::vector<double>(99, 1.0)), Error);
    const CltDiagnostics d = clt_diagnostics(std::vector<double>(150, 2.5));
    CHECK(d.degenerate);
}

TEST_CASE("KS threshold calibration is reproducible and plausible") {
    const double t = calibrate_ks_threshold(1000, 100, 0.95, 3);
    CHECK(t == calibrate_ks_threshold(1000, 100, 0.95, 3));
    // Lilliefors 95% point at n = 1000 is about 0.886 / sqrt(n) = 0.028.
    CHECK(t > 0.02);
    CHECK(t < 0.04);
}

TEST_CASE("chi-square interval covers the true variance about 95% of the time") {
    std::size_t covered = 0;
    const double v = 2.25;
    for (std::uint64_t batch = 0; batch < 100; ++batch) {
        auto x = synthetic_normal(200, 77, batch);
        for (double& e : x) e *= std::sqrt(v);
        const McSummary s = summarize_values(x);
        if (s.ci_low <= v && v <= s.ci_high) ++covered;
    }
    CHECK(covered >= 90);
}

TEST_CASE("constant test function has zero variance") {
    McConfig cfg{EnsembleSpec::make(40, 5, 1.0), TestFunction::constant(2.0), 10, 1};
    const McSummary s = run_linear_stat(cfg);
    CHECK(s.variance == 0.0);
    CHECK(s.failures == 0);
    for (double v : s.values) CHECK(v == s.values.front());
}

TEST_CASE("linear statistic results do not depend on the worker count") {
    McConfig cfg{EnsembleSpec::make(96, 12, 1.0, EntryDistribution::Kind::Rademacher, Topology::Periodic, 8),
                 TestFunction::named("tanh"), 24, 1};
    const McSummary a = run_linear_stat(cfg);
    for (int w : {4, 8}) {
        cfg.workers = w;
        const McSummary b = run_linear_stat(cfg);
        CHECK(a.values == b.values);
        CHECK(a.variance == b.variance);
    }
    CHECK(a.n == 96);
    CHECK(a.b == 12);
    CHECK_THROWS_AS(run_linear_stat({cfg.ensemble, cfg.phi, 1, 1}), Error);
}

TEST_CASE("finite-n variance of Tr M^2 for Gaussian entries") {
    // Var[(b/n)^{1/2} Tr M^2] = 8 sigma^4 (1 + 1/b) exactly for Gaussian entries.
    const std::size_t n = 128, b = 16;
    McConfig cfg{EnsembleSpec::make(n, b, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 31),
                 TestFunction::square(), 600, 1};
    const McSummary s = run_linear_stat(cfg);
    const double exact = 8.0 * (1.0 + 1.0 / static_cast<double>(b));
    CHECK(s.ci_low <= exact);
    CHECK(exact <= s.ci_high);
}

TEST_CASE("empirical bilinear form") {
    const auto spec = EnsembleSpec::make(60, 8, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 4);
    const auto one = empirical_bilinear(spec, TestFunction::constant(1.0), TestFunction::constant(1.0), 3);
    for (double v : one.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    const auto fg = empirical_bilinear(spec, TestFunction::named("tanh"), TestFunction::square(), 4);
    const auto gf = empirical_bilinear(spec, TestFunction::square(), TestFunction::named("tanh"), 4);
    for (std::size_t r = 0; r < 4; ++r) CHECK(std::abs(fg.values[r] - gf.values[r]) < 1e-12);
    // <x, x>_n is the band sum of M_jk^2 over n, with expectation 2 (1 + 1/b).
    const auto xx = empirical_bilinear(spec, TestFunction::identity(), TestFunction::identity(), 30);
    CHECK(xx.mean == doctest::Approx(2.25).epsilon(0.03));
}

TEST_CASE("empirical A(t)") {
    const auto spec = EnsembleSpec::make(128, 20, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 6);
    const EmpiricalA a = empirical_a(spec, TestFunction::identity(), {0.0, 0.5, 1.0}, 8, 2);
    CHECK(a.mean[0] == std::complex<double>(0.0, 0.0));
    const auto lim = a_limit(1.0, TestFunction::identity(), 1.0);
    CHECK(a.mean[2].real() == doctest::Approx(lim.real()).epsilon(0.1));
    const EmpiricalA b = empirical_a(spec, TestFunction::identity(), {0.0, 0.5, 1.0}, 8, 1);
    CHECK(a.per_rep == b.per_rep);
    CHECK_THROWS_AS(empirical_a(spec, TestFunction::identity(), {1.0, 0.5}, 2), Error);
}

TEST_CASE("sweep is ordered by b and matches single runs") {
    McConfig base{EnsembleSpec::make(64, 4, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 12),
                  TestFunction::square(), 10, 1};
    const auto rows = sweep_band_scaling(base, {16, 4, 8});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].b == 4);
    CHECK(rows[1].b == 8);
    CHECK(rows[2].b == 16);
    CHECK(rows[0].summary.values == run_linear_stat(base).values);
    const auto single = sweep_band_scaling(base, {4});
    CHECK(single.size() == 1);
    CHECK(single[0].summary.variance == run_linear_stat(base).variance);
}
