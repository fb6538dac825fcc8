#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bandclt/ensemble.hpp"
#include "bandclt/error.hpp"

using namespace bandclt;

TEST_CASE("band index set sizes") {
    CHECK(band_index_set(5, 2, Topology::Periodic).size() == 25);
    CHECK(band_index_set(6, 1, Topology::Periodic).size() == 18);
    CHECK(band_index_set(6, 1, Topology::Simple).size() == 16);
    CHECK(band_index_set(7, 0, Topology::Periodic).size() == 7);
}

TEST_CASE("band index set is symmetric and contains the diagonal") {
    for (auto topo : {Topology::Periodic, Topology::Simple}) {
        const auto set = band_index_set(11, 3, topo);
        const Eigen::MatrixXd mask = band_mask(11, 3, topo);
        CHECK(mask.sum() == doctest::Approx(static_cast<double>(set.size())));
        for (const auto& [j, k] : set) {
            CHECK(mask(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) == 1.0);
        }
        for (std::size_t j = 0; j < 11; ++j) CHECK(in_band(j, j, 11, 3, topo));
    }
}

TEST_CASE("invalid geometry is rejected") {
    CHECK_THROWS_AS(band_index_set(6, 4, Topology::Periodic), Error);
    CHECK_THROWS_AS(band_index_set(0, 0, Topology::Periodic), Error);
    auto spec = EnsembleSpec::make(10, 6, 1.0);
    try {
        spec.validate();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
        CHECK(std::string(e.what()) == "band_radius exceeds n/2");
    }
}

TEST_CASE("sampled matrices are symmetric and vanish off the band") {
    for (auto topo : {Topology::Periodic, Topology::Simple}) {
        for (std::size_t n : {1, 2, 7, 8, 33}) {
            for (std::size_t b : {std::size_t{0}, std::min<std::size_t>(1, n / 2), n / 2}) {
                auto spec = EnsembleSpec::make(n, b, 1.3, EntryDistribution::Kind::Uniform, topo, 5);
                const BandMatrix m = sample(spec, 2);
                for (std::size_t j = 0; j < n; ++j) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const auto jj = static_cast<Eigen::Index>(j), kk = static_cast<Eigen::Index>(k);
                        CHECK(m.values(jj, kk) == m.values(kk, jj));
                        if (!in_band(j, k, n, b, topo)) CHECK(m.values(jj, kk) == 0.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("b = 0 gives a diagonal matrix") {
    const BandMatrix m = sample(EnsembleSpec::make(4, 0, 1.0), 0);
    CHECK(m.values.diagonal().cwiseAbs().minCoeff() > 0.0);
    CHECK((m.values - Eigen::MatrixXd(m.values.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("sampling is a pure function of seed and replicate") {
    auto spec = EnsembleSpec::make(64, 8, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 99);
    const BandMatrix a = sample(spec, 3);
    const BandMatrix b = sample(spec, 3);
    CHECK(a.values == b.values);
    CHECK(a.values != sample(spec, 4).values);
    spec.seed = 100;
    CHECK(a.values != sample(spec, 3).values);
}

TEST_CASE("preset cumulants") {
    const Cumulants g = cumulants(EntryDistribution::gaussian(1.0));
    CHECK(g.variance == 1.0);
    CHECK(g.kappa3 == 0.0);
    CHECK(g.kappa4 == 0.0);
    CHECK(std::isfinite(g.sigma5));

    const Cumulants u = cumulants(EntryDistribution::uniform(1.0));
    CHECK(u.kappa4 == doctest::Approx(-1.2).epsilon(1e-15));

    const Cumulants r = cumulants(EntryDistribution::rademacher(1.0));
    CHECK(r.variance == 1.0);
    CHECK(r.kappa3 == 0.0);
    CHECK(r.kappa4 == -2.0);
    CHECK(r.sigma5 == 1.0);
}

TEST_CASE("custom law cumulants") {
    // Two atoms with equal weight are Rademacher after centering.
    const auto d = EntryDistribution::custom({3.0, 5.0}, {1.0, 1.0}, 1.0, 1.0);
    const Cumulants c = cumulants(d);
    CHECK(c.kappa3 == doctest::Approx(0.0));
    CHECK(c.kappa4 == doctest::Approx(-2.0));
    // Skewed law: P(X = 2) = 1/5, P(X = -1/2) = 4/5 has variance 1 and E X^3 = 1.5.
    const Cumulants s = cumulants(EntryDistribution::custom({2.0, -0.5}, {1.0, 4.0}, 1.0, 10.0));
    CHECK(s.kappa3 == doctest::Approx(1.5));
    CHECK(s.kappa4 == doctest::Approx(0.2 * 16 + 0.8 * 0.0625 - 3.0));

    CHECK_THROWS_AS(cumulants(EntryDistribution::custom({0.0, 1.0}, {1.0, 1.0}, 1.0, std::nullopt)), Error);
    CHECK_THROWS_AS(cumulants(EntryDistribution::custom({0.0, 1.0}, {1.0, 1.0}, 1.0, 0.5)), Error);
}

TEST_CASE("entry variance matches sigma^2 / b") {
    const std::size_t n = 1000, b = 100;
    auto spec = EnsembleSpec::make(n, b, 1.0, EntryDistribution::Kind::Gaussian, Topology::Periodic, 11);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const BandMatrix m = sample(spec, r);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t d = 1; d <= b; ++d) {
                const double x = m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>((j + d) % n));
                sum += static_cast<double>(b) * x * x;
                ++count;
            }
        }
    }
    CHECK(sum / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sample moments match declared cumulants within 4 standard errors") {
    using K = EntryDistribution::Kind;
    for (K kind : {K::Gaussian, K::Uniform, K::Rademacher}) {
        const std::size_t n = 400, b = 100;
        auto spec = EnsembleSpec::make(n, b, 1.0, kind, Topology::Periodic, 21);
        const Cumulants c = cumulants(spec.offdiag);
        std::vector<double> x2, x4;
        for (std::uint64_t r = 0; r < 10; ++r) {
            const BandMatrix m = sample(spec, r);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t d = 1; d <= b; ++d) {
                    if (2 * d == n && j >= n / 2) continue;
                    const double x = std::sqrt(static_cast<double>(b)) *
                                     m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>((j + d) % n));
                    x2.push_back(x * x);
                    x4.push_back(x * x * x * x);
                }
            }
        }
        auto mean_se = [](const std::vector<double>& v) {
            double m = 0.0, s = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            for (double x : v) s += (x - m) * (x - m);
            return std::pair{m, std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
        };
        const auto [m2, se2] = mean_se(x2);
        const auto [m4, se4] = mean_se(x4);
        CHECK(std::abs(m2 - c.variance) <= 4.0 * se2 + 1e-12);
        CHECK(std::abs(m4 - (c.kappa4 + 3.0 * c.variance * c.variance)) <= 4.0 * se4 + 1e-12);
    }
}

TEST_CASE("names round-trip") {
    CHECK(parse_topology(to_string(Topology::Simple)) == Topology::Simple);
    CHECK(parse_distribution_kind(to_string(EntryDistribution::Kind::Uniform)) == EntryDistribution::Kind::Uniform);
    CHECK_THROWS_AS(parse_topology("torus"), Error);
}
