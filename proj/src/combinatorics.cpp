#include "bandclt/combinatorics.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>

#include "bandclt/error.hpp"
#include "bandclt/quadrature.hpp"
#include "bandclt/rng.hpp"

namespace bandclt {

namespace {

mpz_class binomial(unsigned long n, unsigned long k) {
    mpz_class out;
    if (k > n) return 0;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

mpz_class factorial(unsigned long n) {
    mpz_class out;
    mpz_fac_ui(out.get_mpz_t(), n);
    return out;
}

mpz_class ipow(const mpz_class& base, unsigned long e) {
    mpz_class out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

mpq_class gamma_closed_uncached(unsigned k) {
    const unsigned t = k / 2;
    mpz_class num = 0;
    if (k % 2 == 0) {
        // (t - s + 1/2)^{2t} = (2t - 2s + 1)^{2t} / 2^{2t}
        for (unsigned s = 0; s <= t; ++s) {
            mpz_class term = binomial(2ul * t + 1, s) * ipow(mpz_class(2 * (t - s) + 1), 2ul * t);
            if (s % 2) num -= term; else num += term;
        }
        mpq_class out(num, factorial(2ul * t) * ipow(mpz_class(2), 2ul * t));
        out.canonicalize();
        return out;
    }
    for (unsigned s = 0; s <= t; ++s) {
        mpz_class term = binomial(2ul * t + 2, s) * ipow(mpz_class(t - s + 1), 2ul * t + 1);
        if (s % 2) num -= term; else num += term;
    }
    mpq_class out(num, factorial(2ul * t + 1));
    out.canonicalize();
    return out;
}

}  // namespace

mpz_class catalan(unsigned s) {
    mpz_class c = binomial(2ul * s, s);
    c /= (s + 1);
    return c;
}

mpq_class gamma_closed(unsigned k) {
    static std::mutex mutex;
    static std::vector<mpq_class> memo;
    static std::vector<bool> known;
    std::lock_guard lock(mutex);
    if (k >= memo.size()) {
        memo.resize(k + 1);
        known.resize(k + 1, false);
    }
    if (!known[k]) {
        memo[k] = gamma_closed_uncached(k);
        known[k] = true;
    }
    return memo[k];
}

namespace {

double sinc_power(double x, unsigned p) {
    if (x == 0.0) return 1.0;
    return std::pow(std::sin(x) / x, static_cast<double>(p));
}

// Asymptotic value of the integral over (S, inf) of sin^p(x) / x^p for even
// p and S a multiple of pi, from the cosine expansion of sin^p and repeated
// integration by parts. Returns the value and the size of the first
// neglected term.
std::pair<double, double> even_power_tail(unsigned p, double S) {
    // Everything is formed in logarithms: for large p the binomials overflow
    // while S^-p underflows.
    const double pd = static_cast<double>(p);
    const double log_scale = -pd * std::log(2.0) + std::lgamma(pd + 1.0);
    const double log_s = std::log(S);
    double total = std::exp(log_scale - 2.0 * std::lgamma(pd / 2.0 + 1.0) + (1.0 - pd) * log_s) / (pd - 1.0);
    double neglected = 0.0;
    for (unsigned q = 1; q <= p / 2; ++q) {
        const double omega = 2.0 * q;
        const double log_coeff = std::log(2.0) + log_scale - std::lgamma(pd / 2.0 - q + 1.0) -
                                 std::lgamma(pd / 2.0 + q + 1.0);
        const double sign = q % 2 ? -1.0 : 1.0;
        // sum over odd j of (-1)^((j-1)/2) (p)_j omega^{-(j+1)} S^{-p-j}, scaled by the coefficient
        double term = std::exp(log_coeff + std::log(pd) - 2.0 * std::log(omega) - (pd + 1.0) * log_s);
        double series = 0.0;
        double last = term;
        for (unsigned j = 1; j < 40; j += 2) {
            series += ((j - 1) / 2 % 2 ? -1.0 : 1.0) * term;
            const double jd = static_cast<double>(j);
            const double next = term * (pd + jd) * (pd + jd + 1.0) / (omega * omega * S * S);
            last = next;
            if (next >= term || next < 1e-300) break;
            term = next;
        }
        total += sign * series;
        neglected += last;
    }
    return {total, neglected};
}

}  // namespace

GammaQuadrature gamma_quadrature_report(unsigned k, const GammaQuadratureOptions& opt) {
    const unsigned p = k + 1;
    if (opt.half_periods == 0 || !(opt.tolerance > 0.0)) {
        throw AccuracyError("gamma_quadrature: half_periods and tolerance must be positive", INFINITY);
    }
    if (p % 2 == 1 && opt.half_periods < opt.euler_levels + 2) {
        throw AccuracyError("gamma_quadrature: half_periods must exceed euler_levels + 1", INFINITY);
    }
    const double pi = std::numbers::pi;
    auto f = [p](double x) { return sinc_power(x, p); };
    std::vector<double> partial;
    partial.reserve(opt.half_periods);
    // Main lobe: composite Gauss-Legendre with panels narrower than the
    // lobe width sqrt(6 / p); halving the panel count gives the error estimate.
    const unsigned panels = 16 * std::max(1u, static_cast<unsigned>(std::ceil(std::sqrt(p) / 8.0)));
    auto composite = [&](unsigned count) {
        double sum = 0.0;
        const double h = pi / count;
        for (unsigned i = 0; i < count; ++i) sum += quad::gauss_legendre30(f, i * h, (i + 1) * h);
        return sum;
    };
    double acc = composite(panels);
    const double first_err = std::abs(acc - composite(panels / 2));
    partial.push_back(acc);
    for (unsigned m = 1; m < opt.half_periods; ++m) {
        acc += quad::gauss_legendre30(f, m * pi, (m + 1) * pi);
        partial.push_back(acc);
    }
    double value = 0.0, err = 0.0;
    if (p % 2 == 1) {
        const quad::Accelerated a = quad::euler_average(partial, opt.euler_levels);
        value = a.value;
        err = a.error;
    } else {
        const auto [tail, neglected] = even_power_tail(p, opt.half_periods * pi);
        value = partial.back() + tail;
        err = neglected;
    }
    err += first_err;
    GammaQuadrature out{2.0 / pi * value, 2.0 / pi * err};
    if (!std::isfinite(out.value) || out.error > opt.tolerance) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "gamma_quadrature(%u): error estimate %.3g exceeds tolerance %.3g; partial sum %.15g",
                      k, out.error, opt.tolerance, 2.0 / pi * partial.back());
        throw AccuracyError(buf, out.error);
    }
    return out;
}

double gamma_quadrature(unsigned k, const GammaQuadratureOptions& options) {
    return gamma_quadrature_report(k, options).value;
}

std::vector<double> gamma_table(std::size_t count) {
    // Exact sums are cheap up to a few hundred; beyond, quadrature over the
    // narrow main lobe is fast and accurate to ~1e-12.
    constexpr std::size_t kExactLimit = 300;
    static std::mutex mutex;
    static std::vector<double> table;
    std::lock_guard lock(mutex);
    while (table.size() < count) {
        const auto k = static_cast<unsigned>(table.size());
        table.push_back(k < kExactLimit ? gamma_closed(k).get_d() : gamma_quadrature(k));
    }
    return {table.begin(), table.begin() + static_cast<std::ptrdiff_t>(count)};
}

mpz_class dyck_count_at(unsigned l, unsigned m, unsigned k) {
    if (k > l || k > m || (l + k) % 2 || (m + k) % 2) return 0;
    mpz_class num = mpz_class((k + 1) * (k + 1)) * binomial(l + 1, (l + k + 2) / 2) *
                    binomial(m + 1, (m + k + 2) / 2);
    const mpz_class den = mpz_class(l + 1) * (m + 1);
    if (num % den != 0) throw Error(ErrorKind::Accuracy, "Dyck count is not an integer");
    return num / den;
}

std::vector<std::vector<int>> dyck_enumerate(unsigned length) {
    std::vector<std::vector<int>> out;
    if (length % 2) return out;
    if (length > 20) throw Error(ErrorKind::InvalidArgument, "dyck_enumerate supports length <= 20");
    std::vector<int> path{0};
    std::function<void()> extend = [&] {
        const int h = path.back();
        const int remaining = static_cast<int>(length) - static_cast<int>(path.size()) + 1;
        if (remaining == 0) {
            if (h == 0) out.push_back(path);
            return;
        }
        if (h + 1 <= remaining - 1) {
            path.push_back(h + 1);
            extend();
            path.pop_back();
        }
        if (h > 0) {
            path.push_back(h - 1);
            extend();
            path.pop_back();
        }
    };
    extend();
    return out;
}

MomentCoefficient moment_coeff(unsigned l, unsigned m) {
    MomentCoefficient c{l, m, 0, MomentCoefficient::Source::ClosedForm};
    if ((l + m) % 2) return c;
    const unsigned lo = std::min(l, m);
    mpq_class sum = 0;
    if (l % 2 == 0) {
        for (unsigned k = 0; 2 * k <= lo; ++k) {
            sum += mpq_class(mpz_class((2 * k + 1) * (2 * k + 1)) * binomial(l + 1, (l - 2 * k) / 2) *
                             binomial(m + 1, (m - 2 * k) / 2)) *
                   gamma_closed(2 * k);
        }
    } else {
        for (unsigned k = 0; 2 * k + 1 <= lo; ++k) {
            sum += mpq_class(mpz_class((2 * k + 2) * (2 * k + 2)) *
                             binomial(l + 1, (l - 2 * k - 1) / 2) *
                             binomial(m + 1, (m - 2 * k - 1) / 2)) *
                   gamma_closed(2 * k + 1);
        }
    }
    c.value = sum / mpq_class(mpz_class(l + 1) * (m + 1));
    c.value.canonicalize();
    return c;
}

MomentCoefficient moment_coeff_dyck(unsigned l, unsigned m) {
    MomentCoefficient c{l, m, 0, MomentCoefficient::Source::DyckSum};
    for (unsigned k = 0; k <= std::min(l, m); ++k) {
        c.value += mpq_class(dyck_count_at(l, m, k)) * gamma_closed(k);
    }
    c.value.canonicalize();
    return c;
}

mpq_class limit_bilinear_scaled(const std::vector<mpq_class>& p, const std::vector<mpq_class>& q) {
    mpq_class sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0) continue;
        for (std::size_t j = i % 2; j < q.size(); j += 2) {
            if (q[j] == 0) continue;
            sum += p[i] * q[j] *
                   moment_coeff(static_cast<unsigned>(i), static_cast<unsigned>(j)).value;
        }
    }
    sum.canonicalize();
    return sum;
}

double limit_bilinear_poly(const std::vector<double>& p, const std::vector<double>& q, double sigma) {
    // Only even i + j contribute, so (sqrt 2 sigma)^(i+j) = (2 sigma^2)^((i+j)/2)
    // is rational in the exact binary value of sigma.
    const mpq_class s(sigma);
    const mpq_class two_s2 = 2 * s * s;
    std::vector<mpq_class> powers{1};
    auto power = [&](std::size_t e) {
        while (powers.size() <= e) powers.push_back(powers.back() * two_s2);
        return powers[e];
    };
    mpq_class sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        for (std::size_t j = i % 2; j < q.size(); j += 2) {
            if (q[j] == 0.0) continue;
            sum += mpq_class(p[i]) * mpq_class(q[j]) * power((i + j) / 2) *
                   moment_coeff(static_cast<unsigned>(i), static_cast<unsigned>(j)).value;
        }
    }
    return sum.get_d();
}

std::vector<mpq_class> chebyshev_u_scaled(unsigned k) {
    std::vector<mpq_class> prev{1};
    if (k == 0) return prev;
    std::vector<mpq_class> cur{0, 1};
    for (unsigned i = 1; i < k; ++i) {
        std::vector<mpq_class> next(cur.size() + 1, 0);
        for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += cur[j];
        for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= prev[j];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

GammaMonteCarlo gamma_monte_carlo(unsigned max_k, std::size_t draws, std::uint64_t seed) {
    if (draws == 0) throw Error(ErrorKind::InvalidArgument, "gamma_monte_carlo needs draws > 0");
    const rng::Key key = rng::derive_key(seed, rng::Domain::UniformSums);
    std::vector<std::size_t> hits(max_k + 1, 0);
    for (std::size_t d = 0; d < draws; ++d) {
        double sum = 0.0;
        ++hits[0];
        for (unsigned k = 1; k <= max_k; k += 2) {
            const auto u = rng::uniform_pair(key, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32), k);
            sum += u.first - 0.5;
            if (std::abs(sum) <= 0.5) ++hits[k];
            if (k + 1 > max_k) break;
            sum += u.second - 0.5;
            if (std::abs(sum) <= 0.5) ++hits[k + 1];
        }
    }
    GammaMonteCarlo out;
    const double n = static_cast<double>(draws);
    for (std::size_t h : hits) {
        const double p = static_cast<double>(h) / n;
        out.estimate.push_back(p);
        out.se.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    return out;
}

}  // namespace bandclt
