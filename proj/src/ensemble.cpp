#include "bandclt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bandclt/error.hpp"

namespace bandclt {

const char* to_string(Topology topology) {
    return topology == Topology::Periodic ? "periodic" : "simple";
}

Topology parse_topology(const std::string& name) {
    if (name == "periodic") return Topology::Periodic;
    if (name == "simple") return Topology::Simple;
    throw Error(ErrorKind::InvalidSpec, "unknown topology '" + name + "'");
}

const char* to_string(EntryDistribution::Kind kind) {
    switch (kind) {
        case EntryDistribution::Kind::Gaussian: return "gaussian";
        case EntryDistribution::Kind::Uniform: return "uniform";
        case EntryDistribution::Kind::Rademacher: return "rademacher";
        case EntryDistribution::Kind::ShiftedCustom: return "custom";
    }
    return "unknown";
}

EntryDistribution::Kind parse_distribution_kind(const std::string& name) {
    if (name == "gaussian") return EntryDistribution::Kind::Gaussian;
    if (name == "uniform") return EntryDistribution::Kind::Uniform;
    if (name == "rademacher") return EntryDistribution::Kind::Rademacher;
    if (name == "custom") return EntryDistribution::Kind::ShiftedCustom;
    throw Error(ErrorKind::InvalidSpec, "unknown distribution '" + name + "'");
}

EntryDistribution EntryDistribution::gaussian(double variance) {
    return EntryDistribution{Kind::Gaussian, variance, {}, {}, std::nullopt};
}

EntryDistribution EntryDistribution::uniform(double variance) {
    return EntryDistribution{Kind::Uniform, variance, {}, {}, std::nullopt};
}

EntryDistribution EntryDistribution::rademacher(double variance) {
    return EntryDistribution{Kind::Rademacher, variance, {}, {}, std::nullopt};
}

EntryDistribution EntryDistribution::custom(std::vector<double> atoms, std::vector<double> weights,
                                            double variance, std::optional<double> sigma5_bound) {
    return EntryDistribution{Kind::ShiftedCustom, variance, std::move(atoms), std::move(weights),
                             sigma5_bound};
}

EntryDistribution EntryDistribution::with_variance(double v) const {
    EntryDistribution out = *this;
    if (kind == Kind::ShiftedCustom && out.declared_sigma5 && variance > 0.0) {
        out.declared_sigma5 = *declared_sigma5 * std::pow(v / variance, 2.5);
    }
    out.variance = v;
    return out;
}

namespace {

struct CustomLaw {
    std::vector<double> values;   // centered and scaled
    std::vector<double> cdf;      // normalized cumulative weights
    std::vector<double> probs;
};

CustomLaw resolve_custom(const EntryDistribution& d) {
    if (d.atoms.empty() || d.atoms.size() != d.weights.size()) {
        throw Error(ErrorKind::InvalidSpec, "custom law needs matching non-empty atoms and weights");
    }
    double total = 0.0;
    for (double w : d.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorKind::InvalidSpec, "custom law weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::InvalidSpec, "custom law weights sum to zero");
    CustomLaw law;
    law.probs.resize(d.weights.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        law.probs[i] = d.weights[i] / total;
        mean += law.probs[i] * d.atoms[i];
    }
    double raw_var = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        raw_var += law.probs[i] * (d.atoms[i] - mean) * (d.atoms[i] - mean);
    }
    if (!(raw_var > 0.0) && d.variance > 0.0) {
        throw Error(ErrorKind::InvalidSpec, "custom law is degenerate but a positive variance was requested");
    }
    const double scale = raw_var > 0.0 ? std::sqrt(d.variance / raw_var) : 0.0;
    law.values.resize(d.atoms.size());
    law.cdf.resize(d.atoms.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        law.values[i] = (d.atoms[i] - mean) * scale;
        acc += law.probs[i];
        law.cdf[i] = acc;
    }
    law.cdf.back() = 1.0;
    return law;
}

}  // namespace

double EntryDistribution::draw(rng::UniformPair u) const {
    switch (kind) {
        case Kind::Gaussian:
            return std::sqrt(variance) * rng::standard_normal(u);
        case Kind::Uniform: {
            const double a = std::sqrt(3.0 * variance);
            return a * (2.0 * u.first - 1.0);
        }
        case Kind::Rademacher:
            return u.first < 0.5 ? -std::sqrt(variance) : std::sqrt(variance);
        case Kind::ShiftedCustom: {
            // Resolving per draw keeps the type a plain value; custom laws are
            // small and rarely used at scale.
            const CustomLaw law = resolve_custom(*this);
            const auto it = std::upper_bound(law.cdf.begin(), law.cdf.end(), u.first);
            const auto idx = static_cast<std::size_t>(
                std::min<std::ptrdiff_t>(it - law.cdf.begin(),
                                         static_cast<std::ptrdiff_t>(law.cdf.size()) - 1));
            return law.values[idx];
        }
    }
    return 0.0;
}

Cumulants cumulants(const EntryDistribution& dist) {
    const double v = dist.variance;
    switch (dist.kind) {
        case EntryDistribution::Kind::Gaussian:
            return {v, 0.0, 0.0, 8.0 * std::sqrt(2.0 / std::numbers::pi) * std::pow(v, 2.5)};
        case EntryDistribution::Kind::Uniform:
            return {v, 0.0, -1.2 * v * v, std::pow(3.0 * v, 2.5) / 6.0};
        case EntryDistribution::Kind::Rademacher:
            return {v, 0.0, -2.0 * v * v, std::pow(v, 2.5)};
        case EntryDistribution::Kind::ShiftedCustom: {
            if (!dist.declared_sigma5) {
                throw Error(ErrorKind::InvalidSpec, "custom law requires a declared fifth-moment bound");
            }
            const CustomLaw law = resolve_custom(dist);
            double m3 = 0.0, m4 = 0.0, a5 = 0.0;
            for (std::size_t i = 0; i < law.values.size(); ++i) {
                const double x = law.values[i];
                m3 += law.probs[i] * x * x * x;
                m4 += law.probs[i] * x * x * x * x;
                a5 += law.probs[i] * std::pow(std::abs(x), 5);
            }
            if (*dist.declared_sigma5 < a5 * (1.0 - 1e-12)) {
                throw Error(ErrorKind::InvalidSpec,
                            "declared fifth-moment bound is below the law's E|X|^5");
            }
            return {v, m3, m4 - 3.0 * v * v, *dist.declared_sigma5};
        }
    }
    return {};
}

EnsembleSpec EnsembleSpec::make(std::size_t n, std::size_t b, double sigma,
                                EntryDistribution::Kind kind, Topology topology,
                                std::uint64_t seed) {
    EnsembleSpec spec;
    spec.n = n;
    spec.band_radius = b;
    spec.topology = topology;
    spec.sigma = sigma;
    spec.offdiag = EntryDistribution{kind, sigma * sigma, {}, {}, std::nullopt};
    spec.diag = spec.offdiag.with_variance(2.0 * sigma * sigma);
    spec.seed = seed;
    return spec;
}

void EnsembleSpec::validate() const {
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "n must be positive");
    if (band_radius > n / 2) throw Error(ErrorKind::InvalidSpec, "band_radius exceeds n/2");
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw Error(ErrorKind::InvalidSpec, "sigma must be finite and nonnegative");
    }
    const double s2 = sigma * sigma;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(offdiag.variance, s2)) {
        throw Error(ErrorKind::InvalidSpec, "off-diagonal variance must equal sigma^2");
    }
    if (!close(diag.variance, 2.0 * s2)) {
        throw Error(ErrorKind::InvalidSpec, "diagonal variance must equal 2 sigma^2");
    }
    if (offdiag.kind == EntryDistribution::Kind::ShiftedCustom) (void)cumulants(offdiag);
    if (diag.kind == EntryDistribution::Kind::ShiftedCustom) (void)cumulants(diag);
}

std::size_t band_distance(std::size_t j, std::size_t k, std::size_t n, Topology topology) {
    const std::size_t d = j > k ? j - k : k - j;
    return topology == Topology::Periodic ? std::min(d, n - d) : d;
}

namespace {

void check_geometry(std::size_t n, std::size_t b) {
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "n must be positive");
    if (b > n / 2) throw Error(ErrorKind::InvalidSpec, "band_radius exceeds n/2");
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> band_index_set(std::size_t n, std::size_t b,
                                                                Topology topology) {
    check_geometry(n, b);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (band_distance(j, k, n, topology) <= b) out.emplace_back(j, k);
        }
    }
    return out;
}

Eigen::MatrixXd band_mask(std::size_t n, std::size_t b, Topology topology) {
    check_geometry(n, b);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (band_distance(j, k, n, topology) <= b) {
                mask(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
            }
        }
    }
    return mask;
}

BandMatrix sample(const EnsembleSpec& spec, std::uint64_t replicate) {
    spec.validate();
    const std::size_t n = spec.n;
    const std::size_t b = spec.band_radius;
    BandMatrix m{n, b, spec.topology,
                 Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    const rng::Key key = rng::derive_key(spec.seed, rng::Domain::MatrixEntries);
    // b = 0 is the diagonal ensemble; it is normalized by 1 instead of 1/sqrt(0).
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(b, 1)));
    auto entry = [&](std::size_t j, std::size_t k, const EntryDistribution& dist) {
        const auto u = rng::uniform_pair(key, static_cast<std::uint32_t>(j),
                                         static_cast<std::uint32_t>(k), replicate);
        return dist.draw(u) * scale;
    };
    // Each unordered pair is drawn once, at its counter (min, max).
    for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        m.values(jj, jj) = entry(j, j, spec.diag);
        for (std::size_t d = 1; d <= b; ++d) {
            std::size_t k = j + d;
            if (spec.topology == Topology::Periodic) {
                k %= n;
                // At d = n/2 both j and j + n/2 would reach the same pair.
                if (2 * d == n && j >= n / 2) continue;
            } else if (k >= n) {
                break;
            }
            const std::size_t lo = std::min(j, k), hi = std::max(j, k);
            const double x = entry(lo, hi, spec.offdiag);
            m.values(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi)) = x;
            m.values(static_cast<Eigen::Index>(hi), static_cast<Eigen::Index>(lo)) = x;
        }
    }
    return m;
}

}  // namespace bandclt
