#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bandclt/rng.hpp"

namespace bandclt {

enum class Topology { Periodic, Simple };

const char* to_string(Topology topology);
Topology parse_topology(const std::string& name);

struct Cumulants {
    double variance = 0.0;
    double kappa3 = 0.0;
    double kappa4 = 0.0;
    double sigma5 = 0.0;  // bound on E|X|^5
};

/// Mean-zero entry law with a fixed variance. ShiftedCustom is a finite
/// discrete law whose atoms are centered and rescaled to the target variance.
struct EntryDistribution {
    enum class Kind { Gaussian, Uniform, Rademacher, ShiftedCustom };

    Kind kind = Kind::Gaussian;
    double variance = 1.0;
    // ShiftedCustom only: raw atoms/weights before centering, plus the
    // declared bound on E|X|^5 after centering and scaling.
    std::vector<double> atoms;
    std::vector<double> weights;
    std::optional<double> declared_sigma5;

    static EntryDistribution gaussian(double variance);
    static EntryDistribution uniform(double variance);
    static EntryDistribution rademacher(double variance);
    static EntryDistribution custom(std::vector<double> atoms, std::vector<double> weights,
                                    double variance, std::optional<double> sigma5_bound);

    /// Same family with a different variance.
    EntryDistribution with_variance(double v) const;

    /// Draws one value from two independent uniforms on (0, 1).
    double draw(rng::UniformPair u) const;
};

const char* to_string(EntryDistribution::Kind kind);
EntryDistribution::Kind parse_distribution_kind(const std::string& name);

/// Exact cumulants of the law. Throws InvalidSpec for a custom law
/// without a valid declared fifth-moment bound.
Cumulants cumulants(const EntryDistribution& dist);

struct EnsembleSpec {
    std::size_t n = 0;
    std::size_t band_radius = 0;
    Topology topology = Topology::Periodic;
    double sigma = 1.0;
    EntryDistribution offdiag;
    EntryDistribution diag;
    std::uint64_t seed = 0;

    /// Off-diagonal law from `kind` with variance sigma^2; diagonal law from
    /// the same family with variance 2 sigma^2.
    static EnsembleSpec make(std::size_t n, std::size_t b, double sigma,
                             EntryDistribution::Kind kind = EntryDistribution::Kind::Gaussian,
                             Topology topology = Topology::Periodic, std::uint64_t seed = 0);

    /// Throws InvalidSpec when an invariant is violated.
    void validate() const;
};

struct BandMatrix {
    std::size_t n = 0;
    std::size_t band_radius = 0;
    Topology topology = Topology::Periodic;
    Eigen::MatrixXd values;
};

/// Index distance used by the band condition.
std::size_t band_distance(std::size_t j, std::size_t k, std::size_t n, Topology topology);

inline bool in_band(std::size_t j, std::size_t k, std::size_t n, std::size_t b,
                    Topology topology) {
    return band_distance(j, k, n, topology) <= b;
}

/// All ordered pairs (j, k), 0-based, sorted lexicographically.
std::vector<std::pair<std::size_t, std::size_t>> band_index_set(std::size_t n, std::size_t b,
                                                                Topology topology);

/// 0/1 matrix of the band index set.
Eigen::MatrixXd band_mask(std::size_t n, std::size_t b, Topology topology);

/// Deterministic in (spec.seed, replicate).
BandMatrix sample(const EnsembleSpec& spec, std::uint64_t replicate);

}  // namespace bandclt
