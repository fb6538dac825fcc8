#include "bandclt/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <cstdlib>
#include <numeric>

#include <unistd.h>

#include <cblas.h>
#include <lapacke.h>

#include "bandclt/error.hpp"
#include "bandclt/parallel.hpp"
#include "bandclt/rng.hpp"

extern "C" void openblas_set_num_threads(int);

namespace bandclt {

void set_blas_single_threaded() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}

bool blas_self_test() {
    set_blas_single_threaded();
    const std::array<std::array<int, 3>, 3> shapes{{{192, 192, 192}, {300, 97, 160}, {64, 513, 33}}};
    for (const auto& [m, k, n] : shapes) {
        Eigen::MatrixXd a(m, k), b(k, n), c(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) a(i, j) = std::sin(0.37 * i + 1.3 * j);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = std::cos(0.91 * i - 0.23 * j);
        cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, a.data(), m, b.data(), k, 0.0,
                    c.data(), m);
        const Eigen::MatrixXd ref = a.lazyProduct(b);
        if (!((c - ref).norm() <= 1e-10 * ref.norm())) return false;
    }
    return true;
}

void ensure_blas_ok(char** argv) {
    if (blas_self_test()) return;
    if (std::getenv("OPENBLAS_CORETYPE") == nullptr && argv != nullptr) {
        __builtin_cpu_init();
        setenv("OPENBLAS_CORETYPE", __builtin_cpu_supports("avx512f") ? "SkylakeX" : "Haswell", 1);
        execv("/proc/self/exe", argv);
    }
    throw Error(ErrorKind::NumericInput, "BLAS dgemm self-test failed; set OPENBLAS_CORETYPE to a supported core");
}

namespace {

void require_finite(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw Error(ErrorKind::NumericInput, "matrix has non-finite entries");
}

void require_square(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "matrix is not square");
}

lapack_int as_lapack(Eigen::Index v) { return static_cast<lapack_int>(v); }

}  // namespace

Spectrum eigenvalues(const Eigen::MatrixXd& m) {
    require_square(m);
    require_finite(m);
    set_blas_single_threaded();
    const lapack_int n = as_lapack(m.rows());
    Spectrum s;
    s.eigenvalues.resize(n);
    if (n == 0) return s;
    Eigen::MatrixXd work = m;
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    double dummy = 0.0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'A', 'U', n, work.data(), n, 0.0, 0.0, 0, 0, 0.0,
                       &found, s.eigenvalues.data(), &dummy, 1, isuppz.data());
    if (info != 0 || found != n) {
        throw Error(ErrorKind::ReplicateFailure, "dsyevr failed with info " + std::to_string(info));
    }
    return s;
}

Spectrum eigenvalues(const BandMatrix& m) { return eigenvalues(m.values); }

Spectrum eigen_decomposition(const Eigen::MatrixXd& m) {
    require_square(m);
    require_finite(m);
    set_blas_single_threaded();
    const lapack_int n = as_lapack(m.rows());
    Spectrum s;
    s.eigenvalues.resize(n);
    Eigen::MatrixXd q = m;
    if (n > 0) {
        const lapack_int info =
            LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, q.data(), n, s.eigenvalues.data());
        if (info != 0) {
            throw Error(ErrorKind::ReplicateFailure, "dsyevd failed with info " + std::to_string(info));
        }
    }
    s.eigenvectors = std::move(q);
    return s;
}

Spectrum eigen_decomposition(const BandMatrix& m) { return eigen_decomposition(m.values); }

double linear_statistic(const Spectrum& s, const TestFunction& phi) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) acc += phi.value(s.eigenvalues(i));
    return acc;
}

namespace {

const Eigen::MatrixXd& vectors_of(const Spectrum& s) {
    if (!s.eigenvectors) throw Error(ErrorKind::InvalidArgument, "spectrum has no eigenvectors");
    return *s.eigenvectors;
}

// Q diag(d) Q^T
Eigen::MatrixXd congruence(const Eigen::MatrixXd& q, const Eigen::VectorXd& d) {
    Eigen::MatrixXd scaled = q * d.asDiagonal();
    Eigen::MatrixXd out = scaled * q.transpose();
    return out;
}

}  // namespace

Eigen::MatrixXd matrix_function(const Spectrum& s, const std::function<double(double)>& f) {
    const Eigen::MatrixXd& q = vectors_of(s);
    Eigen::VectorXd d = s.eigenvalues.unaryExpr(f);
    return congruence(q, d);
}

Eigen::MatrixXcd matrix_function_complex(const Spectrum& s,
                                         const std::function<std::complex<double>(double)>& f) {
    const Eigen::MatrixXd& q = vectors_of(s);
    const Eigen::Index n = s.eigenvalues.size();
    Eigen::VectorXd re(n), im(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> v = f(s.eigenvalues(i));
        re(i) = v.real();
        im(i) = v.imag();
    }
    Eigen::MatrixXcd out(n, n);
    out.real() = congruence(q, re);
    out.imag() = congruence(q, im);
    return out;
}

Eigen::MatrixXcd resolvent(const Spectrum& s, std::complex<double> z) {
    if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "resolvent needs Im z != 0");
    return matrix_function_complex(s, [z](double x) { return 1.0 / (z - x); });
}

Eigen::MatrixXd haar_orthogonal(std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
    set_blas_single_threaded();
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a(ni, ni);
    const rng::Key key = rng::derive_key(seed, rng::Domain::HaarGaussian);
    for (Eigen::Index j = 0; j < ni; ++j) {
        for (Eigen::Index i = 0; i < ni; ++i) {
            a(i, j) = rng::standard_normal(rng::uniform_pair(
                key, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), replicate));
        }
    }
    if (n == 0) return a;
    const lapack_int ln = as_lapack(ni);
    std::vector<double> tau(n);
    lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, ln, ln, a.data(), ln, tau.data());
    if (info != 0) throw Error(ErrorKind::ReplicateFailure, "dgeqrf failed");
    Eigen::VectorXd sign(ni);
    for (Eigen::Index j = 0; j < ni; ++j) sign(j) = a(j, j) < 0.0 ? -1.0 : 1.0;
    info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, ln, ln, ln, a.data(), ln, tau.data());
    if (info != 0) throw Error(ErrorKind::ReplicateFailure, "dorgqr failed");
    return a * sign.asDiagonal();
}

double operator_norm(const Eigen::MatrixXd& a) {
    require_finite(a);
    set_blas_single_threaded();
    const lapack_int rows = as_lapack(a.rows());
    const lapack_int cols = as_lapack(a.cols());
    if (rows == 0 || cols == 0) return 0.0;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
    cblas_dsyrk(CblasColMajor, CblasUpper, CblasTrans, cols, rows, 1.0, a.data(), rows, 0.0,
                gram.data(), cols);
    // dsyevr uses the whole eigenvalue array as workspace even for one value.
    std::vector<double> w(static_cast<std::size_t>(cols));
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(cols));
    lapack_int found = 0;
    double dummy = 0.0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'U', cols, gram.data(), cols, 0.0, 0.0, cols,
                       cols, 0.0, &found, w.data(), &dummy, 1, isuppz.data());
    if (info != 0 || found != 1) throw Error(ErrorKind::ReplicateFailure, "dsyevr failed in operator_norm");
    return std::sqrt(std::max(w[0], 0.0));
}

Eigen::MatrixXd periodic_band_part(const Eigen::MatrixXd& a, std::size_t b) {
    require_square(a);
    const auto n = static_cast<std::size_t>(a.rows());
    Eigen::MatrixXd out = a;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (band_distance(j, k, n, Topology::Periodic) > b) {
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 0.0;
            }
        }
    }
    return out;
}

namespace {

BandNormStats summarize_norms(std::size_t b, std::vector<double> norms) {
    BandNormStats st;
    st.b = b;
    const double count = static_cast<double>(norms.size());
    if (!norms.empty()) {
        st.mean = std::accumulate(norms.begin(), norms.end(), 0.0) / count;
        double ss = 0.0;
        for (double v : norms) ss += (v - st.mean) * (v - st.mean);
        st.sd = norms.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        st.min = *std::min_element(norms.begin(), norms.end());
        st.max = *std::max_element(norms.begin(), norms.end());
    }
    st.norms = std::move(norms);
    return st;
}

}  // namespace

std::vector<BandNormStats> banded_unitary_norm(std::size_t n, const std::vector<std::size_t>& b_list,
                                               std::size_t reps, std::uint64_t seed, int workers) {
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "n must be positive");
    for (std::size_t b : b_list) {
        if (b > n / 2) throw Error(ErrorKind::InvalidSpec, "band_radius exceeds n/2");
    }
    std::vector<std::vector<double>> per_rep(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const Eigen::MatrixXd u = haar_orthogonal(n, seed, r);
        std::vector<double> row;
        row.reserve(b_list.size());
        for (std::size_t b : b_list) row.push_back(operator_norm(periodic_band_part(u, b)));
        per_rep[r] = std::move(row);
    });
    std::vector<BandNormStats> out;
    for (std::size_t i = 0; i < b_list.size(); ++i) {
        std::vector<double> norms(reps);
        for (std::size_t r = 0; r < reps; ++r) norms[r] = per_rep[r][i];
        out.push_back(summarize_norms(b_list[i], std::move(norms)));
    }
    return out;
}

BandNormStats banded_unitary_norm(std::size_t n, std::size_t b, std::size_t reps,
                                  std::uint64_t seed, int workers) {
    return banded_unitary_norm(n, std::vector<std::size_t>{b}, reps, seed, workers).front();
}

LogFit fit_log_trend(const std::vector<BandNormStats>& stats) {
    if (stats.size() < 2) throw Error(ErrorKind::InsufficientData, "log fit needs at least two b values");
    const double m = static_cast<double>(stats.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& s : stats) {
        sx += std::log(static_cast<double>(s.b) + 1.0);
        sy += s.mean;
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& s : stats) {
        const double dx = std::log(static_cast<double>(s.b) + 1.0) - mx;
        const double dy = s.mean - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LogFit fit;
    fit.c = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.a = my - fit.c * mx;
    double sse = 0.0;
    for (const auto& s : stats) {
        const double r = s.mean - (fit.a + fit.c * std::log(static_cast<double>(s.b) + 1.0));
        sse += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

ResolventStats resolvent_offdiag_mean(const EnsembleSpec& spec, std::complex<double> z,
                                      std::size_t reps, int workers) {
    spec.validate();
    if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "resolvent needs Im z != 0");
    if (reps == 0) throw Error(ErrorKind::InsufficientData, "resolvent mean needs at least one replicate");
    const auto n = static_cast<Eigen::Index>(spec.n);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    // Replicates are computed in batches and added in index order, so the
    // floating-point sum does not depend on the worker count.
    const std::size_t batch = static_cast<std::size_t>(std::max(workers, 1));
    std::vector<Eigen::MatrixXcd> slots(batch);
    for (std::size_t start = 0; start < reps; start += batch) {
        const std::size_t count = std::min(batch, reps - start);
        parallel_for(count, workers, [&](std::size_t i) {
            slots[i] = resolvent(eigen_decomposition(sample(spec, start + i)), z);
        });
        for (std::size_t i = 0; i < count; ++i) sum += slots[i];
    }
    sum /= static_cast<double>(reps);
    ResolventStats st;
    st.reps = reps;
    st.z = z;
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index p = 0; p < n; ++p) {
            if (p == s) continue;
            const double a = std::abs(sum(p, s));
            if (a > st.max_abs_mean) {
                st.max_abs_mean = a;
                st.argmax_p = static_cast<std::size_t>(p);
                st.argmax_s = static_cast<std::size_t>(s);
            }
        }
    }
    if (std::abs(z.imag()) < 1e-3) {
        st.warning = "|Im z| below 1e-3: the resolvent is ill-conditioned near the spectrum";
    }
    return st;
}

RadiusTail spectral_radius_tail(const std::vector<Spectrum>& spectra, double sigma) {
    RadiusTail tail;
    tail.reps = spectra.size();
    std::size_t exceed = 0;
    for (const auto& s : spectra) {
        double norm = 0.0;
        if (s.eigenvalues.size() > 0) {
            norm = std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(s.eigenvalues.size() - 1)));
        }
        tail.max_norm = std::max(tail.max_norm, norm);
        // The zero matrix never counts as a tail event, including at sigma = 0.
        if (norm > 0.0 && norm >= 10.0 * sigma) ++exceed;
    }
    tail.fraction = spectra.empty() ? 0.0 : static_cast<double>(exceed) / static_cast<double>(spectra.size());
    return tail;
}

RadiusTail spectral_radius_tail(const EnsembleSpec& spec, std::size_t reps, int workers) {
    spec.validate();
    std::vector<Spectrum> spectra(reps);
    parallel_for(reps, workers, [&](std::size_t r) { spectra[r] = eigenvalues(sample(spec, r)); });
    return spectral_radius_tail(spectra, spec.sigma);
}

}  // namespace bandclt
