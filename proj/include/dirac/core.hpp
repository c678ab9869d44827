#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace dirac {

using Index = Eigen::Index;

template <class Real>
using Complex = std::complex<Real>;
template <class Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using CVec = Eigen::Vector<std::complex<Real>, Eigen::Dynamic>;
template <class Real>
using RVec = Eigen::Vector<Real, Eigen::Dynamic>;

template <class Real>
inline constexpr Real pi = std::numbers::pi_v<Real>;

/// Breakdown of a numeric stage (solver failure, overflow guard, lost root, ...).
/// Carries the name of the stage that gave up.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Rejected input: malformed data, violated precondition, failed check.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// ---- small dense helpers ----------------------------------------------------

template <class Real>
CMat<Real> hermitize(const CMat<Real>& a) {
    return ((a + a.adjoint()) / Real(2)).eval();
}

/// Spectral norm (largest singular value).
template <class Real>
Real operator_norm(const CMat<Real>& a) {
    if (a.size() == 0) return Real(0);
    Eigen::JacobiSVD<CMat<Real>> svd(a);
    return svd.singularValues()(0);
}

/// Eigenvalues of the Hermitian part clamped at zero.
template <class Real>
CMat<Real> psd_clip(const CMat<Real>& a) {
    Eigen::SelfAdjointEigenSolver<CMat<Real>> es(hermitize(a));
    RVec<Real> ev = es.eigenvalues().cwiseMax(Real(0));
    return (es.eigenvectors() * ev.template cast<std::complex<Real>>().asDiagonal() *
            es.eigenvectors().adjoint())
        .eval();
}

/// Number of singular values above rel_tol times the largest one.
template <class Real>
int psd_rank(const CMat<Real>& a, Real rel_tol = Real(1e-8)) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMat<Real>> svd(a);
    const auto& sv = svd.singularValues();
    if (sv(0) <= Real(0)) return 0;
    int rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++rank;
    return rank;
}

/// Index n of the window (pi*n - pi/2, pi*n + pi/2] containing lambda.
template <class Real>
int window_index(Real lambda) {
    return static_cast<int>(std::ceil((lambda - pi<Real> / 2) / pi<Real>));
}

// ---- worker pool ------------------------------------------------------------

/// Effective worker count: explicit request wins, then DIRAC_SPEC_THREADS,
/// then hardware concurrency.
inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DIRAC_SPEC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run body(i) for i in [0, n). Output slots must be disjoint per index, which
/// keeps results identical for every worker count.
template <class Body>
void parallel_for(Index n, int threads, Body&& body) {
    if (n <= 0) return;
    int workers = std::min<Index>(resolve_thread_count(threads), n);
    if (workers <= 1) {
        for (Index i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            Index i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dirac
