#pragma once

#include "dirac/core.hpp"

#include <cstdint>
#include <random>

namespace dirac {

/// Uniform grid of an r-by-r matrix potential on [0,1].
///
/// values[i] is the sample at x_i = i/m; between nodes the potential is read
/// as the piecewise-linear interpolant. p is the Lebesgue exponent of the
/// ambient space and travels with the grid through the whole pipeline.
template <class Real = double>
struct PotentialGrid {
    Index r = 1;
    Index m = 1;
    Real p = Real(2);
    std::vector<CMat<Real>> values;

    Real dx() const { return Real(1) / Real(m); }
    Real node(Index i) const { return Real(i) / Real(m); }

    CMat<Real> eval(Real x) const {
        if (x <= Real(0)) return values.front();
        if (x >= Real(1)) return values.back();
        Real s = x * Real(m);
        Index i = std::min<Index>(static_cast<Index>(s), m - 1);
        Real t = s - Real(i);
        return ((Real(1) - t) * values[i] + t * values[i + 1]).eval();
    }

    void validate() const {
        if (r < 1) throw ValidationError("potential", "matrix dimension r must be >= 1");
        if (m < 1) throw ValidationError("potential", "grid needs at least one interval");
        if (!(p >= Real(1))) throw ValidationError("potential", "Lebesgue exponent p must be >= 1");
        if (static_cast<Index>(values.size()) != m + 1)
            throw ValidationError("potential", "expected m+1 node samples, got " +
                                                   std::to_string(values.size()));
        for (Index i = 0; i <= m; ++i) {
            if (values[i].rows() != r || values[i].cols() != r)
                throw ValidationError("potential",
                                      "sample " + std::to_string(i) + " is not r-by-r");
            if (!values[i].allFinite())
                throw ValidationError("potential",
                                      "non-finite entry at node " + std::to_string(i));
        }
    }
};

/// Trapezoid L_p norm of the node-wise spectral norms.
template <class Real>
Real lp_norm(const PotentialGrid<Real>& q) {
    q.validate();
    Real h = q.dx();
    Real acc = Real(0);
    for (Index i = 0; i <= q.m; ++i) {
        Real w = (i == 0 || i == q.m) ? h / 2 : h;
        acc += w * std::pow(operator_norm<Real>(q.values[i]), q.p);
    }
    return std::pow(acc, Real(1) / q.p);
}

/// Trapezoid L_p distance between two grids (finer common grid, linear reads).
template <class Real>
Real lp_distance(const PotentialGrid<Real>& a, const PotentialGrid<Real>& b) {
    a.validate();
    b.validate();
    if (a.r != b.r) throw ValidationError("potential", "dimension mismatch in lp_distance");
    PotentialGrid<Real> diff;
    diff.r = a.r;
    diff.m = std::max(a.m, b.m);
    diff.p = a.p;
    diff.values.resize(diff.m + 1);
    for (Index i = 0; i <= diff.m; ++i) {
        Real x = Real(i) / Real(diff.m);
        diff.values[i] = a.eval(x) - b.eval(x);
    }
    return lp_norm(diff);
}

// ---- built-in test potentials -----------------------------------------------

enum class TestPotential { zero, constant, smooth_random, matrix_demo };

template <class Real = double>
struct TestPotentialParams {
    Real amplitude = Real(0.3);
    std::uint32_t seed = 1;
    Real p = Real(2);
};

namespace detail {

// Platform-stable uniform draw in [-1, 1): avoids std::uniform_real_distribution,
// whose output is implementation-defined.
template <class Real>
Real symmetric_draw(std::mt19937& gen) {
    return Real(2) * (Real(gen()) / Real(4294967296.0)) - Real(1);
}

template <class Real>
CMat<Real> random_coefficient(std::mt19937& gen, Index r) {
    CMat<Real> c(r, r);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j)
            c(i, j) = Complex<Real>(symmetric_draw<Real>(gen), symmetric_draw<Real>(gen));
    return c;
}

}  // namespace detail

/// Deterministic sample potentials used by tests and demos.
///
///  - zero / constant: q = 0 and q = amplitude * I.
///  - smooth_random: low-order trigonometric polynomial with seeded complex
///    coefficients, rescaled so the largest node norm equals amplitude.
///  - matrix_demo: a fixed non-Hermitian, non-commuting matrix family (r >= 2).
template <class Real = double>
PotentialGrid<Real> make_test_potential(TestPotential kind, Index r, Index m,
                                        const TestPotentialParams<Real>& params = {}) {
    if (r < 1) throw ValidationError("make_test_potential", "r must be >= 1");
    if (m < 2) throw ValidationError("make_test_potential", "m must be >= 2");
    if (!(params.p >= Real(1)))
        throw ValidationError("make_test_potential", "p must be >= 1");

    PotentialGrid<Real> q;
    q.r = r;
    q.m = m;
    q.p = params.p;
    q.values.resize(m + 1);

    switch (kind) {
        case TestPotential::zero: {
            for (auto& v : q.values) v = CMat<Real>::Zero(r, r);
            break;
        }
        case TestPotential::constant: {
            for (auto& v : q.values)
                v = params.amplitude * CMat<Real>::Identity(r, r);
            break;
        }
        case TestPotential::smooth_random: {
            std::mt19937 gen(params.seed);
            CMat<Real> c0 = detail::random_coefficient<Real>(gen, r);
            CMat<Real> c1 = detail::random_coefficient<Real>(gen, r);
            CMat<Real> c2 = detail::random_coefficient<Real>(gen, r);
            CMat<Real> c3 = detail::random_coefficient<Real>(gen, r);
            Real peak = Real(0);
            for (Index i = 0; i <= m; ++i) {
                Real x = q.node(i);
                q.values[i] = (c0 + c1 * std::cos(pi<Real> * x) + c2 * std::sin(pi<Real> * x) +
                               c3 * std::cos(2 * pi<Real> * x))
                                  .eval();
                peak = std::max(peak, operator_norm<Real>(q.values[i]));
            }
            if (peak > Real(0))
                for (auto& v : q.values) v *= params.amplitude / peak;
            break;
        }
        case TestPotential::matrix_demo: {
            if (r < 2)
                throw ValidationError("make_test_potential", "matrix_demo requires r >= 2");
            for (Index i = 0; i <= m; ++i) {
                Real x = q.node(i);
                CMat<Real> v(r, r);
                for (Index j = 0; j < r; ++j)
                    for (Index k = 0; k < r; ++k) {
                        Real base = Real(0.2) + Real(0.1) * Real(j) - Real(0.05) * Real(k);
                        Real phase = pi<Real> * Real(2 * j + 3 * k + 1) / Real(7);
                        Real wave = Real(0.6) +
                                    Real(0.4) * std::cos(pi<Real> * x * Real(1 + (j + k) % 2));
                        v(j, k) = params.amplitude * base * wave *
                                  std::exp(Complex<Real>(0, phase));
                    }
                q.values[i] = v;
            }
            break;
        }
        default:
            throw ValidationError("make_test_potential", "unknown potential kind");
    }
    q.validate();
    return q;
}

// ---- first-order system -----------------------------------------------------

/// Coefficients of the first-order 2r system attached to a potential: the
/// constant symbol theta = -i * diag(I, -I), the boundary form
/// a = (I, -I)/sqrt(2), and node samples of the off-diagonal block matrix
/// bq = [[0, q], [q*, 0]].
template <class Real = double>
struct SystemCoefficients {
    Index r = 1;
    Index m = 1;
    CMat<Real> theta;
    CMat<Real> a;
    std::vector<CMat<Real>> bq;

    CMat<Real> bq_eval(Real x) const {
        if (x <= Real(0)) return bq.front();
        if (x >= Real(1)) return bq.back();
        Real s = x * Real(m);
        Index i = std::min<Index>(static_cast<Index>(s), m - 1);
        Real t = s - Real(i);
        return ((Real(1) - t) * bq[i] + t * bq[i + 1]).eval();
    }
};

template <class Real>
SystemCoefficients<Real> augment(const PotentialGrid<Real>& q) {
    q.validate();
    const Index r = q.r;
    SystemCoefficients<Real> sys;
    sys.r = r;
    sys.m = q.m;
    sys.theta = CMat<Real>::Zero(2 * r, 2 * r);
    sys.theta.topLeftCorner(r, r) = -Complex<Real>(0, 1) * CMat<Real>::Identity(r, r);
    sys.theta.bottomRightCorner(r, r) = Complex<Real>(0, 1) * CMat<Real>::Identity(r, r);
    sys.a = CMat<Real>::Zero(r, 2 * r);
    sys.a.leftCols(r) = CMat<Real>::Identity(r, r) / std::sqrt(Real(2));
    sys.a.rightCols(r) = -CMat<Real>::Identity(r, r) / std::sqrt(Real(2));
    sys.bq.resize(q.m + 1);
    for (Index i = 0; i <= q.m; ++i) {
        CMat<Real> b = CMat<Real>::Zero(2 * r, 2 * r);
        b.topRightCorner(r, r) = q.values[i];
        b.bottomLeftCorner(r, r) = q.values[i].adjoint();
        sys.bq[i] = b;
    }
    return sys;
}

}  // namespace dirac
