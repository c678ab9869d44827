#pragma once

// Reference values computed along routes that share no code with the library:
// closed forms for free and constant coefficients, a dense Fourier-Galerkin
// discretization for smooth potentials, and separable closed forms for the
// resolvent equation. Tests compare the library against these.

#include "dirac/potential.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <map>
#include <vector>

namespace oracle {

using Cpx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using dirac::Index;

inline constexpr double pi = 3.14159265358979323846;

inline int window_of(double lambda) { return static_cast<int>(std::ceil((lambda - pi / 2) / pi)); }

// ---- free and constant coefficients -----------------------------------------

inline Mat free_propagator(Cpx lambda, Index r, double x = 1.0) {
    Mat u = Mat::Zero(2 * r, 2 * r);
    Cpx up = std::exp(Cpx(0, 1) * lambda * x);
    Cpx dn = std::exp(Cpx(0, -1) * lambda * x);
    for (Index k = 0; k < r; ++k) {
        u(k, k) = up;
        u(r + k, r + k) = dn;
    }
    return u;
}

// cos(sqrt(z)) and sin(sqrt(z))/sqrt(z), entire in z.
inline Cpx cos_sqrt(Cpx z) {
    if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 24.0;
    Cpx w = std::sqrt(z);
    return std::cos(w);
}

inline Cpx sinc_sqrt(Cpx z) {
    if (std::abs(z) < 1e-6) return 1.0 - z / 6.0 + z * z / 120.0;
    Cpx w = std::sqrt(z);
    return std::sin(w) / w;
}

// Scalar constant potential c: both characteristic functions in closed form.
inline Cpx constant_s(Cpx lambda, double c) {
    return (lambda - c) * sinc_sqrt(lambda * lambda - c * c);
}
inline Cpx constant_c(Cpx lambda, double c) { return cos_sqrt(lambda * lambda - c * c); }

inline double constant_eigenvalue(double c, int n) {
    if (n == 0) return c;
    double root = std::sqrt(pi * pi * double(n) * double(n) + c * c);
    return n > 0 ? root : -root;
}
// Residue of -cos(omega) / ((lambda - c) sinc(omega)) at lambda_n.  For n != 0
// the sinc factor vanishes there and the residue picks up 1 + c/lambda_n; at
// n = 0 (lambda = c) the sinc factor equals one, so the pole comes from the
// linear factor alone and the norming constant is exactly 1.
inline double constant_alpha(double c, int n) {
    if (n == 0) return 1.0;
    return 1.0 + c / constant_eigenvalue(c, n);
}

// Propagator of a constant matrix potential by eigendecomposition of the
// frozen generator i [[lambda I, -Q], [Q*, -lambda I]].
inline Mat constant_matrix_propagator(Cpx lambda, const Mat& q, double x = 1.0) {
    Index r = q.rows();
    Mat a = Mat::Zero(2 * r, 2 * r);
    a.topLeftCorner(r, r) = Cpx(0, 1) * lambda * Mat::Identity(r, r);
    a.topRightCorner(r, r) = Cpx(0, -1) * q;
    a.bottomLeftCorner(r, r) = Cpx(0, 1) * q.adjoint();
    a.bottomRightCorner(r, r) = Cpx(0, -1) * lambda * Mat::Identity(r, r);
    Eigen::ComplexEigenSolver<Mat> es(a);
    Vec ex = (x * es.eigenvalues().array()).exp();
    return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().inverse();
}

// Spectrum of a constant Hermitian matrix potential Q = sum mu_k u_k u_k^*:
// window n carries sign(n) sqrt(pi^2 n^2 + mu_k^2) (the mu_k themselves at
// n = 0) and the norming sum over the window is sum (1 + mu_k/lambda) u u^*
// away from zero; at n = 0 each mode contributes u u^* with weight one, so
// the window sum is the identity.
struct ConstantWindow {
    std::vector<double> lambdas;
    Mat alpha_sum;
};

inline ConstantWindow hermitian_constant_window(const Mat& q, int n) {
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    ConstantWindow out;
    out.alpha_sum = Mat::Zero(q.rows(), q.cols());
    for (Index k = 0; k < q.rows(); ++k) {
        double mu = es.eigenvalues()(k);
        double lam;
        if (n == 0)
            lam = mu;
        else {
            double root = std::sqrt(pi * pi * double(n) * double(n) + mu * mu);
            lam = n > 0 ? root : -root;
        }
        out.lambdas.push_back(lam);
        double weight = n == 0 ? 1.0 : 1.0 + mu / lam;
        out.alpha_sum += weight * es.eigenvectors().col(k) *
                         es.eigenvectors().col(k).adjoint();
    }
    std::sort(out.lambdas.begin(), out.lambdas.end());
    return out;
}

// ---- Fourier-Galerkin spectrum ----------------------------------------------
//
// The functions phi_{n,k} = (e^{i pi n x} e_k, e^{-i pi n x} e_k)/sqrt(2) form
// an orthonormal system satisfying both boundary conditions; in this basis the
// operator's matrix is pi n on the diagonal plus the Hermitian parts of the
// potential moments M_j = int_0^1 q(x) e^{-i pi j x} dx on the anti-diagonals
// j = n + m. Moments of the piecewise-linear grid are integrated exactly.

namespace detail {

// (e^z - 1)/z and (e^z (z - 1) + 1)/z^2, entire.
inline Cpx expm1_over(Cpx z) {
    if (std::abs(z) < 1e-2)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
    return (std::exp(z) - 1.0) / z;
}
inline Cpx ramp_kernel(Cpx z) {
    if (std::abs(z) < 1e-2)
        return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0;
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace detail

inline std::vector<Mat> potential_moments(const dirac::PotentialGrid<double>& q, int jmax) {
    const double dx = 1.0 / double(q.m);
    std::vector<Mat> out(2 * jmax + 1);
    for (int j = -jmax; j <= jmax; ++j) {
        Cpx mu(0, -pi * double(j));
        Mat acc = Mat::Zero(q.r, q.r);
        for (Index cell = 0; cell < q.m; ++cell) {
            double x0 = double(cell) * dx;
            Cpx e0 = std::exp(mu * x0);
            Cpx z = mu * dx;
            Cpx i0 = e0 * dx * detail::expm1_over(z);             // int e^{mu x}
            Cpx i1 = e0 * dx * dx * detail::ramp_kernel(z);        // int (x-x0) e^{mu x}
            const Mat& q0 = q.values[cell];
            const Mat& q1 = q.values[cell + 1];
            acc += q0 * i0 + (q1 - q0) * (i1 / dx);
        }
        out[j + jmax] = acc;
    }
    return out;
}

struct GalerkinWindow {
    std::vector<double> lambdas;
    Mat alpha_sum;
};

inline std::map<int, GalerkinWindow> galerkin_spectrum(const dirac::PotentialGrid<double>& q,
                                                       int basis_n, int window_n) {
    const Index r = q.r;
    const int nb = 2 * basis_n + 1;
    const Index dim = Index(nb) * r;
    std::vector<Mat> mom = potential_moments(q, 2 * basis_n);

    std::vector<Mat> coupling(4 * basis_n + 1);
    for (int j = -2 * basis_n; j <= 2 * basis_n; ++j) {
        const Mat& mj = mom[j + 2 * basis_n];
        coupling[j + 2 * basis_n] = (mj + mj.adjoint()) / 2.0;
    }

    Mat g = Mat::Zero(dim, dim);
    for (int bi = 0; bi < nb; ++bi) {
        int ni = bi - basis_n;
        for (int bj = 0; bj < nb; ++bj) {
            int nj = bj - basis_n;
            g.block(Index(bi) * r, Index(bj) * r, r, r) = coupling[ni + nj + 2 * basis_n];
        }
        g.block(Index(bi) * r, Index(bi) * r, r, r) += pi * double(ni) * Mat::Identity(r, r);
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    std::map<int, GalerkinWindow> out;
    for (Index t = 0; t < dim; ++t) {
        double lam = es.eigenvalues()(t);
        int n = window_of(lam);
        if (std::abs(n) > window_n) continue;
        Vec w = Vec::Zero(r);
        for (int bi = 0; bi < nb; ++bi) w += es.eigenvectors().col(t).segment(Index(bi) * r, r);
        auto& win = out[n];
        if (win.alpha_sum.size() == 0) win.alpha_sum = Mat::Zero(r, r);
        win.lambdas.push_back(lam);
        win.alpha_sum += w * w.adjoint();
    }
    for (auto& [n, win] : out) std::sort(win.lambdas.begin(), win.lambdas.end());
    return out;
}

// Norming sums converge like 1/basis_n; one Richardson step cancels the
// leading term. Eigenvalues are taken from the finer run.
inline std::map<int, GalerkinWindow> galerkin_spectrum_rich(const dirac::PotentialGrid<double>& q,
                                                            int basis_n, int window_n) {
    auto coarse = galerkin_spectrum(q, basis_n, window_n);
    auto fine = galerkin_spectrum(q, 2 * basis_n, window_n);
    std::map<int, GalerkinWindow> out;
    for (auto& [n, fw] : fine) {
        auto it = coarse.find(n);
        if (it == coarse.end()) continue;
        GalerkinWindow w;
        w.lambdas = fw.lambdas;
        w.alpha_sum = 2.0 * fw.alpha_sum - it->second.alpha_sum;
        out[n] = std::move(w);
    }
    return out;
}

// ---- resolvent-equation closed forms -----------------------------------------

// Constant Hermitian kernel H = C: the row solution is t-independent,
// R(x, t) = -C (I + x C)^{-1}, and the potential reads q(x) = -i C (I + x C)^{-1}.
inline Mat constant_kernel_potential(const Mat& c, double x) {
    Index r = c.rows();
    return Cpx(0, -1) * c * (Mat::Identity(r, r) + x * c).inverse();
}

// One shifted eigenvalue (0 -> delta, identity norming) gives the separable
// kernel H(x) = (e^{2 i delta x} - 1) I and a two-term resolvent ansatz with
// potential q(x) = i [(1+x) - (1-x) e^{2 i delta x} - 2 g] / D, where
// g = (e^{2 i delta x} - 1)/(2 i delta) and D = 1 - x^2 + g^2 e^{-2 i delta x}.
inline Cpx shifted_kernel(double delta, double x) { return std::exp(Cpx(0, 2 * delta * x)) - 1.0; }

inline Cpx shifted_potential(double delta, double x) {
    Cpx e = std::exp(Cpx(0, 2 * delta * x));
    Cpx g = (e - 1.0) / Cpx(0, 2 * delta);
    Cpx d = 1.0 - x * x + g * g / e;
    return Cpx(0, 1) * ((1.0 + x) - (1.0 - x) * e - 2.0 * g) / d;
}

}  // namespace oracle
