#pragma once

#include "dirac/spectral_data.hpp"

namespace dirac {

/// One spectral window seen as a frame: the scaled eigenvector columns of the
/// norming matrices in the window, the operator they diagonalize, and how far
/// that operator sits from its free counterpart pi*n*I.
template <class Real = double>
struct KadecWindow {
    int n = 0;
    int rank_total = 0;
    bool spanning = false;
    Real deviation = Real(0);       // ||A_n - pi n I||
    Real basis_norm = Real(0);      // ||B_n||
    Real basis_inv_norm = Real(0);  // ||B_n^{-1}||
    Real quad_contribution = Real(0);
};

/// Stability report for the windowed exponential system.
///
/// delta = sup_n ||A_n - pi n I|| controls the distance of the system from the
/// free orthonormal one; when every window spans C^r and delta < ln 2, the
/// perturbation bound e^delta - 1 < 1 certifies a Riesz basis. The quadratic
/// sequence reports, per |n|, the rotation-invariant squared distance of the
/// window's weighted exponentials from the free ones (a Bari-type diagnostic:
/// summability would be strictly stronger than the basis bound, so only the
/// partial sums and their trend are reported, never a conclusion).
template <class Real = double>
struct KadecReport {
    int n_min = 0;
    int n_max = 0;
    std::vector<KadecWindow<Real>> windows;
    std::vector<int> violations;  // windows whose frame does not span C^r
    Real delta = Real(0);
    Real b_bound = Real(0);  // max over windows of ||B_n|| + ||B_n^{-1}||
    bool r0_ok = false;
    bool r1_ok = false;
    Real perturbation = Real(0);  // e^delta - 1
    std::vector<Real> quad_partial_sums;  // cumulative over |n| = n_min, ...
    Real quad_trend = Real(0);
    bool quad_diverging = false;
};

namespace detail {

template <class Real>
KadecWindow<Real> kadec_window(const SpectralData<Real>& data, int n,
                               const std::vector<Index>& members) {
    const Index r = data.r;
    KadecWindow<Real> w;
    w.n = n;

    std::vector<Real> lambdas;
    std::vector<CVec<Real>> columns;
    for (Index pos : members) {
        const auto& d = data.data[pos];
        Eigen::SelfAdjointEigenSolver<CMat<Real>> es(d.alpha);
        Real top = es.eigenvalues().maxCoeff();
        for (Index k = 0; k < r; ++k) {
            Real sigma = es.eigenvalues()(k);
            if (sigma > SpectralData<Real>::rank_tol_rel * top) {
                lambdas.push_back(d.lambda);
                columns.push_back((std::sqrt(sigma) * es.eigenvectors().col(k)).eval());
            }
        }
    }
    w.rank_total = static_cast<int>(columns.size());
    w.spanning = (w.rank_total == static_cast<int>(r));

    CMat<Real> b(r, columns.size());
    for (size_t c = 0; c < columns.size(); ++c) b.col(c) = columns[c];

    // Rotation-invariant squared distance to the free window frame:
    // sum ||v_k||^2 + r - 2 * (nuclear norm of B * diag(sinc(lambda - pi n))).
    auto sinc = [](Real x) { return std::abs(x) < Real(1e-8) ? Real(1) : std::sin(x) / x; };
    CMat<Real> cross = b;
    for (size_t c = 0; c < columns.size(); ++c)
        cross.col(c) *= sinc(lambdas[c] - pi<Real> * Real(n));
    Eigen::JacobiSVD<CMat<Real>> cross_svd(cross);
    Real quad = Real(r) - 2 * cross_svd.singularValues().sum();
    for (const auto& v : columns) quad += v.squaredNorm();
    w.quad_contribution = std::max(Real(0), quad);

    if (w.spanning) {
        Eigen::JacobiSVD<CMat<Real>> svd(b);
        w.basis_norm = svd.singularValues()(0);
        Real smin = svd.singularValues()(r - 1);
        if (smin <= Real(0)) {
            w.spanning = false;
            return w;
        }
        w.basis_inv_norm = Real(1) / smin;
        CMat<Real> lam = CMat<Real>::Zero(r, r);
        for (Index c = 0; c < r; ++c) lam(c, c) = lambdas[c];
        CMat<Real> a_n = b * lam * b.inverse();
        w.deviation = operator_norm<Real>(
            (a_n - pi<Real> * Real(n) * CMat<Real>::Identity(r, r)).eval());
    }
    return w;
}

}  // namespace detail

/// Examine all fully covered windows with |n| >= n_min.
template <class Real>
KadecReport<Real> kadec_check(const SpectralData<Real>& data, int n_min = 0) {
    data.validate();
    if (n_min < 0) throw ValidationError("kadec_check", "n_min must be >= 0");
    int cover = std::min(-data.min_window(), data.max_window());
    if (cover < n_min)
        throw ValidationError("kadec_check", "data does not cover |n| >= " + std::to_string(n_min));

    KadecReport<Real> rep;
    rep.n_min = n_min;
    rep.n_max = cover;
    auto groups = data.by_window();

    std::vector<Real> per_abs_n;
    for (int an = n_min; an <= cover; ++an) {
        Real contribution = Real(0);
        for (int n : (an == 0 ? std::vector<int>{0} : std::vector<int>{-an, an})) {
            auto it = groups.find(n);
            if (it == groups.end()) {
                KadecWindow<Real> missing;
                missing.n = n;
                rep.windows.push_back(missing);
                rep.violations.push_back(n);
                continue;
            }
            KadecWindow<Real> w = detail::kadec_window(data, n, it->second);
            if (!w.spanning) rep.violations.push_back(n);
            contribution += w.quad_contribution;
            rep.windows.push_back(std::move(w));
        }
        per_abs_n.push_back(contribution);
    }

    rep.r0_ok = rep.violations.empty();
    for (const auto& w : rep.windows)
        if (w.spanning) {
            rep.delta = std::max(rep.delta, w.deviation);
            rep.b_bound = std::max(rep.b_bound, w.basis_norm + w.basis_inv_norm);
        }
    rep.r1_ok = rep.r0_ok && rep.delta < std::log(Real(2));
    rep.perturbation = std::expm1(rep.delta);

    Real running = Real(0);
    for (Real c : per_abs_n) {
        running += c;
        rep.quad_partial_sums.push_back(running);
    }
    // Trend of the raw contributions: outer-half mean over inner-half mean.
    size_t half = per_abs_n.size() / 2;
    if (half >= 1 && per_abs_n.size() >= 4) {
        Real inner = Real(0), outer = Real(0);
        for (size_t i = 0; i < half; ++i) inner += per_abs_n[i];
        for (size_t i = half; i < per_abs_n.size(); ++i) outer += per_abs_n[i];
        inner /= Real(half);
        outer /= Real(per_abs_n.size() - half);
        rep.quad_trend = inner > Real(1e-300) ? outer / inner : Real(0);
        rep.quad_diverging = rep.quad_trend >= Real(0.7);
    }
    return rep;
}

}  // namespace dirac
