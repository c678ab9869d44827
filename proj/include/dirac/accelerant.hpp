#pragma once

#include "dirac/spectral_data.hpp"

namespace dirac {

/// Uniform samples of an r-by-r kernel H on [-1, 1], nodes x_i = -1 + i/k.
/// Off-node values are read linearly; p is the inherited Lebesgue exponent.
template <class Real = double>
struct AccelerantGrid {
    Index r = 1;
    Index k = 1;
    Real p = Real(2);
    std::vector<CMat<Real>> values;  // 2k+1 samples

    static constexpr Real tol_sym = Real(1e-9);

    Real node(Index i) const { return Real(-1) + Real(i) / Real(k); }

    CMat<Real> eval(Real x) const {
        if (x <= Real(-1)) return values.front();
        if (x >= Real(1)) return values.back();
        Real s = (x + Real(1)) * Real(k);
        Index i = std::min<Index>(static_cast<Index>(s), 2 * k - 1);
        Real t = s - Real(i);
        return ((Real(1) - t) * values[i] + t * values[i + 1]).eval();
    }

    void validate() const {
        if (r < 1) throw ValidationError("accelerant", "r must be >= 1");
        if (k < 1) throw ValidationError("accelerant", "k must be >= 1");
        if (!(p >= Real(1))) throw ValidationError("accelerant", "p must be >= 1");
        if (static_cast<Index>(values.size()) != 2 * k + 1)
            throw ValidationError("accelerant", "expected 2k+1 samples");
        for (const auto& v : values) {
            if (v.rows() != r || v.cols() != r)
                throw ValidationError("accelerant", "sample is not r-by-r");
            if (!v.allFinite()) throw ValidationError("accelerant", "non-finite sample");
        }
    }
};

/// Largest node deviation of H(-x) from H(x)*.
template <class Real>
Real symmetry_defect(const AccelerantGrid<Real>& h) {
    h.validate();
    Real worst = Real(0);
    for (Index i = 0; i <= 2 * h.k; ++i) {
        const CMat<Real>& left = h.values[2 * h.k - i];  // sample at -x_i
        worst = std::max(worst,
                         operator_norm<Real>((left - h.values[i].adjoint()).eval()));
    }
    return worst;
}

/// Kernel of the spectral series: per window n, the data terms
/// e^{2 i lambda_j x} alpha_j minus the free term e^{2 i pi n x} I, summed over
/// |n| <= n_terms and sampled on the 2k+1 grid. Window-grouped summation is
/// essential: the series only converges when each window is paired with its
/// free counterpart. Every window in range must carry data.
template <class Real>
AccelerantGrid<Real> build_accelerant(const SpectralData<Real>& data, int n_terms, Index k,
                                      Real p = Real(2), int threads = 0) {
    data.validate();
    if (n_terms < 1) throw ValidationError("build_accelerant", "n_terms must be >= 1");
    if (k < 1) throw ValidationError("build_accelerant", "k must be >= 1");

    auto groups = data.by_window();
    for (int n = -n_terms; n <= n_terms; ++n)
        if (groups.find(n) == groups.end())
            throw ValidationError("build_accelerant",
                                  "data has no eigenvalue in window n = " + std::to_string(n) +
                                      "; cannot sum the series that far");

    AccelerantGrid<Real> h;
    h.r = data.r;
    h.k = k;
    h.p = p;
    h.values.assign(2 * k + 1, CMat<Real>());
    const CMat<Real> eye = CMat<Real>::Identity(data.r, data.r);
    parallel_for(2 * k + 1, threads, [&](Index i) {
        Real x = Real(-1) + Real(i) / Real(k);
        CMat<Real> acc = CMat<Real>::Zero(data.r, data.r);
        for (int n = -n_terms; n <= n_terms; ++n) {
            for (Index pos : groups.at(n))
                acc += std::exp(Complex<Real>(0, 2 * data.data[pos].lambda * x)) *
                       data.data[pos].alpha;
            acc -= std::exp(Complex<Real>(0, 2 * pi<Real> * Real(n) * x)) * eye;
        }
        h.values[i] = acc;
    });
    return h;
}

/// Trapezoid L_p norm of the kernel samples over [-1, 1].
template <class Real>
Real accelerant_lp_norm(const AccelerantGrid<Real>& h) {
    h.validate();
    Real dx = Real(1) / Real(h.k);
    Real acc = Real(0);
    for (Index i = 0; i <= 2 * h.k; ++i) {
        Real w = (i == 0 || i == 2 * h.k) ? dx / 2 : dx;
        acc += w * std::pow(operator_norm<Real>(h.values[i]), h.p);
    }
    return std::pow(acc, Real(1) / h.p);
}

/// Norm of the terms the series gains when the truncation radius grows from
/// n_terms-1 to n_terms (the tail-decay diagnostic).
template <class Real>
Real accelerant_increment_norm(const SpectralData<Real>& data, int n_terms, Index k,
                               Real p = Real(2)) {
    if (n_terms < 1) throw ValidationError("build_accelerant", "n_terms must be >= 1");
    auto groups = data.by_window();
    AccelerantGrid<Real> inc;
    inc.r = data.r;
    inc.k = k;
    inc.p = p;
    inc.values.assign(2 * k + 1, CMat<Real>());
    const CMat<Real> eye = CMat<Real>::Identity(data.r, data.r);
    for (Index i = 0; i <= 2 * k; ++i) {
        Real x = Real(-1) + Real(i) / Real(k);
        CMat<Real> acc = CMat<Real>::Zero(data.r, data.r);
        for (int n : {-n_terms, n_terms}) {
            auto it = groups.find(n);
            if (it == groups.end())
                throw ValidationError("build_accelerant",
                                      "data has no eigenvalue in window n = " + std::to_string(n));
            for (Index pos : it->second)
                acc += std::exp(Complex<Real>(0, 2 * data.data[pos].lambda * x)) *
                       data.data[pos].alpha;
            acc -= std::exp(Complex<Real>(0, 2 * pi<Real> * Real(n) * x)) * eye;
        }
        inc.values[i] = acc;
    }
    return accelerant_lp_norm(inc);
}

template <class Real>
Real accelerant_lp_distance(const AccelerantGrid<Real>& a, const AccelerantGrid<Real>& b) {
    a.validate();
    b.validate();
    if (a.r != b.r) throw ValidationError("accelerant", "dimension mismatch");
    AccelerantGrid<Real> diff;
    diff.r = a.r;
    diff.k = std::max(a.k, b.k);
    diff.p = a.p;
    diff.values.resize(2 * diff.k + 1);
    for (Index i = 0; i <= 2 * diff.k; ++i) {
        Real x = diff.node(i);
        diff.values[i] = a.eval(x) - b.eval(x);
    }
    return accelerant_lp_norm(diff);
}

/// Result of the positivity test for I + convolution-by-H on (0, 1).
template <class Real = double>
struct AccelerantCheck {
    bool accelerant = false;
    Real min_eigenvalue = Real(0);
    Real symmetry = Real(0);
    std::vector<Real> section_lengths;  // section endpoints a (operator on (0, a))
    std::vector<Real> profile;          // smallest eigenvalue per section
};

/// Nystrom test: discretize (Hf)(x) = int_0^1 H(x - t) f(t) dt on n+1 trapezoid
/// nodes, symmetrize with sqrt-weight scaling, and take the smallest eigenvalue
/// of I + H. Leading principal sections interlace, so the full matrix already
/// attains the minimum over all sections; the profile is kept for diagnosis.
template <class Real>
AccelerantCheck<Real> is_accelerant(const AccelerantGrid<Real>& h, Index n_sections = 200,
                                    Real pos_floor = Real(1e-8)) {
    h.validate();
    if (n_sections < 2) throw ValidationError("is_accelerant", "need at least two sections");
    AccelerantCheck<Real> out;
    out.symmetry = symmetry_defect(h);
    if (out.symmetry > AccelerantGrid<Real>::tol_sym)
        throw ValidationError("is_accelerant",
                              "kernel is not Hermitian-symmetric: defect " +
                                  std::to_string(out.symmetry));

    const Index r = h.r;
    const Index n = n_sections;
    const Real dx = Real(1) / Real(n);
    const Index dim = (n + 1) * r;
    RVec<Real> sqw(n + 1);
    for (Index i = 0; i <= n; ++i)
        sqw(i) = std::sqrt((i == 0 || i == n) ? dx / 2 : dx);

    CMat<Real> big(dim, dim);
    for (Index i = 0; i <= n; ++i)
        for (Index j = 0; j <= n; ++j)
            big.block(i * r, j * r, r, r) =
                sqw(i) * sqw(j) * h.eval(Real(i - j) * dx);
    big = hermitize<Real>((CMat<Real>::Identity(dim, dim) + big).eval());

    Eigen::SelfAdjointEigenSolver<CMat<Real>> full(big, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = full.eigenvalues().minCoeff();
    out.accelerant = out.min_eigenvalue > pos_floor;

    Index stride = std::max<Index>(1, n / 32);
    for (Index sec = stride; sec <= n; sec += stride) {
        Index d = (sec + 1) * r;
        Eigen::SelfAdjointEigenSolver<CMat<Real>> es(big.topLeftCorner(d, d).eval(),
                                                     Eigen::EigenvaluesOnly);
        out.section_lengths.push_back(Real(sec) * dx);
        out.profile.push_back(es.eigenvalues().minCoeff());
    }
    if (out.section_lengths.empty() || out.section_lengths.back() != Real(1)) {
        out.section_lengths.push_back(Real(1));
        out.profile.push_back(out.min_eigenvalue);
    }
    return out;
}

/// The 2r-by-2r kernel on [0,1]^2 built from half-sum/half-difference reads of
/// H; it represents the same quadratic form as I + convolution-by-H after a
/// unitary change of variables, so both positivity tests must agree.
template <class Real = double>
struct BlockKernelGrid {
    Index r = 1;
    Index m = 1;
    std::vector<CMat<Real>> values;  // (m+1)^2 samples, row-major in (x, t)

    const CMat<Real>& at(Index i, Index j) const { return values[i * (m + 1) + j]; }
};

template <class Real>
BlockKernelGrid<Real> block_kernel(const AccelerantGrid<Real>& h, Index m) {
    h.validate();
    if (m < 1) throw ValidationError("block_kernel", "m must be >= 1");
    BlockKernelGrid<Real> f;
    f.r = h.r;
    f.m = m;
    f.values.resize((m + 1) * (m + 1));
    const Index r = h.r;
    for (Index i = 0; i <= m; ++i) {
        Real x = Real(i) / Real(m);
        for (Index j = 0; j <= m; ++j) {
            Real t = Real(j) / Real(m);
            CMat<Real> blk(2 * r, 2 * r);
            blk.topLeftCorner(r, r) = h.eval((x - t) / 2);
            blk.topRightCorner(r, r) = h.eval((x + t) / 2);
            blk.bottomLeftCorner(r, r) = h.eval(-(x + t) / 2);
            blk.bottomRightCorner(r, r) = h.eval(-(x - t) / 2);
            f.values[i * (m + 1) + j] = (blk / Real(2)).eval();
        }
    }
    return f;
}

/// Smallest eigenvalue of I + the Nystrom discretization of the block kernel.
template <class Real>
Real block_kernel_min_eigenvalue(const BlockKernelGrid<Real>& f) {
    const Index r2 = 2 * f.r;
    const Index n = f.m;
    const Real dx = Real(1) / Real(n);
    const Index dim = (n + 1) * r2;
    RVec<Real> sqw(n + 1);
    for (Index i = 0; i <= n; ++i)
        sqw(i) = std::sqrt((i == 0 || i == n) ? dx / 2 : dx);
    CMat<Real> big(dim, dim);
    for (Index i = 0; i <= n; ++i)
        for (Index j = 0; j <= n; ++j)
            big.block(i * r2, j * r2, r2, r2) = sqw(i) * sqw(j) * f.at(i, j);
    big = hermitize<Real>((CMat<Real>::Identity(dim, dim) + big).eval());
    Eigen::SelfAdjointEigenSolver<CMat<Real>> es(big, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace dirac
