#pragma once

#include "dirac/accelerant.hpp"
#include "dirac/potential.hpp"

#include <random>

namespace dirac {

/// Which kernel the resolvent equation convolves against inside the integral:
///   standard: R(x,t) + H(x-t) + int_0^x R(x,s) H(s-t) ds = 0
///   paper:    R(x,t) + H(x-t) + int_0^x R(x,s) H(x-s) ds = 0
/// The standard displacement kernel is the default; the second variant keeps
/// the integral kernel pinned to x and is exposed for comparison only.
enum class KreinKernel { standard, paper };

inline const char* to_string(KreinKernel k) {
    return k == KreinKernel::standard ? "standard" : "paper";
}

template <class Real = double>
struct KreinOptions {
    KreinKernel kernel = KreinKernel::standard;
    /// Skip the accelerant precondition (diagnostics only).
    bool force = false;
    /// Certified bound on the residual of each solved row.
    Real residual_cap = Real(1e-10);
    Real pos_floor = Real(1e-8);
    Index check_sections = 200;
    int threads = 0;
};

/// Lower-triangular grid of the resolvent kernel R(x_i, t_j), 0 <= t_j <= x_i,
/// on the uniform m-grid of [0, 1].
template <class Real = double>
struct KreinTriangle {
    Index r = 1;
    Index m = 1;
    std::vector<CMat<Real>> values;  // (m+1)(m+2)/2 blocks, rows by x index

    Index idx(Index i, Index j) const { return i * (i + 1) / 2 + j; }
    const CMat<Real>& at(Index i, Index j) const { return values[idx(i, j)]; }
    CMat<Real>& at(Index i, Index j) { return values[idx(i, j)]; }
};

/// Solve the resolvent equation row by row: for each x_i the trapezoid
/// discretization couples the i+1 unknown blocks of the row through
/// U (I + M) = -B, solved directly and certified by its residual.
template <class Real>
KreinTriangle<Real> solve_krein(const AccelerantGrid<Real>& h, Index m,
                                const KreinOptions<Real>& opt = {}) {
    h.validate();
    if (m < 1) throw ValidationError("solve_krein", "m must be >= 1");
    if (!opt.force) {
        AccelerantCheck<Real> chk = is_accelerant(h, opt.check_sections, opt.pos_floor);
        if (!chk.accelerant)
            throw ValidationError("solve_krein",
                                  "kernel is not an accelerant (smallest eigenvalue of I + H is " +
                                      std::to_string(chk.min_eigenvalue) +
                                      "); the resolvent equation has no stable solution");
    }

    const Index r = h.r;
    const Real dx = Real(1) / Real(m);
    KreinTriangle<Real> out;
    out.r = r;
    out.m = m;
    out.values.assign((m + 1) * (m + 2) / 2, CMat<Real>());
    out.at(0, 0) = (-h.eval(Real(0))).eval();

    parallel_for(m, opt.threads, [&](Index row) {
        const Index i = row + 1;
        const Real x = Real(i) * dx;
        const Index nb = i + 1;  // blocks in this row
        RVec<Real> w(nb);
        for (Index s = 0; s < nb; ++s) w(s) = (s == 0 || s == i) ? dx / 2 : dx;

        CMat<Real> sys(nb * r, nb * r);
        CMat<Real> rhs(r, nb * r);
        for (Index s = 0; s < nb; ++s) {
            Real ts = Real(s) * dx;
            for (Index j = 0; j < nb; ++j) {
                Real tj = Real(j) * dx;
                CMat<Real> blk = (opt.kernel == KreinKernel::standard)
                                     ? h.eval(ts - tj)
                                     : h.eval(x - ts);
                sys.block(s * r, j * r, r, r) = w(s) * blk;
                if (s == 0) rhs.block(0, j * r, r, r) = h.eval(x - tj);
            }
        }
        sys += CMat<Real>::Identity(nb * r, nb * r);

        // Row equation U * sys = -rhs, solved through the transposed system.
        Eigen::PartialPivLU<CMat<Real>> lu(sys.transpose().eval());
        CMat<Real> ut = lu.solve((-rhs.transpose()).eval());
        CMat<Real> u = ut.transpose().eval();
        if (!u.allFinite())
            throw NumericError("solve_krein",
                               "singular section at x = " + std::to_string(x));
        Real resid = ((u * sys + rhs).template lpNorm<Eigen::Infinity>());
        Real scale = Real(1) + rhs.template lpNorm<Eigen::Infinity>();
        if (resid > opt.residual_cap * scale)
            throw NumericError("solve_krein", "residual " + std::to_string(resid) +
                                                  " above cap at x = " + std::to_string(x));
        for (Index j = 0; j < nb; ++j)
            out.at(i, j) = u.middleCols(j * r, r).eval();
    });
    return out;
}

/// Potential samples q(x) = i R(x, 0) read off a solved resolvent triangle.
template <class Real>
PotentialGrid<Real> potential_from_resolvent(const AccelerantGrid<Real>& h,
                                             const KreinTriangle<Real>& rk) {
    if (h.r != rk.r) throw ValidationError("potential_from_resolvent", "dimension mismatch");
    PotentialGrid<Real> q;
    q.r = h.r;
    q.m = rk.m;
    q.p = h.p;
    q.values.resize(rk.m + 1);
    for (Index i = 0; i <= rk.m; ++i)
        q.values[i] = (Complex<Real>(0, 1) * rk.at(i, 0)).eval();
    q.validate();
    return q;
}

/// The inverse-problem mapping: potential samples q(x) = i R(x, 0) from the
/// resolvent kernel of H.
template <class Real>
PotentialGrid<Real> potential_from_accelerant(const AccelerantGrid<Real>& h, Index m,
                                              const KreinOptions<Real>& opt = {}) {
    return potential_from_resolvent(h, solve_krein(h, m, opt));
}

/// A-posteriori check: largest residual of the resolvent equation at seeded
/// random off-node points, with R read bilinearly on its triangle and the
/// integral taken by trapezoid on the solver grid.
template <class Real>
Real krein_residual(const AccelerantGrid<Real>& h, const KreinTriangle<Real>& rk,
                    int probe_count = 64, std::uint32_t seed = 1) {
    h.validate();
    if (h.r != rk.r) throw ValidationError("krein_residual", "dimension mismatch");
    if (probe_count < 1) throw ValidationError("krein_residual", "probe_count must be >= 1");
    if (rk.m < 3) throw ValidationError("krein_residual", "triangle grid too coarse to probe");
    const Index m = rk.m;
    const Real dx = Real(1) / Real(m);
    std::mt19937 gen(seed);
    auto draw = [&] { return Real(gen()) / Real(4294967296.0); };

    // Row-wise linear reads of R between the x-rows bracketing x; each row is
    // interpolated in t on its own nodes. Probes keep t below the lower row's
    // reach so no extrapolation happens.
    auto read_row = [&](Index row, Real t) -> CMat<Real> {
        if (row == 0) return rk.at(0, 0);
        Index j = std::min<Index>(static_cast<Index>(t / dx), row - 1);
        Real frac = t / dx - Real(j);
        return ((Real(1) - frac) * rk.at(row, j) + frac * rk.at(row, j + 1)).eval();
    };
    auto read_r = [&](Real x, Real t) {
        Index i = std::min<Index>(static_cast<Index>(x / dx), m - 1);
        Real frac = x / dx - Real(i);
        return ((Real(1) - frac) * read_row(i, t) + frac * read_row(i + 1, t)).eval();
    };

    Real worst = Real(0);
    for (int pct = 0; pct < probe_count; ++pct) {
        // x in [2 dx, 1) so the bracketing row below x has at least two nodes
        Real x = (Real(2) + (Real(m) - Real(2.05)) * draw()) * dx;
        Index i = static_cast<Index>(x / dx);
        Real tmax = Real(i) * dx;  // keep t within the bracketing rows' reach
        Real t = tmax * Real(0.98) * draw();

        CMat<Real> acc = CMat<Real>::Zero(h.r, h.r);
        // trapezoid over [0, x]: solver nodes plus the partial last cell
        Index full = i;
        for (Index sidx = 0; sidx <= full; ++sidx) {
            Real sv = Real(sidx) * dx;
            Real w = (sidx == 0 || sidx == full) ? dx / 2 : dx;
            acc += w * (read_r(x, sv) * h.eval(sv - t));
        }
        Real rest = x - Real(full) * dx;
        if (rest > Real(0)) {
            Real sv0 = Real(full) * dx;
            acc += rest / 2 *
                   (read_r(x, sv0) * h.eval(sv0 - t) + read_r(x, x) * h.eval(x - t));
        }
        CMat<Real> resid = read_r(x, t) + h.eval(x - t) + acc;
        worst = std::max(worst, operator_norm<Real>(resid));
    }
    return worst;
}

}  // namespace dirac
