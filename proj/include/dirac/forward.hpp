#pragma once

#include "dirac/potential.hpp"
#include "dirac/spectral_data.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <optional>

namespace dirac {

template <class Real = double>
struct ForwardOptions {
    /// Reject propagation for |Im lambda| beyond this (exponential growth guard).
    Real imag_cap = Real(10);
    /// Step count is max(m, ceil(|lambda| * steps_scale)).
    Real steps_scale = Real(8) / pi<Real>;
    /// Fixed step count for every evaluation (0: derive from |lambda|). Pinned
    /// on residue circles so all samples share one discretization.
    Index fixed_steps = 0;
    /// Half-height of the rectangular counting contour around each window.
    Real contour_half_height = Real(0.6);
    /// Refined roots closer than this collapse into one eigenvalue.
    Real cluster_tol = Real(1e-7);
    /// Refined roots must sit this close to the real axis.
    Real tol_real = Real(1e-8);
    /// Condition cap for inverting the characteristic matrix.
    Real cond_cap = Real(1e12);
    /// Stop doubling residue-circle nodes once successive values agree to this.
    Real circle_tol = Real(1e-9);
    /// Accept a residue quadrature whose node-doubling difference stops
    /// shrinking below this: tight circles between near-degenerate eigenvalues
    /// bottom out on propagation noise well above circle_tol.
    Real circle_stall_tol = Real(1e-6);
    int min_circle_nodes = 64;
    int max_circle_nodes = 1 << 14;
    int threads = 0;
};

namespace detail {

/// exp(A) for 2x2 via the trace-split closed form, general size via Pade.
template <class Real>
CMat<Real> matrix_exp(const CMat<Real>& a) {
    if (a.rows() != 2) return a.exp();
    using C = Complex<Real>;
    C mu = (a(0, 0) + a(1, 1)) / Real(2);
    CMat<Real> b = a;
    b(0, 0) -= mu;
    b(1, 1) -= mu;
    C d2 = b(0, 0) * b(0, 0) + b(0, 1) * b(1, 0);  // b is traceless, so b^2 = d2 * I
    C delta = std::sqrt(d2);
    C ch, shc;
    if (std::abs(delta) < Real(1e-3)) {
        ch = C(1) + d2 / Real(2) + d2 * d2 / Real(24);
        shc = C(1) + d2 / Real(6) + d2 * d2 / Real(120);
    } else {
        ch = std::cosh(delta);
        shc = std::sinh(delta) / delta;
    }
    CMat<Real> out(2, 2);
    out(0, 0) = ch + shc * b(0, 0);
    out(0, 1) = shc * b(0, 1);
    out(1, 0) = shc * b(1, 0);
    out(1, 1) = ch + shc * b(1, 1);
    return (std::exp(mu) * out).eval();
}

template <class Real>
Index step_count(const SystemCoefficients<Real>& sys, Complex<Real> lambda,
                 const ForwardOptions<Real>& opt) {
    if (opt.fixed_steps > 0) return std::max<Index>(sys.m, opt.fixed_steps);
    Real by_freq = std::ceil(std::abs(lambda) * opt.steps_scale);
    return std::max<Index>(sys.m, static_cast<Index>(std::max(Real(1), by_freq)));
}

template <class Real>
CMat<Real> signed_rows(const CMat<Real>& b, Index r) {
    CMat<Real> jb = b;
    jb.bottomRows(r) = -jb.bottomRows(r);  // left-multiply by diag(I, -I)
    return jb;
}

}  // namespace detail

/// Fundamental solution u(1, lambda) of u' = i(lambda J - J bq(x)) u, u(0) = I,
/// where J = diag(I, -I). One step per cell using the exact exponential of the
/// midpoint-frozen coefficient; the free case is reproduced exactly.
template <class Real>
CMat<Real> propagate(const SystemCoefficients<Real>& sys, Complex<Real> lambda,
                     const ForwardOptions<Real>& opt = {}) {
    if (std::abs(lambda.imag()) > opt.imag_cap)
        throw NumericError("propagate", "|Im lambda| = " + std::to_string(std::abs(lambda.imag())) +
                                            " exceeds cap " + std::to_string(opt.imag_cap));
    const Index r = sys.r;
    const Index d = 2 * r;
    const Index n = detail::step_count(sys, lambda, opt);
    const Real h = Real(1) / Real(n);
    const Complex<Real> ih(0, h);

    CMat<Real> jdiag = CMat<Real>::Identity(d, d);
    jdiag.bottomRightCorner(r, r) *= Real(-1);

    CMat<Real> u = CMat<Real>::Identity(d, d);
    CMat<Real> a(d, d);
    for (Index k = 0; k < n; ++k) {
        Real xm = (Real(k) + Real(0.5)) * h;
        a = ih * (lambda * jdiag - detail::signed_rows(sys.bq_eval(xm), r));
        u = (detail::matrix_exp<Real>(a) * u).eval();
    }
    if (!u.allFinite())
        throw NumericError("propagate", "non-finite propagator at lambda = (" +
                                            std::to_string(lambda.real()) + ", " +
                                            std::to_string(lambda.imag()) + ")");
    return u;
}

/// u(1, lambda) together with its lambda-derivative, propagated through the
/// block-triangular augmented system d/dx [u; v] = [[A, 0], [iJ, A]] [u; v].
template <class Real>
std::pair<CMat<Real>, CMat<Real>> propagate_with_slope(const SystemCoefficients<Real>& sys,
                                                       Complex<Real> lambda,
                                                       const ForwardOptions<Real>& opt = {}) {
    if (std::abs(lambda.imag()) > opt.imag_cap)
        throw NumericError("propagate", "|Im lambda| exceeds cap");
    const Index r = sys.r;
    const Index d = 2 * r;
    const Index n = detail::step_count(sys, lambda, opt);
    const Real h = Real(1) / Real(n);
    const Complex<Real> ih(0, h);

    CMat<Real> jdiag = CMat<Real>::Identity(d, d);
    jdiag.bottomRightCorner(r, r) *= Real(-1);

    CMat<Real> big = CMat<Real>::Zero(2 * d, 2 * d);
    big.bottomLeftCorner(d, d) = ih * jdiag;

    CMat<Real> uv = CMat<Real>::Zero(2 * d, d);
    uv.topRows(d) = CMat<Real>::Identity(d, d);
    for (Index k = 0; k < n; ++k) {
        Real xm = (Real(k) + Real(0.5)) * h;
        CMat<Real> a = ih * (lambda * jdiag - detail::signed_rows(sys.bq_eval(xm), r));
        big.topLeftCorner(d, d) = a;
        big.bottomRightCorner(d, d) = a;
        uv = (big.exp() * uv).eval();
    }
    if (!uv.allFinite()) throw NumericError("propagate", "non-finite derivative propagation");
    return {uv.topRows(d).eval(), uv.bottomRows(d).eval()};
}

/// The r-by-r characteristic pair at lambda, and optionally the Weyl matrix.
template <class Real = double>
struct CharacteristicSample {
    Complex<Real> lambda;
    CMat<Real> s;
    CMat<Real> c;
    std::optional<CMat<Real>> m;
};

/// s = a u theta a*, c = a u a*: entire matrix functions whose kernels/values
/// encode the boundary problem. For the free operator s = sin(lambda) I and
/// c = cos(lambda) I.
template <class Real>
CharacteristicSample<Real> characteristic_matrices(const SystemCoefficients<Real>& sys,
                                                   Complex<Real> lambda,
                                                   const ForwardOptions<Real>& opt = {}) {
    CMat<Real> u = propagate(sys, lambda, opt);
    CharacteristicSample<Real> out;
    out.lambda = lambda;
    out.s = (sys.a * u * sys.theta * sys.a.adjoint()).eval();
    out.c = (sys.a * u * sys.a.adjoint()).eval();
    return out;
}

/// Weyl matrix m = -s^{-1} c. Fails when s is singular to working precision,
/// i.e. at (or numerically at) an eigenvalue.
template <class Real>
CharacteristicSample<Real> weyl_function(const SystemCoefficients<Real>& sys,
                                         Complex<Real> lambda,
                                         const ForwardOptions<Real>& opt = {}) {
    CharacteristicSample<Real> sample = characteristic_matrices(sys, lambda, opt);
    Eigen::JacobiSVD<CMat<Real>> svd(sample.s);
    const auto& sv = svd.singularValues();
    // The floor is taken against max(sigma_max, 1) rather than sigma_max
    // alone: near an eigenvalue of a 1x1 (or fully degenerate) system every
    // singular value collapses together, so the condition number stays near 1
    // while the matrix itself is numerically zero.
    if (!(sv(sv.size() - 1) > std::max(sv(0), Real(1)) / opt.cond_cap))
        throw NumericError("weyl_function",
                           "characteristic matrix numerically singular at lambda = (" +
                               std::to_string(lambda.real()) + ", " +
                               std::to_string(lambda.imag()) + "); likely an eigenvalue");
    sample.m = (-sample.s.partialPivLu().solve(sample.c)).eval();
    return sample;
}

namespace detail {

template <class Real>
CMat<Real> adjugate(const CMat<Real>& s) {
    const Index n = s.rows();
    if (n == 1) return CMat<Real>::Identity(1, 1);
    CMat<Real> adj(n, n);
    CMat<Real> minor(n - 1, n - 1);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            for (Index p = 0, pm = 0; p < n; ++p) {
                if (p == j) continue;
                for (Index q = 0, qm = 0; q < n; ++q) {
                    if (q == i) continue;
                    minor(pm, qm) = s(p, q);
                    ++qm;
                }
                ++pm;
            }
            Real sign = ((i + j) % 2 == 0) ? Real(1) : Real(-1);
            adj(i, j) = sign * minor.determinant();
        }
    return adj;
}

template <class Real>
struct DetSlope {
    Complex<Real> det;
    Complex<Real> slope;
};

/// det s and its lambda-derivative via d(det) = tr(adj(s) ds).
template <class Real>
DetSlope<Real> det_slope(const SystemCoefficients<Real>& sys, Complex<Real> lambda,
                         const ForwardOptions<Real>& opt) {
    auto [u, du] = propagate_with_slope(sys, lambda, opt);
    CMat<Real> s = (sys.a * u * sys.theta * sys.a.adjoint()).eval();
    CMat<Real> ds = (sys.a * du * sys.theta * sys.a.adjoint()).eval();
    return {s.determinant(), (adjugate<Real>(s) * ds).trace()};
}

/// Phase increment of f along [a, b], bisecting until each piece turns by
/// less than ~pi/4 and keeps a tame modulus ratio.
template <class Real, class F>
Real phase_increment(F& f, Complex<Real> a, Complex<Real> b, Complex<Real> fa, Complex<Real> fb,
                     int depth, Real min_mod) {
    Real dphi = std::arg(fb / fa);
    Real dmod = std::abs(std::log(std::abs(fb) / std::abs(fa)));
    if ((std::abs(dphi) < Real(0.75) && dmod < Real(1.5)) || depth <= 0) return dphi;
    Complex<Real> mid = (a + b) / Real(2);
    Complex<Real> fm = f(mid);
    if (std::abs(fm) < min_mod)
        throw NumericError("locate_eigenvalues", "counting contour passes through a root");
    return phase_increment(f, a, mid, fa, fm, depth - 1, min_mod) +
           phase_increment(f, mid, b, fm, fb, depth - 1, min_mod);
}

/// Zero count (with multiplicity) of f inside the closed polyline through the
/// given corners, by adaptively tracked argument winding.
template <class Real, class F>
int winding_count(F&& f, const std::vector<Complex<Real>>& corners, int samples_per_edge,
                  int depth) {
    std::vector<Complex<Real>> pts;
    const size_t nc = corners.size();
    for (size_t e = 0; e < nc; ++e) {
        Complex<Real> a = corners[e];
        Complex<Real> b = corners[(e + 1) % nc];
        for (int k = 0; k < samples_per_edge; ++k)
            pts.push_back(a + (b - a) * (Real(k) / Real(samples_per_edge)));
    }
    std::vector<Complex<Real>> fv(pts.size());
    Real peak = Real(0);
    for (size_t i = 0; i < pts.size(); ++i) {
        fv[i] = f(pts[i]);
        peak = std::max(peak, std::abs(fv[i]));
    }
    if (peak <= Real(0))
        throw NumericError("locate_eigenvalues", "characteristic determinant vanishes on contour");
    Real min_mod = peak * Real(1e-13);
    for (const auto& v : fv)
        if (std::abs(v) < min_mod)
            throw NumericError("locate_eigenvalues", "counting contour passes through a root");
    Real total = Real(0);
    for (size_t i = 0; i < pts.size(); ++i) {
        size_t j = (i + 1) % pts.size();
        total += phase_increment(f, pts[i], pts[j], fv[i], fv[j], depth, min_mod);
    }
    Real w = total / (2 * pi<Real>);
    int count = static_cast<int>(std::lround(w));
    if (std::abs(w - Real(count)) > Real(0.25))
        throw NumericError("locate_eigenvalues",
                           "argument winding did not settle near an integer (" +
                               std::to_string(w) + ")");
    return count;
}

}  // namespace detail

/// A located eigenvalue: real part and multiplicity (zero order of det s).
template <class Real = double>
struct EigenvalueCluster {
    Real lambda = Real(0);
    int multiplicity = 1;
};

namespace detail {

struct WindowRetry : std::exception {
    const char* what() const noexcept override { return "window retry"; }
};

template <class Real>
std::vector<EigenvalueCluster<Real>> locate_window(const SystemCoefficients<Real>& sys, int n,
                                                   const ForwardOptions<Real>& opt, Real height,
                                                   int base_samples) {
    const Real center = pi<Real> * Real(n);
    const Real half = pi<Real> / 2;
    auto f = [&](Complex<Real> z) {
        return characteristic_matrices(sys, z, opt).s.determinant();
    };

    std::vector<Complex<Real>> corners = {
        {center - half, -height}, {center + half, -height},
        {center + half, height},  {center - half, height}};
    int count = winding_count<Real>(f, corners, base_samples, 24);
    if (count == 0) return {};

    // Winding count over [a, b] with a box whose height tracks the width: the
    // roots are real, and a slim contour keeps the modulus guard meaningful
    // when shrinking onto a multiple root.
    auto boxed_count = [&](Real a, Real b) {
        Real h = std::min(std::max(Real(0.75) * (b - a), Real(1e-6)), height);
        std::vector<Complex<Real>> box = {{a, -h}, {b, -h}, {b, h}, {a, h}};
        return winding_count<Real>(f, box, 8, 24);
    };

    // Newton with clipped steps; quadratic at the simple roots it is used on.
    auto newton = [&](Real seed, Real a, Real b) -> std::optional<Complex<Real>> {
        Complex<Real> z(seed, 0);
        const Real pad = Real(0.05) * (b - a);
        for (int it = 0; it < 60; ++it) {
            auto [det, slope] = det_slope(sys, z, opt);
            if (!(std::abs(slope) > Real(0))) return std::nullopt;
            Complex<Real> step = det / slope;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
            Real sz = std::abs(step);
            if (sz > Real(0.25)) step *= Real(0.25) / sz;
            z -= step;
            if (z.real() < a - pad || z.real() > b + pad || std::abs(z.imag()) > Real(0.25))
                return std::nullopt;
            if (sz < Real(1e-12) * (Real(1) + std::abs(z))) return z;
        }
        return std::nullopt;
    };

    // Mean of the w roots inside the circle, from the zeroth and first moments
    // of the logarithmic derivative; the zeroth moment doubles as a guard that
    // the circle holds exactly the expected mass.
    auto centroid = [&](Real mid, Real w_expected,
                        Real rad) -> std::optional<Complex<Real>> {
        const int nodes = 48;
        Complex<Real> p0(0, 0), p1(0, 0);
        for (int k = 0; k < nodes; ++k) {
            Real th = 2 * pi<Real> * Real(k) / Real(nodes);
            Complex<Real> dz = rad * Complex<Real>(std::cos(th), std::sin(th));
            Complex<Real> z = Complex<Real>(mid, 0) + dz;
            auto [det, slope] = det_slope(sys, z, opt);
            if (!(std::abs(det) > Real(0))) return std::nullopt;
            Complex<Real> g = slope / det * dz;
            p0 += g;
            p1 += g * z;
        }
        p0 /= Real(nodes);
        p1 /= Real(nodes);
        if (std::abs(p0 - Complex<Real>(w_expected, 0)) > Real(0.2)) return std::nullopt;
        return p1 / p0;
    };

    std::vector<EigenvalueCluster<Real>> found;
    auto emit = [&](Complex<Real> z, int w) {
        if (std::abs(z.imag()) > opt.tol_real)
            throw NumericError("locate_eigenvalues",
                               "refined root off the real axis by " +
                                   std::to_string(std::abs(z.imag())));
        found.push_back({z.real(), w});
    };

    // Subdivision by certified counts: every span carries the exact number of
    // roots it holds, children always account for the whole parent. Spans with
    // one root go to Newton; multi-root spans contract onto the common dip of
    // |det| when there is one, or are cut where |det| is largest so the cut
    // passes between roots.
    struct Span {
        Real a, b;
        int w;
    };
    std::vector<Span> work{{center - half, center + half, count}};
    int guard = 0;
    while (!work.empty()) {
        if (++guard > 96 * count) throw WindowRetry{};
        Span s = work.back();
        work.pop_back();
        const Real width = s.b - s.a;

        const int probes = 15;
        std::array<Real, probes> ts, gs;
        int dip = 0;
        for (int i = 0; i < probes; ++i) {
            ts[i] = s.a + width * Real(i + 1) / Real(probes + 1);
            gs[i] = std::abs(f(Complex<Real>(ts[i], 0)));
            if (gs[i] < gs[dip]) dip = i;
        }

        if (s.w == 1) {
            if (auto z = newton(ts[dip], s.a, s.b)) {
                emit(*z, 1);
                continue;
            }
        }

        // The narrowest width a zero of order w can be certified at: below it
        // |det| ~ width^w sinks into evaluation noise.
        Real resolved = std::max(opt.cluster_tol, std::pow(Real(1e-13), Real(1) / Real(s.w)));
        if (width <= resolved) {
            bool placed = false;
            for (Real factor : {Real(4), Real(2), Real(1)}) {
                if (auto z = centroid((s.a + s.b) / 2, Real(s.w), factor * width)) {
                    emit(*z, s.w);
                    placed = true;
                    break;
                }
            }
            if (!placed) throw WindowRetry{};
            continue;
        }

        // Contraction: if a band around the deepest dip still holds every
        // root, narrow onto it and skip the bisection.
        if (s.w > 1) {
            Real step = width / Real(probes + 1);
            Real lo = std::max(s.a, ts[dip] - 2 * step);
            Real hi = std::min(s.b, ts[dip] + 2 * step);
            try {
                if (boxed_count(lo, hi) == s.w) {
                    work.push_back({lo, hi, s.w});
                    continue;
                }
            } catch (const NumericError&) {
                // contour grazed a root; fall through to the cut
            }
        }

        std::array<int, probes> order;
        for (int i = 0; i < probes; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int x, int y) { return gs[x] > gs[y]; });
        bool cut_done = false;
        for (int c = 0; c < 3 && !cut_done; ++c) {
            Real t = ts[order[c]];
            try {
                int wl = boxed_count(s.a, t);
                if (wl > 0) work.push_back({s.a, t, wl});
                if (s.w - wl > 0) work.push_back({t, s.b, s.w - wl});
                cut_done = true;
            } catch (const NumericError&) {
                continue;
            }
        }
        if (!cut_done) throw WindowRetry{};
    }

    std::sort(found.begin(), found.end(),
              [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
    std::vector<EigenvalueCluster<Real>> merged;
    for (const auto& c : found) {
        if (!merged.empty() && c.lambda - merged.back().lambda <= opt.cluster_tol) {
            auto& m = merged.back();
            Real wsum = Real(m.multiplicity + c.multiplicity);
            m.lambda = (m.lambda * Real(m.multiplicity) + c.lambda * Real(c.multiplicity)) / wsum;
            m.multiplicity += c.multiplicity;
        } else {
            merged.push_back(c);
        }
    }
    return merged;
}

}  // namespace detail

/// All eigenvalues in the windows (pi*n - pi/2, pi*n + pi/2] for |n| <= N.
///
/// Per window: a rectangular argument-winding count of det s, then subdivision
/// of the real segment into spans with certified counts -- simple roots are
/// polished by Newton, unresolvably tight groups are reported as one cluster
/// with the summed multiplicity at the contour centroid. A window whose
/// subdivision stalls is retried once with a perturbed contour, then reported
/// as an error.
template <class Real>
std::vector<EigenvalueCluster<Real>> locate_eigenvalues(const SystemCoefficients<Real>& sys, int N,
                                                        const ForwardOptions<Real>& opt = {}) {
    if (N < 1) throw ValidationError("locate_eigenvalues", "N must be >= 1");
    std::vector<std::vector<EigenvalueCluster<Real>>> per_window(2 * N + 1);
    parallel_for(2 * N + 1, opt.threads, [&](Index slot) {
        int n = static_cast<int>(slot) - N;
        int samples = 12 + 6 * static_cast<int>(sys.r);
        try {
            per_window[slot] = detail::locate_window(sys, n, opt, opt.contour_half_height, samples);
        } catch (const detail::WindowRetry&) {
            try {
                per_window[slot] = detail::locate_window(
                    sys, n, opt, opt.contour_half_height * Real(1.19), 2 * samples);
            } catch (const detail::WindowRetry&) {
                throw NumericError("locate_eigenvalues",
                                   "winding count and refined roots disagree in window n = " +
                                       std::to_string(n));
            }
        }
    });
    std::vector<EigenvalueCluster<Real>> all;
    for (const auto& w : per_window) all.insert(all.end(), w.begin(), w.end());
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    for (size_t i = 0; i + 1 < all.size(); ++i)
        if (!(all[i].lambda < all[i + 1].lambda))
            throw NumericError("locate_eigenvalues", "coincident roots across windows");
    for (const auto& c : all)
        if (c.multiplicity < 1 || c.multiplicity > sys.r)
            throw NumericError("locate_eigenvalues", "multiplicity outside [1, r]");
    return all;
}

/// Norming matrix at an isolated eigenvalue: minus the residue of the Weyl
/// matrix, computed by trapezoid quadrature on a circle of the given radius
/// with node doubling until two successive values agree. Eigen-directions of
/// the result below its own quadrature accuracy are zeroed, so rank counts
/// downstream see only certified structure.
template <class Real>
CMat<Real> norming_matrix(const SystemCoefficients<Real>& sys, Real lambda, Real radius,
                          const ForwardOptions<Real>& opt = {}) {
    if (!(radius > Real(0)))
        throw ValidationError("norming_matrix", "radius must be positive");
    if (radius >= opt.imag_cap)
        throw ValidationError("norming_matrix", "radius exceeds the propagation cap");

    // One discretization for the whole circle: the step ladder jumps at the
    // integer crossings of |lambda| * steps_scale, and a circle straddling one
    // would mix two discrete operators into a discontinuous integrand (O(1/K)
    // quadrature error and a spurious residue direction of the size of the
    // discretization gap).
    ForwardOptions<Real> copt = opt;
    copt.fixed_steps = static_cast<Index>(
        std::max(Real(1), std::ceil((std::abs(lambda) + radius) * opt.steps_scale)));

    auto m_at = [&](Real theta) {
        Complex<Real> z = Complex<Real>(lambda, 0) +
                          radius * Complex<Real>(std::cos(theta), std::sin(theta));
        try {
            return *weyl_function(sys, z, copt).m;
        } catch (const NumericError& e) {
            throw NumericError("norming_matrix",
                               std::string("residue circle touches an eigenvalue: ") + e.what());
        }
    };

    int k = opt.min_circle_nodes;
    std::vector<CMat<Real>> samples(k);
    for (int i = 0; i < k; ++i) samples[i] = m_at(2 * pi<Real> * Real(i) / Real(k));

    auto quadrature = [&](const std::vector<CMat<Real>>& s) {
        CMat<Real> acc = CMat<Real>::Zero(sys.r, sys.r);
        for (size_t i = 0; i < s.size(); ++i) {
            Real th = 2 * pi<Real> * Real(i) / Real(s.size());
            acc += s[i] * std::exp(Complex<Real>(0, th));
        }
        return (-radius / Real(s.size()) * acc).eval();
    };

    // Eigenvalues of the result below (a safety factor times) the final
    // doubling difference are quadrature noise, not spectral weight; zeroing
    // them keeps the rank of a stalled residue honest.
    auto clean = [](const CMat<Real>& a, Real noise) {
        Eigen::SelfAdjointEigenSolver<CMat<Real>> es(hermitize<Real>(a));
        RVec<Real> ev = es.eigenvalues();
        for (Index i = 0; i < ev.size(); ++i)
            if (ev(i) < std::max(Real(10) * noise, Real(0))) ev(i) = Real(0);
        return (es.eigenvectors() * ev.template cast<std::complex<Real>>().asDiagonal() *
                es.eigenvectors().adjoint())
            .eval();
    };

    CMat<Real> prev = quadrature(samples);
    Real prev_diff = std::numeric_limits<Real>::infinity();
    while (k < opt.max_circle_nodes) {
        std::vector<CMat<Real>> doubled(2 * k);
        for (int i = 0; i < k; ++i) {
            doubled[2 * i] = samples[i];
            doubled[2 * i + 1] = m_at(2 * pi<Real> * (Real(i) + Real(0.5)) / Real(k));
        }
        samples = std::move(doubled);
        k *= 2;
        CMat<Real> next = quadrature(samples);
        Real diff = operator_norm<Real>((next - prev).eval());
        Real scale = std::max(Real(1), operator_norm<Real>(next));
        prev = next;
        if (diff <= opt.circle_tol * scale) return clean(prev, diff);
        // Trapezoid sums of analytic integrands gain accuracy geometrically per
        // doubling, so a difference that has stopped halving is the sample
        // noise floor (tight circles divide by a near-vanishing s), not a
        // quadrature that still has structure to resolve.
        if (diff >= prev_diff / 2 && diff <= opt.circle_stall_tol * scale)
            return clean(prev, diff);
        prev_diff = diff;
    }
    throw NumericError("norming_matrix", "residue quadrature did not converge at lambda = " +
                                             std::to_string(lambda));
}

/// Full direct-problem output for windows |n| <= N: located eigenvalues with
/// norming matrices, ranks checked against the located multiplicities.
template <class Real>
SpectralData<Real> spectral_data(const PotentialGrid<Real>& q, int N,
                                 const ForwardOptions<Real>& opt = {}) {
    SystemCoefficients<Real> sys = augment(q);
    std::vector<EigenvalueCluster<Real>> roots = locate_eigenvalues(sys, N, opt);
    if (roots.size() < 2) throw NumericError("spectral_data", "fewer than two eigenvalues found");

    std::vector<std::pair<Real, CMat<Real>>> raw(roots.size());
    parallel_for(static_cast<Index>(roots.size()), opt.threads, [&](Index j) {
        Real gap = pi<Real>;
        if (j > 0) gap = std::min(gap, roots[j].lambda - roots[j - 1].lambda);
        if (j + 1 < static_cast<Index>(roots.size()))
            gap = std::min(gap, roots[j + 1].lambda - roots[j].lambda);
        Real radius = std::min(Real(0.4) * gap, Real(0.4));
        CMat<Real> alpha = norming_matrix(sys, roots[j].lambda, radius, opt);
        int rank = psd_rank<Real>(alpha, SpectralData<Real>::rank_tol_rel);
        if (rank != roots[j].multiplicity)
            throw NumericError("spectral_data",
                               "norming matrix rank " + std::to_string(rank) +
                                   " does not match located multiplicity " +
                                   std::to_string(roots[j].multiplicity) + " at lambda = " +
                                   std::to_string(roots[j].lambda));
        raw[j] = {roots[j].lambda, std::move(alpha)};
    });
    return SpectralData<Real>::ingest(q.r, std::move(raw));
}

}  // namespace dirac
