#pragma once

#include "dirac/forward.hpp"
#include "dirac/krein.hpp"
#include "dirac/validator.hpp"

namespace dirac {

/// Knobs shared by the reconstruction and round-trip drivers.
///
/// N is the window radius for eigenvalue comparison; n_terms the truncation
/// radius of the kernel series (the first forward pass covers
/// max(N, n_terms) windows so the series can be summed that far); m and k the
/// potential and kernel grid resolutions.
template <class Real = double>
struct PipelineConfig {
    int N = 16;
    int n_terms = 32;
    Index m = 200;
    Index k = 200;
    Real p = Real(2);
    ForwardOptions<Real> forward;
    KreinOptions<Real> krein;

    void set_threads(int t) {
        forward.threads = t;
        krein.threads = t;
    }
    int threads() const { return forward.threads; }

    void validate() const {
        if (N < 1) throw ValidationError("pipeline", "N must be >= 1");
        if (n_terms < 1) throw ValidationError("pipeline", "n_terms must be >= 1");
        if (m < 8) throw ValidationError("pipeline", "m must be >= 8");
        if (k < 8) throw ValidationError("pipeline", "k must be >= 8");
        if (!(p >= Real(1))) throw ValidationError("pipeline", "p must be >= 1");
    }
};

/// Window-wise distance between two data sets over their common coverage:
/// eigenvalues are expanded by rank, sorted, paired (missing partners pair
/// against the window center), and summed per window; norming matrices are
/// compared through their window sums. Both numbers take the worst window.
template <class Real = double>
struct SpectralDistance {
    Real lambda_error = Real(0);
    Real alpha_error = Real(0);
    int window_lo = 0;
    int window_hi = 0;
};

template <class Real>
SpectralDistance<Real> compare_spectral_data(const SpectralData<Real>& a,
                                             const SpectralData<Real>& b) {
    a.validate();
    b.validate();
    if (a.r != b.r) throw ValidationError("compare_spectral_data", "dimension mismatch");
    SpectralDistance<Real> out;
    // Valid data straddle zero (lambda_0 <= 0 < lambda_1), so the common
    // range always contains window 0.
    out.window_lo = std::max(a.min_window(), b.min_window());
    out.window_hi = std::min(a.max_window(), b.max_window());

    auto ga = a.by_window();
    auto gb = b.by_window();
    auto expand = [](const SpectralData<Real>& d, const std::map<int, std::vector<Index>>& g,
                     int n) {
        std::vector<Real> out;
        auto it = g.find(n);
        if (it != g.end())
            for (Index pos : it->second)
                out.insert(out.end(), d.data[pos].rank, d.data[pos].lambda);
        return out;
    };

    for (int n = out.window_lo; n <= out.window_hi; ++n) {
        std::vector<Real> la = expand(a, ga, n);
        std::vector<Real> lb = expand(b, gb, n);
        size_t len = std::max(la.size(), lb.size());
        la.resize(len, pi<Real> * Real(n));
        lb.resize(len, pi<Real> * Real(n));
        Real lsum = Real(0);
        for (size_t i = 0; i < len; ++i) lsum += std::abs(la[i] - lb[i]);
        out.lambda_error = std::max(out.lambda_error, lsum);

        CMat<Real> sa = CMat<Real>::Zero(a.r, a.r);
        CMat<Real> sb = CMat<Real>::Zero(a.r, a.r);
        if (auto it = ga.find(n); it != ga.end())
            for (Index pos : it->second) sa += a.data[pos].alpha;
        if (auto it = gb.find(n); it != gb.end())
            for (Index pos : it->second) sb += b.data[pos].alpha;
        out.alpha_error = std::max(out.alpha_error, operator_norm<Real>((sa - sb).eval()));
    }
    return out;
}

/// Inverse pass: series kernel from the data, then the resolvent mapping.
/// A failing rank census is reported as a warning; a kernel that is not an
/// accelerant stops the reconstruction.
template <class Real>
PotentialGrid<Real> reconstruct(const SpectralData<Real>& data, const PipelineConfig<Real>& cfg,
                                AccelerantGrid<Real>* h_out = nullptr,
                                std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    data.validate();
    int cover = std::min(-data.min_window(), data.max_window());
    if (cover < cfg.n_terms)
        throw ValidationError("reconstruct", "data covers |n| <= " + std::to_string(cover) +
                                                 " but the series needs " +
                                                 std::to_string(cfg.n_terms));
    RankCensus<Real> census = check_b2(data, cfg.n_terms);
    if (!census.ok && warnings)
        warnings->push_back("rank census over |n| <= " + std::to_string(cfg.n_terms) + " is " +
                            std::to_string(census.total) + ", expected " +
                            std::to_string(census.expected));
    AccelerantGrid<Real> h =
        build_accelerant(data, cfg.n_terms, cfg.k, cfg.p, cfg.threads());
    PotentialGrid<Real> q;
    try {
        q = potential_from_accelerant(h, cfg.m, cfg.krein);
    } catch (const ValidationError& e) {
        throw ValidationError("reconstruct",
                              std::string("spectral data do not generate an accelerant: ") +
                                  e.what());
    }
    if (h_out) *h_out = std::move(h);
    return q;
}

template <class Real = double>
struct RoundTripReport {
    Real potential_error = Real(0);
    Real relative_potential_error = Real(0);
    Real lambda_error = Real(0);
    Real alpha_error = Real(0);
    int N = 0;
    int n_terms = 0;
    Index m = 0;
    Index k = 0;
    Real p = Real(2);
    KreinKernel kernel = KreinKernel::standard;
};

/// potential -> spectral data -> kernel -> potential -> spectral data, with
/// errors of both potentials (grid L_p) and both data sets (window-wise).
template <class Real>
RoundTripReport<Real> roundtrip(const PotentialGrid<Real>& q, const PipelineConfig<Real>& cfg,
                                PotentialGrid<Real>* q_out = nullptr,
                                AccelerantGrid<Real>* h_out = nullptr) {
    cfg.validate();
    q.validate();
    int cover = std::max(cfg.N, cfg.n_terms);
    SpectralData<Real> d1 = spectral_data(q, cover, cfg.forward);
    PotentialGrid<Real> q2 = reconstruct(d1, cfg, h_out);
    SpectralData<Real> d2 = spectral_data(q2, cfg.N, cfg.forward);

    RoundTripReport<Real> rep;
    rep.N = cfg.N;
    rep.n_terms = cfg.n_terms;
    rep.m = cfg.m;
    rep.k = cfg.k;
    rep.p = cfg.p;
    rep.kernel = cfg.krein.kernel;
    SpectralDistance<Real> dist = compare_spectral_data(d1, d2);
    rep.lambda_error = dist.lambda_error;
    rep.alpha_error = dist.alpha_error;
    rep.potential_error = lp_distance(q, q2);
    Real base = lp_norm(q);
    rep.relative_potential_error = base > Real(1e-14) ? rep.potential_error / base : rep.potential_error;
    if (q_out) *q_out = std::move(q2);
    return rep;
}

}  // namespace dirac
