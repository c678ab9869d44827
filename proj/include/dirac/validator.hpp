#pragma once

#include "dirac/accelerant.hpp"
#include "dirac/spectral_data.hpp"

namespace dirac {

/// Per-window deviation sequences of condition (B1): for each window n the
/// summed eigenvalue offsets |pi n - lambda_j| and the norming-sum deviation
/// ||I - sum alpha_j||. Both must fade as |n| grows for admissible data.
template <class Real = double>
struct WindowTails {
    int n_min = 0;  // sequences run over n = n_min .. n_min + size - 1
    std::vector<Real> lambda_tail;
    std::vector<Real> alpha_tail;
};

template <class Real>
WindowTails<Real> check_b1(const SpectralData<Real>& data, int N) {
    data.validate();
    if (N < 1) throw ValidationError("check_b1", "N must be >= 1");
    auto groups = data.by_window();
    WindowTails<Real> out;
    out.n_min = -N;
    out.lambda_tail.resize(2 * N + 1);
    out.alpha_tail.resize(2 * N + 1);
    const CMat<Real> eye = CMat<Real>::Identity(data.r, data.r);
    for (int n = -N; n <= N; ++n) {
        auto it = groups.find(n);
        if (it == groups.end())
            throw ValidationError("check_b1",
                                  "window n = " + std::to_string(n) + " carries no eigenvalue");
        Real lam = Real(0);
        CMat<Real> asum = CMat<Real>::Zero(data.r, data.r);
        for (Index pos : it->second) {
            lam += std::abs(pi<Real> * Real(n) - data.data[pos].lambda);
            asum += data.data[pos].alpha;
        }
        out.lambda_tail[n + N] = lam;
        out.alpha_tail[n + N] = operator_norm<Real>((eye - asum).eval());
    }
    return out;
}

/// Fold a (-N..N)-indexed sequence by |n| and compare half-means: returns
/// mean(outer half) / mean(inner half). Small values mean decaying tails;
/// returns 0 when the inner mean already vanishes.
template <class Real>
Real tail_trend_ratio(const std::vector<Real>& seq) {
    if (seq.size() < 5 || seq.size() % 2 == 0)
        throw ValidationError("check_b1", "trend needs an odd-length sequence over -N..N");
    int N = (static_cast<int>(seq.size()) - 1) / 2;
    std::vector<Real> folded(N + 1);
    folded[0] = seq[N];
    for (int k = 1; k <= N; ++k) folded[k] = (seq[N + k] + seq[N - k]) / Real(2);
    int half = (N + 1) / 2;
    Real inner = Real(0), outer = Real(0);
    for (int k = 0; k <= half; ++k) inner += folded[k];
    for (int k = half + 1; k <= N; ++k) outer += folded[k];
    inner /= Real(half + 1);
    outer /= Real(N - half);
    if (inner <= Real(1e-300)) return Real(0);
    return outer / inner;
}

/// Rank census of condition (B2): summed ranks over |n| <= N must equal
/// (2N+1) r exactly.
template <class Real = double>
struct RankCensus {
    bool ok = false;
    long total = 0;
    long expected = 0;
    std::vector<std::pair<int, int>> window_ranks;  // (n, summed rank)
};

template <class Real>
RankCensus<Real> check_b2(const SpectralData<Real>& data, int N) {
    data.validate();
    if (N < 1) throw ValidationError("check_b2", "N must be >= 1");
    auto groups = data.by_window();
    RankCensus<Real> out;
    out.expected = static_cast<long>(2 * N + 1) * static_cast<long>(data.r);
    for (int n = -N; n <= N; ++n) {
        int rank = 0;
        auto it = groups.find(n);
        if (it != groups.end())
            for (Index pos : it->second) rank += data.data[pos].rank;
        out.window_ranks.emplace_back(n, rank);
        out.total += rank;
    }
    out.ok = (out.total == out.expected);
    return out;
}

/// Minimal-completeness proxy of condition (B3): smallest singular value of
/// the normalized Gram matrix of the weighted exponentials
/// e^{i lambda_j t} v_{j,k} on (-1, 1), where v_{j,k} are the scaled
/// eigenvector columns of alpha_j. Inner products are analytic:
/// (e^{i a t} v, e^{i b t} w) = 2 sinc(a - b) (w* v), here normalized by 1/2.
template <class Real>
Real check_b3_gram(const SpectralData<Real>& data, int N) {
    data.validate();
    if (N < 1) throw ValidationError("check_b3_gram", "N must be >= 1");
    auto groups = data.by_window();
    std::vector<Real> lambdas;
    std::vector<CVec<Real>> vectors;
    for (int n = -N; n <= N; ++n) {
        auto it = groups.find(n);
        if (it == groups.end())
            throw ValidationError("check_b3_gram",
                                  "window n = " + std::to_string(n) + " carries no eigenvalue");
        for (Index pos : it->second) {
            const auto& d = data.data[pos];
            Eigen::SelfAdjointEigenSolver<CMat<Real>> es(d.alpha);
            for (Index k = 0; k < data.r; ++k) {
                Real sigma = es.eigenvalues()(k);
                if (sigma > SpectralData<Real>::rank_tol_rel * es.eigenvalues().maxCoeff()) {
                    lambdas.push_back(d.lambda);
                    vectors.push_back((std::sqrt(sigma) * es.eigenvectors().col(k)).eval());
                }
            }
        }
    }
    const Index dim = static_cast<Index>(lambdas.size());
    if (dim == 0) throw ValidationError("check_b3_gram", "no directions above rank tolerance");

    auto sinc = [](Real x) { return std::abs(x) < Real(1e-8) ? Real(1) : std::sin(x) / x; };
    CMat<Real> gram(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j)
            gram(i, j) =
                sinc(lambdas[i] - lambdas[j]) * (vectors[j].dot(vectors[i]));
    // Normalize by the diagonal so the free system scores exactly 1.
    RVec<Real> d = gram.diagonal().real().cwiseMax(Real(1e-300)).cwiseSqrt();
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) gram(i, j) /= d(i) * d(j);
    Eigen::SelfAdjointEigenSolver<CMat<Real>> es(hermitize<Real>(gram), Eigen::EigenvaluesOnly);
    return std::max(Real(0), es.eigenvalues().minCoeff());
}

/// Cauchy-tail diagnostic of condition (B4): builds the series kernel at
/// n_terms and n_terms/2 and reports the grid L_p distance between them plus
/// the norm of the outermost term.
template <class Real = double>
struct SeriesTail {
    AccelerantGrid<Real> h;
    Real tail_norm = Real(0);
    Real last_increment = Real(0);
};

template <class Real>
SeriesTail<Real> check_b4(const SpectralData<Real>& data, int n_terms, Index k, Real p = Real(2),
                          int threads = 0) {
    if (n_terms < 2) throw ValidationError("check_b4", "n_terms must be >= 2");
    SeriesTail<Real> out;
    out.h = build_accelerant(data, n_terms, k, p, threads);
    AccelerantGrid<Real> half = build_accelerant(data, n_terms / 2, k, p, threads);
    out.tail_norm = accelerant_lp_distance(out.h, half);
    out.last_increment = accelerant_increment_norm(data, n_terms, k, p);
    return out;
}

/// Combined report over all four admissibility checks.
template <class Real = double>
struct ConditionReport {
    int n_min = 0;
    std::vector<Real> b1_lambda_tail;
    std::vector<Real> b1_alpha_tail;
    Real b1_lambda_trend = Real(0);
    Real b1_alpha_trend = Real(0);
    bool b2_ok = false;
    long b2_total = 0;
    long b2_expected = 0;
    std::vector<std::pair<int, int>> b2_window_ranks;
    Real b3_min_singular = Real(0);
    Real b4_h_norm = Real(0);
    Real b4_tail = Real(0);
    Real b4_last_increment = Real(0);
};

template <class Real>
ConditionReport<Real> condition_report(const SpectralData<Real>& data, int N, int n_terms,
                                       Index k, Real p = Real(2), int threads = 0) {
    ConditionReport<Real> rep;
    WindowTails<Real> tails = check_b1(data, N);
    rep.n_min = tails.n_min;
    rep.b1_lambda_tail = tails.lambda_tail;
    rep.b1_alpha_tail = tails.alpha_tail;
    rep.b1_lambda_trend = tail_trend_ratio(tails.lambda_tail);
    rep.b1_alpha_trend = tail_trend_ratio(tails.alpha_tail);
    RankCensus<Real> census = check_b2(data, N);
    rep.b2_ok = census.ok;
    rep.b2_total = census.total;
    rep.b2_expected = census.expected;
    rep.b2_window_ranks = census.window_ranks;
    rep.b3_min_singular = check_b3_gram(data, N);
    SeriesTail<Real> tail = check_b4(data, n_terms, k, p, threads);
    rep.b4_h_norm = accelerant_lp_norm(tail.h);
    rep.b4_tail = tail.tail_norm;
    rep.b4_last_increment = tail.last_increment;
    return rep;
}

}  // namespace dirac
