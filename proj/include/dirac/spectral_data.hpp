#pragma once

#include "dirac/core.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace dirac {

/// One eigenvalue with its norming matrix. rank counts the eigenvalues of
/// alpha above the relative rank tolerance and equals the multiplicity.
template <class Real = double>
struct SpectralDatum {
    Real lambda = Real(0);
    CMat<Real> alpha;
    int rank = 0;
};

/// Strictly increasing eigenvalue list with norming matrices.
///
/// anchor is the position of the entry labelled j = 0, i.e. the largest
/// eigenvalue <= 0; entries are labelled consecutively around it.
template <class Real = double>
struct SpectralData {
    Index r = 1;
    std::vector<SpectralDatum<Real>> data;
    Index anchor = 0;

    static constexpr Real psd_tol_rel = Real(1e-10);
    static constexpr Real rank_tol_rel = Real(1e-8);

    int label_of(Index pos) const { return static_cast<int>(pos - anchor); }

    int min_window() const { return window_index(data.front().lambda); }
    int max_window() const { return window_index(data.back().lambda); }

    /// Positions grouped by the window index of their eigenvalue.
    std::map<int, std::vector<Index>> by_window() const {
        std::map<int, std::vector<Index>> groups;
        for (Index i = 0; i < static_cast<Index>(data.size()); ++i)
            groups[window_index(data[i].lambda)].push_back(i);
        return groups;
    }

    void validate() const {
        if (r < 1) throw ValidationError("spectral_data", "r must be >= 1");
        if (data.size() < 2)
            throw ValidationError("spectral_data", "need at least two eigenvalues");
        for (size_t i = 0; i < data.size(); ++i) {
            const auto& d = data[i];
            if (d.alpha.rows() != r || d.alpha.cols() != r)
                throw ValidationError("spectral_data", "norming matrix is not r-by-r");
            if (!d.alpha.allFinite() || !std::isfinite(d.lambda))
                throw ValidationError("spectral_data", "non-finite spectral datum");
            if (d.rank < 1 || d.rank > r)
                throw ValidationError("spectral_data", "rank outside [1, r]");
            if (i > 0 && !(data[i - 1].lambda < d.lambda))
                throw ValidationError("spectral_data", "eigenvalues not strictly increasing");
        }
        if (anchor < 0 || anchor + 1 >= static_cast<Index>(data.size()))
            throw ValidationError("spectral_data", "anchor out of range");
        if (!(data[anchor].lambda <= Real(0) && data[anchor + 1].lambda > Real(0)))
            throw ValidationError("spectral_data", "labels must satisfy lambda_0 <= 0 < lambda_1");
    }

    /// Build from raw (lambda, alpha) pairs: sorts, Hermitizes, clips small
    /// negative eigenvalues, derives ranks and the anchor. Rejects genuinely
    /// non-PSD or zero norming matrices.
    static SpectralData ingest(Index r, std::vector<std::pair<Real, CMat<Real>>> raw) {
        SpectralData out;
        out.r = r;
        std::sort(raw.begin(), raw.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        out.data.reserve(raw.size());
        for (auto& [lambda, alpha] : raw) {
            CMat<Real> h = hermitize<Real>(alpha);
            Real scale = operator_norm<Real>(h);
            if (scale <= Real(0))
                throw ValidationError("spectral_data", "zero norming matrix");
            Eigen::SelfAdjointEigenSolver<CMat<Real>> es(h);
            if (es.eigenvalues().minCoeff() < -psd_tol_rel * scale)
                throw ValidationError("spectral_data",
                                      "norming matrix has a negative eigenvalue beyond tolerance");
            SpectralDatum<Real> d;
            d.lambda = lambda;
            d.alpha = psd_clip<Real>(h);
            d.rank = psd_rank<Real>(d.alpha, rank_tol_rel);
            out.data.push_back(std::move(d));
        }
        Index anchor = -1;
        for (Index i = 0; i < static_cast<Index>(out.data.size()); ++i)
            if (out.data[i].lambda <= Real(0)) anchor = i;
        if (anchor < 0)
            throw ValidationError("spectral_data", "no eigenvalue <= 0 to label as j = 0");
        out.anchor = anchor;
        out.validate();
        return out;
    }
};

/// Data of the potential-free operator over windows |n| <= N: eigenvalue pi*n
/// with identity norming matrix.
template <class Real = double>
SpectralData<Real> free_spectral_data(Index r, int N) {
    if (N < 1) throw ValidationError("spectral_data", "N must be >= 1");
    std::vector<std::pair<Real, CMat<Real>>> raw;
    for (int n = -N; n <= N; ++n)
        raw.emplace_back(pi<Real> * Real(n), CMat<Real>::Identity(r, r));
    return SpectralData<Real>::ingest(r, std::move(raw));
}

}  // namespace dirac
