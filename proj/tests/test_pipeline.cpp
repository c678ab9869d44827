#include "dirac/pipeline.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace dirac;
using Cpx = std::complex<double>;

namespace {

// bounds calibrated on the checked-in configurations; comfortable margins
constexpr double kConstRoundTripRel = 0.15;   // c = 0.2, n_terms = 12, m = k = 80
constexpr double kConstRoundTripLambda = 1e-3;
constexpr double kConstRoundTripAlpha = 1e-2;

SpectralData<double> shifted_zero_data(double delta, int N) {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -N; n <= N; ++n)
        raw.emplace_back(n == 0 ? delta : pi<double> * n, CMat<double>::Identity(1, 1));
    return SpectralData<double>::ingest(1, std::move(raw));
}

}  // namespace

TEST_CASE("spectral distance of a data set to itself is zero") {
    auto data = free_spectral_data<double>(2, 5);
    auto dist = compare_spectral_data(data, data);
    CHECK(dist.lambda_error == 0.0);
    CHECK(dist.alpha_error == 0.0);
    CHECK(dist.window_lo == -5);
    CHECK(dist.window_hi == 5);
}

TEST_CASE("unpaired eigenvalues are measured against the window center") {
    auto a = free_spectral_data<double>(1, 2);
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -2; n <= 2; ++n)
        raw.emplace_back(pi<double> * n, CMat<double>::Identity(1, 1));
    raw.emplace_back(0.2, CMat<double>::Identity(1, 1));  // extra mass in window 0
    auto b = SpectralData<double>::ingest(1, std::move(raw));
    auto dist = compare_spectral_data(a, b);
    CHECK(dist.lambda_error == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(dist.alpha_error == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("comparison validates its inputs") {
    // A single eigenvalue cannot carry the lambda_0 <= 0 < lambda_1 labeling;
    // assembled by hand because ingest would reject it outright.
    SpectralData<double> a;
    a.r = 1;
    SpectralDatum<double> d;
    d.lambda = -pi<double>;
    d.alpha = CMat<double>::Identity(1, 1);
    d.rank = 1;
    a.data.push_back(d);
    a.anchor = 0;
    CHECK_THROWS_AS(compare_spectral_data(a, free_spectral_data<double>(1, 2)),
                    ValidationError);
    CHECK_THROWS_AS(compare_spectral_data(free_spectral_data<double>(1, 2),
                                          free_spectral_data<double>(2, 2)),
                    ValidationError);
}

TEST_CASE("free data reconstruct to the zero potential") {
    PipelineConfig<double> cfg;
    cfg.N = 4;
    cfg.n_terms = 8;
    cfg.m = 40;
    cfg.k = 48;
    AccelerantGrid<double> h;
    std::vector<std::string> warnings;
    auto q = reconstruct(free_spectral_data<double>(1, 8), cfg, &h, &warnings);
    CHECK(warnings.empty());
    CHECK(q.m == 40);
    CHECK(lp_norm(q) < 1e-13);
    CHECK(accelerant_lp_norm(h) == 0.0);
    CHECK(h.k == 48);
}

TEST_CASE("reconstruction insists on full series coverage") {
    PipelineConfig<double> cfg;
    cfg.n_terms = 8;
    CHECK_THROWS_AS(reconstruct(free_spectral_data<double>(1, 4), cfg), ValidationError);
}

TEST_CASE("an over-ranked window is a warning, not a failure") {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -4; n <= 4; ++n)
        if (n != 0) raw.emplace_back(pi<double> * n, CMat<double>::Identity(1, 1));
    raw.emplace_back(-0.05, 0.5 * CMat<double>::Identity(1, 1));
    raw.emplace_back(0.05, 0.5 * CMat<double>::Identity(1, 1));
    auto data = SpectralData<double>::ingest(1, std::move(raw));

    PipelineConfig<double> cfg;
    cfg.N = 2;
    cfg.n_terms = 4;
    cfg.m = 20;
    cfg.k = 32;
    std::vector<std::string> warnings;
    auto q = reconstruct(data, cfg, static_cast<AccelerantGrid<double>*>(nullptr), &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("rank census") != std::string::npos);
    CHECK(q.m == 20);
}

TEST_CASE("negative spectral mass stops the reconstruction by name") {
    // norming matrices far below identity push I + H negative
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -4; n <= 4; ++n)
        raw.emplace_back(pi<double> * n, 1e-10 * CMat<double>::Identity(1, 1));
    auto data = SpectralData<double>::ingest(1, std::move(raw));
    PipelineConfig<double> cfg;
    cfg.n_terms = 4;
    cfg.m = 20;
    cfg.k = 32;
    try {
        reconstruct(data, cfg);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("do not generate an accelerant") != std::string::npos);
    }
}

TEST_CASE("one-term kernel data invert to the separable closed form") {
    auto data = shifted_zero_data(0.1, 4);
    PipelineConfig<double> cfg;
    cfg.N = 2;
    cfg.n_terms = 4;
    cfg.m = 100;
    cfg.k = 100;
    auto q = reconstruct(data, cfg);
    double worst = 0.0;
    for (Index i = 0; i <= q.m; ++i)
        worst = std::max(worst,
                         std::abs(q.values[i](0, 0) - oracle::shifted_potential(0.1, q.node(i))));
    CHECK(worst < 1e-6);
}

TEST_CASE("constant potential survives a full round trip") {
    auto q = make_test_potential<double>(TestPotential::constant, 1, 80,
                                         {/*amplitude=*/0.2, /*seed=*/1, /*p=*/2.0});
    PipelineConfig<double> cfg;
    cfg.N = 4;
    cfg.n_terms = 12;
    cfg.m = 80;
    cfg.k = 80;
    cfg.set_threads(1);
    PotentialGrid<double> q2;
    auto rep = roundtrip(q, cfg, &q2);
    CHECK(rep.relative_potential_error < kConstRoundTripRel);
    CHECK(rep.lambda_error < kConstRoundTripLambda);
    CHECK(rep.alpha_error < kConstRoundTripAlpha);
    CHECK(rep.N == 4);
    CHECK(rep.n_terms == 12);
    CHECK(rep.kernel == KreinKernel::standard);
    CHECK(q2.m == 80);
    CHECK(rep.potential_error == doctest::Approx(lp_distance(q, q2)).epsilon(1e-12));
}

TEST_CASE("configuration validation and thread plumbing") {
    PipelineConfig<double> cfg;
    cfg.N = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.N = 4;
    cfg.n_terms = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.n_terms = 4;
    cfg.m = 7;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.m = 20;
    cfg.k = 7;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.k = 20;
    cfg.p = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.p = 2.0;
    CHECK_NOTHROW(cfg.validate());

    cfg.set_threads(3);
    CHECK(cfg.threads() == 3);
    CHECK(cfg.forward.threads == 3);
    CHECK(cfg.krein.threads == 3);
}
