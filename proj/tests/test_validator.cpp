#include "dirac/validator.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace dirac;

namespace {

// lambda_n = pi n + 0.3/(1+|n|), alpha_n = (1 + 0.2/(1+n^2)) I: admissible,
// visibly decaying tails in both components.
SpectralData<double> decaying_data(int N, Index r = 1) {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -N; n <= N; ++n) {
        double lam = pi<double> * n + 0.3 / (1.0 + std::abs(n));
        double a = 1.0 + 0.2 / (1.0 + double(n) * double(n));
        raw.emplace_back(lam, (a * CMat<double>::Identity(r, r)).eval());
    }
    return SpectralData<double>::ingest(r, std::move(raw));
}

SpectralData<double> shifted_data(double delta, int N, Index r = 1) {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -N; n <= N; ++n)
        raw.emplace_back(pi<double> * n + delta, CMat<double>::Identity(r, r));
    return SpectralData<double>::ingest(r, std::move(raw));
}

}  // namespace

TEST_CASE("free data score perfectly on every admissibility check") {
    auto data = free_spectral_data<double>(2, 8);
    auto tails = check_b1(data, 8);
    CHECK(tails.n_min == -8);
    REQUIRE(tails.lambda_tail.size() == 17);
    for (double v : tails.lambda_tail) CHECK(v == 0.0);
    for (double v : tails.alpha_tail) CHECK(v == 0.0);
    CHECK(tail_trend_ratio(tails.lambda_tail) == 0.0);

    auto census = check_b2(data, 8);
    CHECK(census.ok);
    CHECK(census.total == 17 * 2);
    CHECK(census.expected == 17 * 2);

    CHECK(check_b3_gram(data, 8) == doctest::Approx(1.0).epsilon(1e-12));

    auto tail = check_b4(data, 8, 64);
    CHECK(tail.tail_norm == 0.0);
    CHECK(tail.last_increment == 0.0);
    CHECK(accelerant_lp_norm(tail.h) == 0.0);
}

TEST_CASE("decaying perturbations give decaying tail trends") {
    auto data = decaying_data(8);
    auto tails = check_b1(data, 8);
    // window n carries exactly 0.3/(1+|n|) of eigenvalue offset
    CHECK(tails.lambda_tail[8] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(tails.lambda_tail[16] == doctest::Approx(0.3 / 9.0).epsilon(1e-12));
    CHECK(tails.alpha_tail[8] == doctest::Approx(0.2).epsilon(1e-12));
    double lt = tail_trend_ratio(tails.lambda_tail);
    double at = tail_trend_ratio(tails.alpha_tail);
    CHECK(lt < 0.7);
    CHECK(at < 0.7);
    CHECK(lt > 0.0);

    CHECK(check_b2(data, 8).ok);
    CHECK(check_b3_gram(data, 8) > 0.5);

    auto tail = check_b4(data, 8, 64);
    CHECK(tail.tail_norm > 0.0);
    CHECK(tail.last_increment > 0.0);
    CHECK(tail.last_increment < 0.15);
}

TEST_CASE("a uniform shift never decays") {
    auto data = shifted_data(0.5, 8);
    auto tails = check_b1(data, 8);
    CHECK(tail_trend_ratio(tails.lambda_tail) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rank census notices missing windows and rank-starved windows") {
    // drop the window-6 eigenvalue entirely
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -6; n <= 6; ++n)
        if (n != 6) raw.emplace_back(pi<double> * n, CMat<double>::Identity(1, 1));
    auto gap = SpectralData<double>::ingest(1, std::move(raw));
    auto census = check_b2(gap, 6);
    CHECK(!census.ok);
    CHECK(census.total == census.expected - 1);
    CHECK_THROWS_AS(check_b1(gap, 6), ValidationError);
    CHECK_THROWS_AS(check_b3_gram(gap, 6), ValidationError);

    // r = 2 with one window collapsed to a rank-1 norming matrix
    std::vector<std::pair<double, CMat<double>>> raw2;
    for (int n = -4; n <= 4; ++n) {
        CMat<double> a = CMat<double>::Identity(2, 2);
        if (n == 3) {
            CVec<double> v(2);
            v << 1.0, 1.0;
            a = v * v.adjoint();
        }
        raw2.emplace_back(pi<double> * n, a);
    }
    auto starved = SpectralData<double>::ingest(2, std::move(raw2));
    auto census2 = check_b2(starved, 4);
    CHECK(!census2.ok);
    CHECK(census2.total == census2.expected - 1);
    for (const auto& [n, rank] : census2.window_ranks)
        if (n == 3) CHECK(rank == 1);
}

TEST_CASE("trend ratio rejects sequences it cannot fold") {
    std::vector<double> even(4, 1.0);
    CHECK_THROWS_AS(tail_trend_ratio(even), ValidationError);
    std::vector<double> tiny(3, 1.0);
    CHECK_THROWS_AS(tail_trend_ratio(tiny), ValidationError);
}

TEST_CASE("near-coincident eigenvalues crush the Gram floor") {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -3; n <= 3; ++n)
        raw.emplace_back(pi<double> * n, CMat<double>::Identity(1, 1));
    raw.emplace_back(1e-6, CMat<double>::Identity(1, 1));
    auto data = SpectralData<double>::ingest(1, std::move(raw));
    double floor = check_b3_gram(data, 3);
    CHECK(floor >= 0.0);
    CHECK(floor < 1e-6);
}

TEST_CASE("series tail diagnostic needs room to halve") {
    CHECK_THROWS_AS(check_b4(free_spectral_data<double>(1, 8), 1, 32), ValidationError);
}

TEST_CASE("the combined report mirrors the individual checks") {
    auto data = decaying_data(8);
    auto rep = condition_report(data, 8, 8, 64);
    auto tails = check_b1(data, 8);
    CHECK(rep.n_min == tails.n_min);
    CHECK(rep.b1_lambda_tail == tails.lambda_tail);
    CHECK(rep.b1_alpha_tail == tails.alpha_tail);
    CHECK(rep.b1_lambda_trend == tail_trend_ratio(tails.lambda_tail));
    CHECK(rep.b1_alpha_trend == tail_trend_ratio(tails.alpha_tail));
    auto census = check_b2(data, 8);
    CHECK(rep.b2_ok == census.ok);
    CHECK(rep.b2_total == census.total);
    CHECK(rep.b2_expected == census.expected);
    CHECK(rep.b2_window_ranks == census.window_ranks);
    CHECK(rep.b3_min_singular == check_b3_gram(data, 8));
    auto tail = check_b4(data, 8, 64);
    CHECK(rep.b4_h_norm == accelerant_lp_norm(tail.h));
    CHECK(rep.b4_tail == tail.tail_norm);
    CHECK(rep.b4_last_increment == tail.last_increment);
}
