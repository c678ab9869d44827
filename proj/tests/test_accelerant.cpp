#include "dirac/accelerant.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace dirac;
using Cpx = std::complex<double>;

namespace {

// Free data with the eigenvalue at zero moved to delta (identity norming
// throughout): the series collapses to the single term e^{2 i delta x} - 1.
SpectralData<double> shifted_zero_data(double delta, int N, Index r = 1) {
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -N; n <= N; ++n)
        raw.emplace_back(n == 0 ? delta : pi<double> * n, CMat<double>::Identity(r, r));
    return SpectralData<double>::ingest(r, std::move(raw));
}

AccelerantGrid<double> constant_grid(Cpx c, Index r, Index k) {
    AccelerantGrid<double> h;
    h.r = r;
    h.k = k;
    h.p = 2.0;
    h.values.assign(2 * k + 1, (c * CMat<double>::Identity(r, r)).eval());
    return h;
}

}  // namespace

TEST_CASE("accelerant grid node map, interpolation and validation") {
    AccelerantGrid<double> h;
    h.r = 1;
    h.k = 2;
    h.p = 2.0;
    for (int i = 0; i <= 4; ++i)
        h.values.push_back(CMat<double>::Constant(1, 1, double(i)));
    h.validate();
    CHECK(h.node(0) == doctest::Approx(-1.0));
    CHECK(h.node(2) == doctest::Approx(0.0));
    CHECK(h.node(4) == doctest::Approx(1.0));
    CHECK(h.eval(0.25)(0, 0).real() == doctest::Approx(2.5));
    CHECK(h.eval(-2.0)(0, 0).real() == doctest::Approx(0.0));  // clamped
    CHECK(h.eval(1.5)(0, 0).real() == doctest::Approx(4.0));

    AccelerantGrid<double> bad = h;
    bad.values.pop_back();
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("free data produce the zero kernel") {
    auto h = build_accelerant(free_spectral_data<double>(2, 6), 6, 40);
    for (const auto& v : h.values) CHECK(v.norm() == 0.0);
    CHECK(accelerant_lp_norm(h) == 0.0);
    CHECK(symmetry_defect(h) == 0.0);
}

TEST_CASE("one shifted eigenvalue gives the separable closed-form kernel") {
    auto data = shifted_zero_data(0.1, 8);
    auto h = build_accelerant(data, 8, 100);
    for (Index i = 0; i <= 200; ++i) {
        double x = h.node(i);
        CHECK(std::abs(h.values[i](0, 0) - oracle::shifted_kernel(0.1, x)) < 1e-14);
    }
    // frozen: H(0.37) = -0.0027367507873755637 + 0.07393248115597774 i
    CHECK(h.values[137](0, 0).real() == doctest::Approx(-0.0027367507873755637).epsilon(1e-12));
    CHECK(h.values[137](0, 0).imag() == doctest::Approx(0.07393248115597774).epsilon(1e-12));
}

TEST_CASE("series kernels are Hermitian-symmetric by construction") {
    std::vector<std::pair<double, CMat<double>>> raw;
    std::mt19937 gen(5);
    auto draw = [&] { return 2.0 * (double(gen()) / 4294967296.0) - 1.0; };
    for (int n = -5; n <= 5; ++n) {
        CMat<double> a(2, 2);
        Cpx off(0.1 * draw(), 0.1 * draw());
        a << 1.0 + 0.2 * draw(), off, std::conj(off), 1.0 + 0.2 * draw();
        raw.emplace_back(pi<double> * n + 0.3 * draw(), a);
    }
    auto data = SpectralData<double>::ingest(2, std::move(raw));
    auto h = build_accelerant(data, 5, 64);
    CHECK(symmetry_defect(h) < 1e-14);
    CHECK_NOTHROW(is_accelerant(h));
}

TEST_CASE("build_accelerant requires full window coverage") {
    auto data = free_spectral_data<double>(1, 4);
    CHECK_THROWS_AS(build_accelerant(data, 5, 32), ValidationError);
    CHECK_THROWS_AS(build_accelerant(data, 0, 32), ValidationError);
}

TEST_CASE("grid Lp norms and distances on constant kernels") {
    auto h = constant_grid(Cpx(0.5, 0.0), 1, 50);
    CHECK(accelerant_lp_norm(h) == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-12));
    h.p = 4.0;
    CHECK(accelerant_lp_norm(h) == doctest::Approx(0.5 * std::pow(2.0, 0.25)).epsilon(1e-12));
    h.p = 2.0;

    auto g = constant_grid(Cpx(0.2, 0.0), 1, 25);
    CHECK(accelerant_lp_distance(h, g) == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("outermost series increment vanishes exactly on free windows") {
    auto free6 = free_spectral_data<double>(1, 6);
    CHECK(accelerant_increment_norm(free6, 6, 32, 2.0) == 0.0);

    // scale the norming at |n| = 6 only: the increment is 0.2 e^{2 pi i 6 x}
    std::vector<std::pair<double, CMat<double>>> raw;
    for (int n = -6; n <= 6; ++n) {
        double scale = (n == 6 || n == -6) ? 1.2 : 1.0;
        raw.emplace_back(pi<double> * n, (scale * CMat<double>::Identity(1, 1)).eval());
    }
    auto data = SpectralData<double>::ingest(1, std::move(raw));
    // increment = 0.2 e^{12 pi i x} + 0.2 e^{-12 pi i x} = 0.4 cos(12 pi x),
    // whose L2 norm on (-1, 1) is 0.4; the trapezoid rule is exact here.
    double inc = accelerant_increment_norm(data, 6, 64, 2.0);
    CHECK(inc == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("positivity screen accepts H = 0.5 and rejects H = -1") {
    auto good = is_accelerant(constant_grid(Cpx(0.5, 0.0), 1, 100));
    CHECK(good.accelerant);
    CHECK(good.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(good.symmetry == 0.0);
    REQUIRE(!good.section_lengths.empty());
    CHECK(good.section_lengths.back() == doctest::Approx(1.0));
    for (double v : good.profile) CHECK(v >= good.min_eigenvalue - 1e-12);

    auto bad = is_accelerant(constant_grid(Cpx(-1.0, 0.0), 1, 100));
    CHECK(!bad.accelerant);
    CHECK(bad.min_eigenvalue == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("positivity screen insists on Hermitian symmetry") {
    AccelerantGrid<double> h;
    h.r = 1;
    h.k = 10;
    h.p = 2.0;
    for (int i = 0; i <= 20; ++i)
        h.values.push_back(CMat<double>::Constant(1, 1, (i - 10) / 10.0));  // odd, real
    CHECK(symmetry_defect(h) > 0.1);
    CHECK_THROWS_AS(is_accelerant(h), ValidationError);
}

TEST_CASE("block kernel layout folds the four shifted reads") {
    auto data = shifted_zero_data(0.1, 4);
    auto h = build_accelerant(data, 4, 80);
    auto f = block_kernel(h, 20);
    CHECK(f.r == 1);
    CHECK(f.m == 20);
    for (Index i : {Index(0), Index(7), Index(20)})
        for (Index j : {Index(0), Index(11), Index(20)}) {
            double x = double(i) / 20.0, t = double(j) / 20.0;
            CMat<double> want(2, 2);
            want << h.eval((x - t) / 2)(0, 0), h.eval((x + t) / 2)(0, 0),
                h.eval(-(x + t) / 2)(0, 0), h.eval(-(x - t) / 2)(0, 0);
            want *= 0.5;
            CHECK((f.at(i, j) - want).norm() < 1e-14);
        }
}

TEST_CASE("block kernel and convolution operator share their smallest eigenvalue") {
    auto data = shifted_zero_data(0.1, 4);
    auto h = build_accelerant(data, 4, 200);
    auto direct = is_accelerant(h, 200);
    double blk = block_kernel_min_eigenvalue(block_kernel(h, 200));
    CHECK(std::abs(direct.min_eigenvalue - blk) < 1e-4);
}

TEST_CASE("kernel build is deterministic across thread counts") {
    auto data = shifted_zero_data(0.2, 5);
    auto a = build_accelerant(data, 5, 64, 2.0, 1);
    auto b = build_accelerant(data, 5, 64, 2.0, 3);
    for (Index i = 0; i <= 128; ++i) CHECK((a.values[i] - b.values[i]).norm() == 0.0);
}
