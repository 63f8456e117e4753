#include <catch2/catch.hpp>

#include <cmath>

#include "totpos/quadrature.hpp"
#include "totpos/rng.hpp"
#include "totpos/synth.hpp"

using namespace totpos;

TEST_CASE("the rng is a pure function of (seed, counter)") {
    SeededRng a(42), b(42), c(43);
    for (int k = 0; k < 1000; ++k) {
        CHECK(a.next_u64() == b.next_u64());
    }
    bool differs = false;
    SeededRng a2(42);
    for (int k = 0; k < 10; ++k) differs = differs || (a2.next_u64() != c.next_u64());
    CHECK(differs);
    CHECK(std::string(SeededRng::algorithm) == "splitmix64");
}

TEST_CASE("rng doubles live in [0,1) and normals have sane moments") {
    SeededRng rng(7);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = rng.next_normal();
        sum += z;
        sq += z * z;
    }
    CHECK(sum / n == Approx(0.0).margin(0.02));
    CHECK(sq / n == Approx(1.0).margin(0.02));
}

TEST_CASE("the supermodular family") {
    const PmfGrid uniform = make_supermodular_pmf(4, 1.0);
    for (double v : uniform.mass().data()) CHECK(v == Approx(1.0 / 16.0).margin(1e-14));

    const PmfGrid p = make_supermodular_pmf(16, std::exp(2.0));
    CHECK(corner_ratio_log(p) == Approx(2.0).margin(1e-10));
    CHECK(is_mtp2(p, 1e-15).feasible);

    double total = 0.0;
    double mn = 1.0;
    for (double v : p.mass().data()) {
        total += v;
        mn = std::min(mn, v);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(mn > 0.0);

    CHECK_THROWS_AS(make_supermodular_pmf(1, 2.0), InvalidParameters);
    CHECK_THROWS_AS(make_supermodular_pmf(4, 0.5), InvalidParameters);
}

TEST_CASE("multinomial sampling") {
    SeededRng rng(5);
    const PmfGrid uniform = make_supermodular_pmf(4, 1.0);

    CHECK(sample_multinomial(uniform, 0, rng).total() == 0);

    Mat<double> point(2, 2, 0.0);
    point(1, 0) = 1.0;
    SeededRng rng2(6);
    const CountGrid all = sample_multinomial(PmfGrid(point), 500, rng2);
    CHECK(all(1, 0) == 500);
    CHECK(all.total() == 500);

    SeededRng rng3(7);
    const CountGrid big = sample_multinomial(uniform, 100000, rng3);
    CHECK(big.total() == 100000);
    const double band = 5.0 * std::sqrt(100000.0 * (1.0 / 16.0) * (15.0 / 16.0));
    for (auto c : big.counts().data())
        CHECK(std::abs(static_cast<double>(c) - 100000.0 / 16.0) <= band);
}

TEST_CASE("multinomial replicate means match the cell probabilities") {
    const PmfGrid p = make_supermodular_pmf(4, std::exp(1.2));
    const int reps = 500;
    const std::int64_t n = 10000;
    Mat<double> mean(4, 4, 0.0);
    for (int r = 0; r < reps; ++r) {
        SeededRng rng(1000 + r);
        const CountGrid y = sample_multinomial(p, n, rng);
        for (std::size_t k = 0; k < mean.size(); ++k)
            mean.data()[k] += static_cast<double>(y.counts().data()[k]) / reps;
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double expect = static_cast<double>(n) * p(i, j);
            const double band = 5.0 * std::sqrt(static_cast<double>(n) * p(i, j) * (1.0 - p(i, j)) / reps);
            CHECK(std::abs(mean(i, j) - expect) <= band);
        }
}

TEST_CASE("sampling is reproducible bit for bit") {
    SeededRng a(99), b(99);
    const PmfGrid p = make_supermodular_pmf(8, std::exp(0.7));
    CHECK(sample_multinomial(p, 5000, a).counts() == sample_multinomial(p, 5000, b).counts());

    SeededRng c(123), d(123);
    const SamplePoints s1 = sample_truncated_gaussian(2000, c);
    const SamplePoints s2 = sample_truncated_gaussian(2000, d);
    REQUIRE(s1.pts.size() == s2.pts.size());
    for (std::size_t k = 0; k < s1.pts.size(); ++k) {
        CHECK(s1.pts[k][0] == s2.pts[k][0]);
        CHECK(s1.pts[k][1] == s2.pts[k][1]);
    }
}

TEST_CASE("truncated gaussian density properties") {
    const AnalyticDensity rho = truncated_gaussian_density();

    // unit mass under independent quadrature
    const double mass = quad::integrate_rect([&](double x, double y) { return rho(x, y); }, 0.0,
                                             1.0, 0.0, 1.0, 1e-9);
    CHECK(mass == Approx(1.0).margin(1e-6));

    // symmetries of the quadratic form
    SeededRng rng(11);
    for (int k = 0; k < 50; ++k) {
        const double x = rng.next_double(), y = rng.next_double();
        CHECK(rho(x, y) == Approx(rho(y, x)).epsilon(1e-12));
        CHECK(rho(x, y) == Approx(rho(1.0 - x, 1.0 - y)).epsilon(1e-12));
    }
    CHECK(rho(0.5, 0.5) > rho(0.1, 0.9));

    const PiecewiseConstantDensity bar = cell_average_density(rho, 8, 1e-9);
    CHECK(is_mtp2(bar.cells, 1e-12).feasible);
}

TEST_CASE("rejection sampler stays in the square and matches quadrature moments") {
    SeededRng rng(13);
    CHECK(sample_truncated_gaussian(0, rng).pts.empty());

    std::int64_t proposals = 0;
    const std::int64_t n = 200000;
    const SamplePoints pts = sample_truncated_gaussian(n, rng, &proposals);
    double mx = 0.0;
    for (const auto& p : pts.pts) {
        REQUIRE(p[0] >= 0.0);
        REQUIRE(p[0] <= 1.0);
        REQUIRE(p[1] >= 0.0);
        REQUIRE(p[1] <= 1.0);
        mx += p[0];
    }
    mx /= static_cast<double>(n);

    const AnalyticDensity rho = truncated_gaussian_density();
    const double mean_x = quad::integrate_rect([&](double x, double y) { return x * rho(x, y); },
                                               0.0, 1.0, 0.0, 1.0, 1e-9);
    // the sd of the truncated coordinate is below the raw sqrt(0.2)
    const double band = 5.0 * std::sqrt(0.2 / static_cast<double>(n));
    CHECK(std::abs(mx - mean_x) <= band);

    // acceptance rate vs the cached normalizer
    const double accept = static_cast<double>(n) / static_cast<double>(proposals);
    const double z = TruncatedGaussianSpec::normalizer();
    const double sd = std::sqrt(z * (1.0 - z) / static_cast<double>(proposals));
    CHECK(std::abs(accept - z) <= 3.0 * sd);
}

TEST_CASE("generator validation flags a negatively correlated gaussian") {
    CHECK(validate_mtp2_generator(truncated_gaussian_density(), 8).feasible);

    const AnalyticDensity uniform([](double, double) { return 1.0; });
    CHECK(validate_mtp2_generator(uniform, 6).feasible);

    const AnalyticDensity negative([](double x, double y) {
        const double u = x - 0.5, v = y - 0.5;
        // covariance [[0.2, -0.1], [-0.1, 0.2]]
        return std::exp(-(10.0 / 3.0) * (u * u + v * v + u * v));
    });
    CHECK_FALSE(validate_mtp2_generator(negative, 8).feasible);
}
