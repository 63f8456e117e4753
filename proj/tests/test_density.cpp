#include <catch2/catch.hpp>

#include <cmath>

#include "totpos/density.hpp"
#include "totpos/quadrature.hpp"
#include "totpos/rng.hpp"
#include "totpos/synth.hpp"

using namespace totpos;

TEST_CASE("rectangle quadrature on known integrals") {
    const double xy = quad::integrate_rect([](double x, double y) { return x * y; }, 0.0, 1.0, 0.0,
                                           1.0, 1e-12);
    CHECK(xy == Approx(0.25).margin(1e-12));

    const double ee = quad::integrate_rect([](double x, double y) { return std::exp(x + y); }, 0.0,
                                           1.0, 0.0, 1.0, 1e-12);
    const double e1 = std::exp(1.0) - 1.0;
    CHECK(ee == Approx(e1 * e1).margin(1e-10));

    // a needle that forces refinement
    const double needle = quad::integrate_rect(
        [](double x, double y) {
            const double u = x - 0.3, v = y - 0.7;
            return std::exp(-500.0 * (u * u + v * v));
        },
        0.0, 1.0, 0.0, 1.0, 1e-10);
    CHECK(needle == Approx(M_PI / 500.0).epsilon(1e-6));
}

TEST_CASE("histogram binning conventions") {
    SamplePoints one;
    one.pts.push_back({0.0, 0.0});
    const CountGrid h1 = histogram(one, 4);
    CHECK(h1(0, 0) == 1);
    CHECK(h1.total() == 1);

    SamplePoints last;
    last.pts.push_back({std::nextafter(1.0, 0.0), std::nextafter(1.0, 0.0)});
    CHECK(histogram(last, 4)(3, 3) == 1);

    SamplePoints boundary;
    boundary.pts.push_back({1.0, 1.0});
    CHECK(histogram(boundary, 3)(2, 2) == 1);

    SamplePoints bad;
    bad.pts.push_back({1.5, 0.2});
    CHECK_THROWS_AS(histogram(bad, 2), CoordinateOutOfRange);
}

TEST_CASE("histogram of uniform draws stays within binomial bands") {
    SeededRng rng(123);
    SamplePoints pts;
    const int n_samples = 10000;
    for (int k = 0; k < n_samples; ++k) pts.pts.push_back({rng.next_double(), rng.next_double()});
    const CountGrid y = histogram(pts, 4);
    CHECK(y.total() == n_samples);
    const double mean = n_samples / 16.0;
    const double band = 5.0 * std::sqrt(n_samples * (1.0 / 16.0) * (15.0 / 16.0));
    for (auto c : y.counts().data()) CHECK(std::abs(static_cast<double>(c) - mean) <= band);
}

TEST_CASE("grid size selection") {
    CHECK(select_grid_size(1000000, 1.0, 1.0, 1.0) == 100);

    // nondecreasing in N
    int prev = 1;
    for (std::int64_t n : {100, 1000, 10000, 100000, 1000000}) {
        const int cur = select_grid_size(n, 0.75, 1.0, 1.0);
        CHECK(cur >= prev);
        prev = cur;
    }

    CHECK_THROWS_AS(select_grid_size(1, 1.0, 1.0, 1.0), InvalidParameters);
    CHECK_THROWS_AS(select_grid_size(1000, -1.0, 1.0, 1.0), InvalidParameters);

    // the constant-laden log form selects no more cells than the simple one
    const int simple = select_grid_size(1000000, 1.0, 1.0, 1.0, GridSizeLogForm::Simple);
    const int laden = select_grid_size(1000000, 1.0, 1.0, 1.0, GridSizeLogForm::ConstantLaden);
    CHECK(laden <= simple);
}

TEST_CASE("fixed scaling calibration hits n = 200 at N = 1e8") {
    for (double beta : {0.5, 0.75, 1.0}) {
        const double c = fixed_scaling_constant(beta);
        CHECK(fixed_scaling_grid_size(100000000, beta, c) == 200);
    }
}

TEST_CASE("cell averages of the uniform density") {
    const AnalyticDensity uniform([](double, double) { return 1.0; });
    const PiecewiseConstantDensity d = cell_average_density(uniform, 5, 1e-9);
    for (double v : d.cells.mass().data()) CHECK(v == Approx(0.04).margin(1e-10));
    CHECK(d.value(2, 2) == Approx(1.0).margin(1e-8));
}

TEST_CASE("cell averages of a product density factorize") {
    const AnalyticDensity prod([](double x, double y) { return 4.0 * x * y; });
    const int n = 4;
    const PiecewiseConstantDensity d = cell_average_density(prod, n, 1e-10);
    auto marginal = [&](int i) {
        const double a = static_cast<double>(i) / n, b = static_cast<double>(i + 1) / n;
        return b * b - a * a;  // integral of 2x over the cell
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(d.cells(i, j) == Approx(marginal(i) * marginal(j)).margin(1e-10));
}

TEST_CASE("hellinger between piecewise-constant densities collapses to the discrete one") {
    SeededRng rng(9);
    Mat<double> a(3, 3), b(3, 3);
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        a.data()[k] = 0.1 + rng.next_double();
        b.data()[k] = 0.1 + rng.next_double();
        sa += a.data()[k];
        sb += b.data()[k];
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        a.data()[k] /= sa;
        b.data()[k] /= sb;
    }
    const PiecewiseConstantDensity fa(3, PmfGrid(a));
    const PiecewiseConstantDensity fb(3, PmfGrid(b));
    CHECK(hellinger_sq_pc(fa, fb) == Approx(hellinger_sq(fa.cells, fb.cells)).margin(1e-15));
    CHECK(hellinger_sq_pc(fa, fa) == 0.0);

    const PiecewiseConstantDensity other(2, PmfGrid(Mat<double>(2, 2, 0.25)));
    CHECK_THROWS_AS(hellinger_sq_pc(fa, other), DimensionMismatch);
}

TEST_CASE("continuous hellinger against an analytic truth") {
    const AnalyticDensity uniform([](double, double) { return 1.0; });

    const PiecewiseConstantDensity flat(4, PmfGrid(Mat<double>(4, 4, 1.0 / 16.0)));
    CHECK(hellinger_sq_continuous(flat, uniform, 1e-9) == Approx(0.0).margin(1e-8));

    // half the cells at density 2, the rest empty:
    // integral = (1/2)(sqrt(2)-1)^2 + 1/2
    Mat<double> half(4, 4, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) half(i, j) = 2.0 / 16.0;
    const PiecewiseConstantDensity spiky(4, PmfGrid(half));
    const double r2 = std::sqrt(2.0) - 1.0;
    CHECK(hellinger_sq_continuous(spiky, uniform, 1e-9) ==
          Approx(0.5 * r2 * r2 + 0.5).margin(1e-8));
}

TEST_CASE("piecewise-constant reconstruction of exact cell values vanishes") {
    const AnalyticDensity tg = truncated_gaussian_density();
    const PiecewiseConstantDensity cells = cell_average_density(tg, 6, 1e-9);
    // not identical (cell averages vs pointwise), but the variance part is zero
    CHECK(hellinger_sq_pc(cells, cells) == 0.0);
}

TEST_CASE("fit_density wraps the solver") {
    SeededRng rng(201);
    SamplePoints pts = sample_truncated_gaussian(4000, rng);
    const DensityFitResult r = fit_density(pts, 8, {});
    CHECK(r.density.n == 8);
    double mass = 0.0;
    for (double v : r.density.cells.mass().data()) mass += v;
    CHECK(std::abs(mass - 1.0) <= 1e-8);

    // degenerate sample: everything lands in one cell, boxed variant falls back
    SamplePoints degenerate;
    for (int k = 0; k < 50; ++k) degenerate.pts.push_back({0.1, 0.1});
    const DensityFitResult d = fit_density(degenerate, 4, {});
    CHECK(d.fit.fell_back_to_empirical);
    CHECK(d.density.value(0, 0) == Approx(16.0));
}

TEST_CASE("uniform samples produce near-uniform fitted cells") {
    SeededRng rng(202);
    SamplePoints pts;
    for (int k = 0; k < 100000; ++k) pts.pts.push_back({rng.next_double(), rng.next_double()});
    SolverOptions opts;
    opts.variant = Variant::Unconstrained;
    const DensityFitResult r = fit_density(pts, 4, opts);
    for (double v : r.density.cells.mass().data())
        CHECK(v == Approx(1.0 / 16.0).epsilon(0.05));
}

TEST_CASE("the fitted density beats the raw frequency density") {
    SeededRng rng(204);
    const AnalyticDensity truth = truncated_gaussian_density();
    SamplePoints pts = sample_truncated_gaussian(10000, rng);
    SolverOptions opts;
    opts.variant = Variant::Unconstrained;
    const DensityFitResult fit = fit_density(pts, 16, opts);
    const PiecewiseConstantDensity freq = empirical_density(pts, 16);
    const double h2_fit = hellinger_sq_continuous(fit.density, truth, 1e-7);
    const double h2_freq = hellinger_sq_continuous(freq, truth, 1e-7);
    CHECK(h2_fit < h2_freq);
}

TEST_CASE("hellinger triangle-style decomposition holds on a fitted density") {
    SeededRng rng(203);
    const AnalyticDensity truth = truncated_gaussian_density();
    SamplePoints pts = sample_truncated_gaussian(20000, rng);
    SolverOptions opts;
    opts.variant = Variant::Unconstrained;
    const DensityFitResult fit = fit_density(pts, 8, opts);
    const PiecewiseConstantDensity bar = cell_average_density(truth, 8, 1e-9);
    const double total = hellinger_sq_continuous(fit.density, truth, 1e-8);
    const double variance = hellinger_sq_pc(fit.density, bar);
    const double bias = hellinger_sq_continuous(bar, truth, 1e-8);
    CHECK(total <= 2.0 * variance + 2.0 * bias + 1e-5);
}
