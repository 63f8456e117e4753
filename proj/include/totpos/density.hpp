#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>

#include "totpos/quadrature.hpp"
#include "totpos/solver.hpp"

namespace totpos {

struct SamplePoints {
    std::vector<std::array<double, 2>> pts;

    std::size_t size() const { return pts.size(); }
};

/// Density on [0,1]^2 taking the constant value n^2 * p(i,j) on cell
/// [i/n, (i+1)/n) x [j/n, (j+1)/n); integrates to 1 by construction.
struct PiecewiseConstantDensity {
    int n;
    PmfGrid cells;

    PiecewiseConstantDensity(int n_, PmfGrid cells_) : n(n_), cells(std::move(cells_)) {
        if (cells.rows() != n || cells.cols() != n)
            throw DimensionMismatch("piecewise-constant density cells must be n x n");
    }

    double value(int i, int j) const { return static_cast<double>(n) * n * cells(i, j); }
};

/// Ground-truth density on [0,1]^2. Built from a nonnegative integrand whose
/// normalizing constant is computed once by global adaptive quadrature and
/// cached; evaluations return the normalized density.
class AnalyticDensity {
public:
    template <typename F>
    explicit AnalyticDensity(F raw, double quad_tol = 1e-9)
        : raw_(std::move(raw)) {
        normalizer_ = quad::integrate_rect(raw_, 0.0, 1.0, 0.0, 1.0, quad_tol);
        if (!(normalizer_ > 0.0)) throw InvalidParameters("density integrand has no mass");
    }

    double operator()(double x, double y) const { return raw_(x, y) / normalizer_; }
    double normalizer() const { return normalizer_; }

    std::optional<double> dmin, dmax;
    std::optional<std::pair<double, double>> smoothness;  // (beta, R)

private:
    std::function<double(double, double)> raw_;
    double normalizer_;
};

/// Bins samples into the n x n equidistant grid of half-open cells; a
/// coordinate exactly equal to 1 belongs to the last cell.
inline CountGrid histogram(const SamplePoints& samples, int n) {
    if (n < 1) throw InvalidParameters("histogram requires n >= 1");
    Mat<std::int64_t> counts(n, n, 0);
    for (const auto& p : samples.pts) {
        if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0))
            throw CoordinateOutOfRange("sample outside [0,1]^2");
        const int i = std::min(static_cast<int>(p[0] * n), n - 1);
        const int j = std::min(static_cast<int>(p[1] * n), n - 1);
        ++counts(i, j);
    }
    return CountGrid(std::move(counts));
}

enum class GridSizeLogForm { Simple, ConstantLaden };

/// Bias-variance grid size: floor of the minimum of (R^2 N / dmin)^(1/(2b+1))
/// with b = min(beta, 1), and (dmin N / log(dmin N))^(1/2), clamped to >= 1.
/// The ConstantLaden form replaces the log by 24 log(dmin N / (12 delta)).
inline int select_grid_size(std::int64_t n_samples, double beta, double holder_const, double dmin,
                            GridSizeLogForm form = GridSizeLogForm::Simple, double delta = 1e-2) {
    if (n_samples < 2 || !(beta > 0.0) || !(holder_const > 0.0) || !(dmin > 0.0))
        throw InvalidParameters("select_grid_size: need N >= 2, beta > 0, R > 0, dmin > 0");
    const double nn = static_cast<double>(n_samples);
    const double beta_eff = std::min(beta, 1.0);
    const double first = std::pow(holder_const * holder_const * nn / dmin, 1.0 / (2.0 * beta_eff + 1.0));
    const double logterm = form == GridSizeLogForm::Simple
                               ? std::log(dmin * nn)
                               : 24.0 * std::log(dmin * nn / (12.0 * delta));
    if (!(logterm > 0.0)) throw InvalidParameters("select_grid_size: dmin * N too small for the log term");
    const double second = std::sqrt(dmin * nn / logterm);
    // nudge so that analytically integral values (e.g. N^(1/3) at N = 1e6)
    // are not floored down by the last ulp
    const double v = std::min(first, second);
    return std::max(1, static_cast<int>(std::floor(v + 1e-9 * std::max(1.0, v))));
}

/// Grid size n = ceil(C N^(1/(2 beta + 1))) for the fixed-scaling experiments.
inline int fixed_scaling_grid_size(std::int64_t n_samples, double beta, double scale_c) {
    if (n_samples < 1 || !(beta > 0.0) || !(scale_c > 0.0))
        throw InvalidParameters("fixed_scaling_grid_size: invalid parameters");
    const double v = scale_c * std::pow(static_cast<double>(n_samples), 1.0 / (2.0 * beta + 1.0));
    return std::max(1, static_cast<int>(std::ceil(v)));
}

/// The scaling constant calibrated so that N = 1e8 gives n = 200.
inline double fixed_scaling_constant(double beta) {
    if (!(beta > 0.0)) throw InvalidParameters("beta must be positive");
    return 200.0 / std::pow(1e8, 1.0 / (2.0 * beta + 1.0));
}

struct DensityFitResult {
    PiecewiseConstantDensity density;
    FitResult fit;
};

/// histogram -> fit_mle -> piecewise-constant wrap.
inline DensityFitResult fit_density(const SamplePoints& samples, int n,
                                    const SolverOptions& opts = {}) {
    FitResult fit = fit_mle(histogram(samples, n), opts);
    PmfGrid cells = fit.p_hat;
    return DensityFitResult{PiecewiseConstantDensity(n, std::move(cells)), std::move(fit)};
}

inline PiecewiseConstantDensity empirical_density(const SamplePoints& samples, int n) {
    return PiecewiseConstantDensity(n, empirical_pmf(histogram(samples, n)));
}

/// Cell averages p(i,j) = integral of rho over cell (i,j), by per-cell
/// adaptive quadrature with the total absolute budget quad_tol split evenly.
/// The grid is renormalized; a total mass farther than 1e-6 from 1 errors.
inline PiecewiseConstantDensity cell_average_density(const AnalyticDensity& rho, int n,
                                                     double quad_tol = 1e-8) {
    if (n < 1) throw InvalidParameters("cell_average_density requires n >= 1");
    if (!(quad_tol > 0.0)) throw InvalidParameters("quad_tol must be positive");
    Mat<double> cells(n, n);
    const double cell_tol = quad_tol / (static_cast<double>(n) * n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = quad::integrate_rect(rho, static_cast<double>(i) / n,
                                                  static_cast<double>(i + 1) / n,
                                                  static_cast<double>(j) / n,
                                                  static_cast<double>(j + 1) / n, cell_tol);
            cells(i, j) = v;
            total += v;
        }
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw QuadratureFailure("cell averages deviate from unit mass beyond 1e-6");
    for (double& v : cells.data()) v /= total;
    return PiecewiseConstantDensity(n, PmfGrid(std::move(cells)));
}

/// Hellinger between two piecewise-constant densities on the same grid; the
/// continuous integral collapses to the discrete distance of the cell PMFs.
inline double hellinger_sq_pc(const PiecewiseConstantDensity& f,
                              const PiecewiseConstantDensity& g) {
    if (f.n != g.n) throw DimensionMismatch("hellinger_sq_pc requires equal grid sizes");
    return hellinger_sq(f.cells, g.cells);
}

/// Integral of (sqrt(f) - sqrt(rho))^2 over [0,1]^2 by per-cell quadrature;
/// total absolute accuracy target quad_tol.
inline double hellinger_sq_continuous(const PiecewiseConstantDensity& f, const AnalyticDensity& rho,
                                      double quad_tol = 1e-7) {
    if (!(quad_tol > 0.0)) throw InvalidParameters("quad_tol must be positive");
    const int n = f.n;
    const double cell_tol = quad_tol / (static_cast<double>(n) * n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double froot = std::sqrt(f.value(i, j));
            auto integrand = [&](double x, double y) {
                const double d = froot - std::sqrt(rho(x, y));
                return d * d;
            };
            total += quad::integrate_rect(integrand, static_cast<double>(i) / n,
                                          static_cast<double>(i + 1) / n,
                                          static_cast<double>(j) / n,
                                          static_cast<double>(j + 1) / n, cell_tol);
        }
    }
    return total;
}

}  // namespace totpos
