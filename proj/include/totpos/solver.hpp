#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "totpos/projection.hpp"

namespace totpos {

enum class Variant { Unconstrained, BoxConstrained, LowerBounded };

struct SolverOptions {
    Variant variant = Variant::BoxConstrained;
    double outer_rel_tol = 1e-5;
    int max_outer = 100;
    ProjectionOptions inner{};
    double epsilon_floor = std::exp(-30.0);  // LowerBounded only
    bool init_probability_scale = false;     // literal theta <- Y/N start

    void validate() const {
        if (outer_rel_tol <= 0 || max_outer < 1)
            throw InvalidParameters("solver options: outer_rel_tol > 0 and max_outer >= 1 required");
        if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0))
            throw InvalidParameters("epsilon_floor must lie in (0, 1)");
    }
};

struct FitResult {
    FitResult(LogPmfGrid theta, PmfGrid p, Mat<double> tilde)
        : theta_hat(std::move(theta)), p_hat(std::move(p)), theta_tilde(std::move(tilde)) {}

    LogPmfGrid theta_hat;     // normalized
    PmfGrid p_hat;
    Mat<double> theta_tilde;  // final iterate before normalization
    int outer_iters = 0;
    std::vector<double> objective_trace;
    double final_feasibility = 0.0;
    double sum_exp_before_normalize = 1.0;
    bool fell_back_to_empirical = false;
    bool converged = false;
    int inner_not_converged = 0;

    bool fell_back() const { return fell_back_to_empirical; }
};

/// Per-entry box log(2Y/(3N)) <= theta <= min(log(2Y/N), 0). Any zero count
/// makes the lower bound undefined; the offending cells are reported and the
/// caller decides on a fallback.
inline BoxBounds build_box(const CountGrid& y) {
    std::vector<std::pair<int, int>> zeros;
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.cols(); ++j)
            if (y(i, j) == 0) zeros.emplace_back(i, j);
    if (!zeros.empty()) throw ZeroCount(std::move(zeros));

    const double n = static_cast<double>(y.total());
    Mat<double> lo(y.rows(), y.cols());
    Mat<double> hi(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i) {
        for (int j = 0; j < y.cols(); ++j) {
            const double c = static_cast<double>(y(i, j));
            lo(i, j) = std::log(2.0 * c / (3.0 * n));
            hi(i, j) = std::min(std::log(2.0 * c / n), 0.0);
        }
    }
    return BoxBounds(std::move(lo), std::move(hi));
}

namespace detail {

// exp with the argument clamped so that both exp(v) and 1/exp(v) stay finite
inline double safe_exp(double v) {
    return std::exp(std::clamp(v, -690.0, 690.0));
}

}  // namespace detail

/// <Y, theta>/N - sum exp(theta); the concave objective being maximized.
inline double objective(const Mat<double>& theta, const CountGrid& y) {
    if (theta.rows() != y.rows() || theta.cols() != y.cols())
        throw DimensionMismatch("objective: theta and counts shapes differ");
    double lin = 0.0, mass = 0.0;
    for (int i = 0; i < theta.rows(); ++i) {
        for (int j = 0; j < theta.cols(); ++j) {
            lin += static_cast<double>(y(i, j)) * theta(i, j);
            mass += std::exp(std::min(theta(i, j), 690.0));
        }
    }
    return lin / static_cast<double>(y.total()) - mass;
}

/// One proximal Newton step: Lambda = exp(theta), target
/// y = theta + (Y/N) / Lambda - 1, projected onto the constraint set in the
/// Lambda-weighted norm. The step is taken as-is (no line search).
inline Mat<double> newton_step(const Mat<double>& theta, const CountGrid& y,
                               const std::optional<BoxBounds>& bounds,
                               const ProjectionOptions& inner, DykstraState* diag = nullptr) {
    Mat<double> lam(theta.rows(), theta.cols());
    Mat<double> target(theta.rows(), theta.cols());
    const double n = static_cast<double>(y.total());
    for (int i = 0; i < theta.rows(); ++i) {
        for (int j = 0; j < theta.cols(); ++j) {
            const double l = detail::safe_exp(theta(i, j));
            lam(i, j) = l;
            target(i, j) = theta(i, j) + static_cast<double>(y(i, j)) / (n * l) - 1.0;
        }
    }
    DykstraState st = dykstra_project(target, WeightGrid(std::move(lam)), bounds, inner);
    if (diag) *diag = st;
    return std::move(st.theta);
}

namespace detail {

inline FitResult empirical_fallback(const CountGrid& y) {
    PmfGrid p = empirical_pmf(y);
    Mat<double> theta(p.rows(), p.cols());
    for (std::size_t k = 0; k < theta.size(); ++k) theta.data()[k] = std::log(p.mass().data()[k]);
    FitResult r{LogPmfGrid(theta, /*normalized=*/true), p, theta};
    r.fell_back_to_empirical = true;
    r.converged = true;
    return r;
}

inline Mat<double> initial_iterate(const CountGrid& y, const SolverOptions& opts,
                                   const std::optional<BoxBounds>& bounds) {
    Mat<double> theta(y.rows(), y.cols());
    const double n = static_cast<double>(y.total());
    for (int i = 0; i < y.rows(); ++i) {
        for (int j = 0; j < y.cols(); ++j) {
            const double freq = static_cast<double>(y(i, j)) / n;
            theta(i, j) = opts.init_probability_scale
                              ? freq
                              : std::log(std::max<double>(static_cast<double>(y(i, j)), 1.0) / n);
        }
    }
    if (bounds) theta = project_box(theta, *bounds);
    return theta;
}

}  // namespace detail

/// Maximum-likelihood fit over the supermodular cone. Variant selects the
/// extra constraint: none, the count-derived box (falling back to Y/N when a
/// count is zero), or the exp(theta) >= epsilon floor.
inline FitResult fit_mle(const CountGrid& y, const SolverOptions& opts = {}) {
    opts.validate();
    if (y.total() < 1) throw InvalidParameters("fit_mle requires at least one observation");

    std::optional<BoxBounds> bounds;
    switch (opts.variant) {
        case Variant::Unconstrained:
            break;
        case Variant::BoxConstrained:
            try {
                bounds = build_box(y);
            } catch (const ZeroCount&) {
                return detail::empirical_fallback(y);
            }
            break;
        case Variant::LowerBounded:
            bounds = BoxBounds::uniform(y.rows(), y.cols(), std::log(opts.epsilon_floor), 0.0);
            break;
    }

    Mat<double> theta = detail::initial_iterate(y, opts, bounds);
    std::vector<double> trace;
    int outer_iters = 0;
    int inner_misses = 0;
    bool converged = false;

    for (int k = 0; k < opts.max_outer; ++k) {
        DykstraState diag;
        Mat<double> next = newton_step(theta, y, bounds, opts.inner, &diag);
        if (!diag.converged) ++inner_misses;

        // No line search. A safety halving runs only between projected
        // iterates (the initializer overshoots the constrained optimum and
        // must not take part): the midpoint of two near-feasible points in
        // the convex constraint set stays near-feasible.
        double obj_next = objective(next, y);
        if (k > 0) {
            const double obj_prev = trace.back();
            for (int h = 0; h < 10 && obj_next < obj_prev - 1e-8; ++h) {
                for (std::size_t t = 0; t < next.size(); ++t)
                    next.data()[t] = 0.5 * (theta.data()[t] + next.data()[t]);
                obj_next = objective(next, y);
            }
        }

        const double change = relative_change(next, theta);
        theta = std::move(next);
        trace.push_back(obj_next);
        outer_iters = k + 1;
        if (change < opts.outer_rel_tol) {
            converged = true;
            break;
        }
    }

    // One polish step at a tighter inner tolerance: the projection's
    // leftover infeasibility scales linearly with its rel_tol, and the
    // default leaves the final iterate right at the 1e-4 contract.
    if (converged) {
        ProjectionOptions polish = opts.inner;
        polish.rel_tol = std::max(opts.inner.rel_tol * 1e-2, 1e-13);
        theta = newton_step(theta, y, bounds, polish);
        trace.push_back(objective(theta, y));
    }

    double sum_exp = 0.0;
    for (double v : theta.data()) sum_exp += detail::safe_exp(v);
    LogPmfGrid theta_hat = normalize_log(LogPmfGrid(theta));
    PmfGrid p_hat = theta_hat.to_pmf();
    FitResult out{std::move(theta_hat), std::move(p_hat), std::move(theta)};
    out.outer_iters = outer_iters;
    out.objective_trace = std::move(trace);
    out.final_feasibility = feasibility_gap(out.theta_tilde);
    out.sum_exp_before_normalize = sum_exp;
    out.converged = converged;
    out.inner_not_converged = inner_misses;
    return out;
}

}  // namespace totpos
