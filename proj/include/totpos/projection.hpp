#pragma once

#include <algorithm>
#include <limits>
#include <optional>

#include "totpos/grid.hpp"

namespace totpos {

/// Entrywise [lower, upper] bounds; +-inf entries disable the respective side.
class BoxBounds {
public:
    BoxBounds(Mat<double> lower, Mat<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        require_same_shape(lower_, upper_, "BoxBounds");
        for (std::size_t k = 0; k < lower_.size(); ++k)
            if (!(lower_.data()[k] <= upper_.data()[k]))
                throw InvalidParameters("box bounds must satisfy lower <= upper");
    }

    static BoxBounds uniform(int rows, int cols, double lo, double hi) {
        return BoxBounds(Mat<double>(rows, cols, lo), Mat<double>(rows, cols, hi));
    }

    int rows() const { return lower_.rows(); }
    int cols() const { return lower_.cols(); }
    double lower(int i, int j) const { return lower_(i, j); }
    double upper(int i, int j) const { return upper_(i, j); }
    const Mat<double>& lower() const { return lower_; }
    const Mat<double>& upper() const { return upper_; }

private:
    Mat<double> lower_;
    Mat<double> upper_;
};

struct ProjectionOptions {
    double rel_tol = 1e-6;
    long max_sweeps = 400000;
    bool include_box = true;
};

/// Dykstra iterate plus the per-constraint correction residuals carried
/// across sweeps. Cell residuals are scalars clamped nonnegative; the box
/// residual is a full signed grid.
struct DykstraState {
    Mat<double> theta;
    Mat<double> cell_residual;  // (n1-1) x (n2-1), >= 0
    Mat<double> box_residual;   // n1 x n2, signed
    Mat<double> gamma;          // harmonic window weights
    long sweeps = 0;
    double rel_change = std::numeric_limits<double>::infinity();
    double feasibility_gap = 0.0;
    bool converged = false;
};

/// Gamma(i,j) = ( sum of 1/Lambda over the 2x2 window at (i,j) )^-1.
inline Mat<double> harmonic_weights(const WeightGrid& w) {
    const auto& lam = w.values();
    Mat<double> g(std::max(lam.rows() - 1, 0), std::max(lam.cols() - 1, 0));
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            g(i, j) = 1.0 / (1.0 / lam(i, j) + 1.0 / lam(i, j + 1) +
                             1.0 / lam(i + 1, j) + 1.0 / lam(i + 1, j + 1));
    return g;
}

/// One Dykstra update of the 2x2 window at (i,j): absorbs the carried
/// residual eta_in and returns the new residual. Touches only the window.
inline double project_cell(Mat<double>& z, const WeightGrid& w, const Mat<double>& gamma,
                           int i, int j, double eta_in) {
    const double minor = z(i, j) - z(i, j + 1) - z(i + 1, j) + z(i + 1, j + 1);
    const double eta_out = std::max(eta_in - gamma(i, j) * minor, 0.0);
    const double d = eta_out - eta_in;
    if (d != 0.0) {
        z(i, j) += d / w(i, j);
        z(i, j + 1) -= d / w(i, j + 1);
        z(i + 1, j) -= d / w(i + 1, j);
        z(i + 1, j + 1) += d / w(i + 1, j + 1);
    }
    return eta_out;
}

/// Entrywise clamp into the box; infinite bounds are no-ops.
inline Mat<double> project_box(const Mat<double>& z, const BoxBounds& bounds) {
    require_same_shape(z, bounds.lower(), "project_box");
    Mat<double> out = z;
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j)
            out(i, j) = std::clamp(out(i, j), bounds.lower(i, j), bounds.upper(i, j));
    return out;
}

/// max(0, -min adjacent second difference); 0 iff supermodular at tolerance 0.
inline double feasibility_gap(const Mat<double>& theta) {
    const MinorReport r = second_difference_report(theta);
    if (!std::isfinite(r.min_minor)) return 0.0;
    return std::max(0.0, -r.min_minor);
}

namespace detail {

inline void dykstra_sweep(DykstraState& st, const Mat<double>& inv_lam, const BoxBounds* box,
                          bool reversed) {
    Mat<double>& th = st.theta;
    if (box) {
        for (int i = 0; i < th.rows(); ++i) {
            for (int j = 0; j < th.cols(); ++j) {
                const double shifted = th(i, j) + st.box_residual(i, j);
                const double clamped = std::clamp(shifted, box->lower(i, j), box->upper(i, j));
                st.box_residual(i, j) = shifted - clamped;
                th(i, j) = clamped;
            }
        }
    }
    const int cr = st.cell_residual.rows();
    const int cc = st.cell_residual.cols();
    auto visit = [&](int i, int j) {
        const double minor = th(i, j) - th(i, j + 1) - th(i + 1, j) + th(i + 1, j + 1);
        const double eta_in = st.cell_residual(i, j);
        const double eta_out = std::max(eta_in - st.gamma(i, j) * minor, 0.0);
        const double d = eta_out - eta_in;
        if (d != 0.0) {
            th(i, j) += d * inv_lam(i, j);
            th(i, j + 1) -= d * inv_lam(i, j + 1);
            th(i + 1, j) -= d * inv_lam(i + 1, j);
            th(i + 1, j + 1) += d * inv_lam(i + 1, j + 1);
        }
        st.cell_residual(i, j) = eta_out;
    };
    if (!reversed) {
        for (int i = 0; i < cr; ++i)
            for (int j = 0; j < cc; ++j) visit(i, j);
    } else {
        for (int i = cr - 1; i >= 0; --i)
            for (int j = cc - 1; j >= 0; --j) visit(i, j);
    }
}

inline Mat<double> inverse_entries(const Mat<double>& m) {
    Mat<double> inv = m;
    for (double& v : inv.data()) v = 1.0 / v;
    return inv;
}

}  // namespace detail

namespace detail {

inline double sq_diff(const Mat<double>& a, const Mat<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a.data()[k] - b.data()[k];
        s += d * d;
    }
    return s;
}

inline double sq_norm(const Mat<double>& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
}

}  // namespace detail

/// Weighted-Frobenius projection of y onto the supermodular cone, optionally
/// intersected with a box, by cyclic Dykstra sweeps: box first, then all 2x2
/// windows in row-major order. Terminates at rel_tol on the inter-sweep
/// relative change of the full state (iterate and residuals; the iterate
/// alone can park for many sweeps while the residuals still move, and an
/// unchanged full state is exactly a KKT point), or at max_sweeps (soft:
/// result returned either way with converged = false). The rel_change
/// diagnostic reports the iterate-only metric.
inline DykstraState dykstra_project(const Mat<double>& y, const WeightGrid& w,
                                    const std::optional<BoxBounds>& bounds,
                                    const ProjectionOptions& opts = {}) {
    require_same_shape(y, w.values(), "dykstra_project");
    if (opts.rel_tol <= 0 || opts.max_sweeps < 1)
        throw InvalidParameters("projection options: rel_tol > 0 and max_sweeps >= 1 required");
    if (bounds) require_same_shape(y, bounds->lower(), "dykstra_project bounds");

    DykstraState st;
    st.theta = y;
    st.cell_residual = Mat<double>(std::max(y.rows() - 1, 0), std::max(y.cols() - 1, 0), 0.0);
    st.box_residual = Mat<double>(y.rows(), y.cols(), 0.0);
    st.gamma = harmonic_weights(w);
    const Mat<double> inv_lam = detail::inverse_entries(w.values());
    const BoxBounds* bp = (opts.include_box && bounds) ? &*bounds : nullptr;

    Mat<double> prev_theta, prev_cell, prev_box;
    for (long s = 0; s < opts.max_sweeps; ++s) {
        prev_theta = st.theta;
        prev_cell = st.cell_residual;
        prev_box = st.box_residual;
        detail::dykstra_sweep(st, inv_lam, bp, /*reversed=*/false);
        ++st.sweeps;
        st.rel_change = relative_change(st.theta, prev_theta);
        const double state_change =
            std::sqrt(detail::sq_diff(st.theta, prev_theta) +
                      detail::sq_diff(st.cell_residual, prev_cell) +
                      detail::sq_diff(st.box_residual, prev_box));
        const double state_norm = std::sqrt(detail::sq_norm(prev_theta) +
                                            detail::sq_norm(prev_cell) +
                                            detail::sq_norm(prev_box));
        if (state_change / std::max(state_norm, 1e-12) < opts.rel_tol) {
            st.converged = true;
            break;
        }
    }
    st.feasibility_gap = totpos::feasibility_gap(st.theta);
    return st;
}

/// Runs one more sweep on a finished state; used to probe fixed points.
inline void extra_sweep(DykstraState& st, const WeightGrid& w,
                        const std::optional<BoxBounds>& bounds, bool reversed) {
    const Mat<double> inv_lam = detail::inverse_entries(w.values());
    detail::dykstra_sweep(st, inv_lam, bounds ? &*bounds : nullptr, reversed);
    ++st.sweeps;
}

}  // namespace totpos
