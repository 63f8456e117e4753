#pragma once

#include <array>
#include <cmath>

#include "totpos/errors.hpp"

namespace totpos::quad {

namespace detail {

// 15-point Kronrod extension of 7-point Gauss on [-1, 1] (QUADPACK constants).
inline constexpr std::array<double, 8> kron_nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr std::array<double, 8> kron_weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Rule1D {
    std::array<double, 15> nodes;
    std::array<double, 15> wk;  // Kronrod weights
    std::array<double, 15> wg;  // Gauss weights; zero on Kronrod-only nodes
};

inline const Rule1D& rule() {
    static const Rule1D r = [] {
        Rule1D r{};
        for (int i = 0; i < 7; ++i) {
            r.nodes[i] = -kron_nodes[i];
            r.nodes[14 - i] = kron_nodes[i];
            r.wk[i] = r.wk[14 - i] = kron_weights[i];
        }
        r.nodes[7] = 0.0;
        r.wk[7] = kron_weights[7];
        r.wg.fill(0.0);
        // Gauss nodes sit at the odd Kronrod indices
        for (int i = 0; i < 3; ++i) {
            r.wg[2 * i + 1] = gauss_weights[i];
            r.wg[13 - 2 * i] = gauss_weights[i];
        }
        r.wg[7] = gauss_weights[3];
        return r;
    }();
    return r;
}

template <typename F>
void panel(const F& f, double x0, double x1, double y0, double y1, double& kronrod,
           double& err) {
    const Rule1D& r = rule();
    const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
    const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
    double vals[15][15];
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            vals[i][j] = f(cx + hx * r.nodes[i], cy + hy * r.nodes[j]);
    double k2 = 0.0, g2 = 0.0;
    for (int i = 0; i < 15; ++i) {
        double rk = 0.0, rg = 0.0;
        for (int j = 0; j < 15; ++j) {
            rk += r.wk[j] * vals[i][j];
            rg += r.wg[j] * vals[i][j];
        }
        k2 += r.wk[i] * rk;
        g2 += r.wg[i] * rg;
    }
    kronrod = k2 * hx * hy;
    err = std::abs(k2 - g2) * hx * hy;
}

template <typename F>
double adaptive(const F& f, double x0, double x1, double y0, double y1, double tol, int depth) {
    double val, err;
    panel(f, x0, x1, y0, y1, val, err);
    if (err <= tol || err <= 1e-16 * std::abs(val)) return val;
    if (depth <= 0) throw QuadratureFailure("rectangle quadrature did not reach the tolerance");
    const double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
    const double q = 0.25 * tol;
    return adaptive(f, x0, mx, y0, my, q, depth - 1) + adaptive(f, mx, x1, y0, my, q, depth - 1) +
           adaptive(f, x0, mx, my, y1, q, depth - 1) + adaptive(f, mx, x1, my, y1, q, depth - 1);
}

}  // namespace detail

/// Adaptive tensor Gauss-Kronrod integration of f over [x0,x1] x [y0,y1]
/// to absolute tolerance abs_tol.
template <typename F>
double integrate_rect(F&& f, double x0, double x1, double y0, double y1, double abs_tol,
                      int max_depth = 24) {
    if (!(abs_tol > 0.0)) throw InvalidParameters("quadrature tolerance must be positive");
    return detail::adaptive(f, x0, x1, y0, y1, abs_tol, max_depth);
}

}  // namespace totpos::quad
