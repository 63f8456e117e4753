#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "totpos/projection.hpp"

namespace totpos::oracle {

// Dense reference solvers for cross-checking the Dykstra/proximal-Newton
// path on tiny grids. Both work on the dual of the respective program and
// share nothing with the production sweep code.

namespace detail {

struct ConstraintSystem {
    // rows of C in "C theta >= rhs"; each row touches at most 4 entries
    struct Row {
        int idx[4];
        double coef[4];
        int nnz;
        double rhs;
    };
    std::vector<Row> rows;
    int vars = 0;

    double apply_row(const Row& r, const std::vector<double>& x) const {
        double s = 0.0;
        for (int k = 0; k < r.nnz; ++k) s += r.coef[k] * x[r.idx[k]];
        return s;
    }
};

inline ConstraintSystem build_system(int n1, int n2, const BoxBounds* box) {
    ConstraintSystem cs;
    cs.vars = n1 * n2;
    auto flat = [n2](int i, int j) { return i * n2 + j; };
    for (int i = 0; i + 1 < n1; ++i) {
        for (int j = 0; j + 1 < n2; ++j) {
            ConstraintSystem::Row r{};
            r.idx[0] = flat(i, j);
            r.idx[1] = flat(i + 1, j + 1);
            r.idx[2] = flat(i, j + 1);
            r.idx[3] = flat(i + 1, j);
            r.coef[0] = r.coef[1] = 1.0;
            r.coef[2] = r.coef[3] = -1.0;
            r.nnz = 4;
            r.rhs = 0.0;
            cs.rows.push_back(r);
        }
    }
    if (box) {
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < n2; ++j) {
                if (std::isfinite(box->lower(i, j))) {
                    ConstraintSystem::Row r{};
                    r.idx[0] = flat(i, j);
                    r.coef[0] = 1.0;
                    r.nnz = 1;
                    r.rhs = box->lower(i, j);
                    cs.rows.push_back(r);
                }
                if (std::isfinite(box->upper(i, j))) {
                    ConstraintSystem::Row r{};
                    r.idx[0] = flat(i, j);
                    r.coef[0] = -1.0;
                    r.nnz = 1;
                    r.rhs = -box->upper(i, j);
                    cs.rows.push_back(r);
                }
            }
        }
    }
    return cs;
}

inline void check_size(int n1, int n2) {
    if (n1 > 5 || n2 > 5) throw SizeLimit("oracle solvers are limited to 5x5 grids");
}

}  // namespace detail

/// Exact projection min ||x - y||^2_Lambda s.t. second differences >= 0 and
/// box bounds, solved by accelerated projected gradient on the dual
/// x(mu) = y + Lambda^-1 C^T mu, mu >= 0. Documented accuracy 1e-7.
inline Mat<double> project_weighted(const Mat<double>& y, const WeightGrid& w,
                                    const std::optional<BoxBounds>& bounds) {
    detail::check_size(y.rows(), y.cols());
    require_same_shape(y, w.values(), "oracle::project_weighted");
    const auto cs = detail::build_system(y.rows(), y.cols(), bounds ? &*bounds : nullptr);
    if (cs.rows.empty()) return y;

    const int m = static_cast<int>(cs.rows.size());
    const std::vector<double>& yd = y.data();
    const std::vector<double>& lam = w.values().data();

    auto primal = [&](const std::vector<double>& mu) {
        std::vector<double> x = yd;
        for (int r = 0; r < m; ++r) {
            const auto& row = cs.rows[r];
            if (mu[r] == 0.0) continue;
            for (int k = 0; k < row.nnz; ++k)
                x[row.idx[k]] += mu[r] * row.coef[k] / lam[row.idx[k]];
        }
        return x;
    };
    // grad h(mu) = rhs - C x(mu)
    auto gradient = [&](const std::vector<double>& mu, std::vector<double>& g) {
        const std::vector<double> x = primal(mu);
        for (int r = 0; r < m; ++r) g[r] = cs.rows[r].rhs - cs.apply_row(cs.rows[r], x);
    };

    // Lipschitz constant of the dual gradient via power iteration on C Lambda^-1 C^T.
    std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m)));
    double lip = 1.0;
    for (int it = 0; it < 80; ++it) {
        std::vector<double> x(cs.vars, 0.0);
        for (int r = 0; r < m; ++r) {
            const auto& row = cs.rows[r];
            for (int k = 0; k < row.nnz; ++k) x[row.idx[k]] += v[r] * row.coef[k] / lam[row.idx[k]];
        }
        std::vector<double> qv(m);
        double nrm = 0.0;
        for (int r = 0; r < m; ++r) {
            qv[r] = cs.apply_row(cs.rows[r], x);
            nrm += qv[r] * qv[r];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) break;
        lip = nrm;
        for (int r = 0; r < m; ++r) v[r] = qv[r] / nrm;
    }
    const double step = 1.0 / (1.05 * lip);

    double scale = 1.0;
    for (double vy : yd) scale = std::max(scale, std::abs(vy));

    std::vector<double> mu(m, 0.0), mu_prev(m, 0.0), z(m, 0.0), g(m);
    double t = 1.0;
    const long max_iters = 2'000'000;
    for (long it = 0; it < max_iters; ++it) {
        gradient(z, g);
        for (int r = 0; r < m; ++r) mu[r] = std::max(0.0, z[r] + step * g[r]);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (int r = 0; r < m; ++r) z[r] = mu[r] + ((t - 1.0) / t_next) * (mu[r] - mu_prev[r]);
        mu_prev = mu;
        t = t_next;
        if (it % 64 == 0) {
            const std::vector<double> x = primal(mu);
            double viol = 0.0, comp = 0.0;
            for (int r = 0; r < m; ++r) {
                const double slack = cs.apply_row(cs.rows[r], x) - cs.rows[r].rhs;
                viol = std::max(viol, -slack);
                comp = std::max(comp, std::abs(mu[r] * slack));
            }
            if (viol <= 1e-12 * scale && comp <= 1e-12 * scale * scale) break;
        }
    }

    const std::vector<double> x = primal(mu);
    Mat<double> out(y.rows(), y.cols());
    out.data() = x;
    return out;
}

/// Maximizes <Y, theta>/N - sum exp(theta) over the supermodular cone
/// intersected with the box, via projected gradient with backtracking on the
/// entropic dual theta(mu) = log(Y/N + C^T mu). Reference only; tiny grids.
inline Mat<double> fit_box_mle_dense(const CountGrid& y, const BoxBounds& box) {
    detail::check_size(y.rows(), y.cols());
    const auto cs = detail::build_system(y.rows(), y.cols(), &box);
    const int m = static_cast<int>(cs.rows.size());
    const int n = cs.vars;
    const double total = static_cast<double>(y.total());

    std::vector<double> base(n);
    for (int k = 0; k < n; ++k) base[k] = static_cast<double>(y.counts().data()[k]) / total;

    auto weights_of = [&](const std::vector<double>& mu, std::vector<double>& wv) {
        wv = base;
        for (int r = 0; r < m; ++r) {
            const auto& row = cs.rows[r];
            if (mu[r] == 0.0) continue;
            for (int k = 0; k < row.nnz; ++k) wv[row.idx[k]] += mu[r] * row.coef[k];
        }
        for (double v : wv)
            if (!(v > 0.0)) return false;
        return true;
    };
    auto dual_value = [&](const std::vector<double>& mu, const std::vector<double>& wv) {
        double s = 0.0;
        for (double v : wv) s += v * std::log(v) - v;
        for (int r = 0; r < m; ++r) s -= mu[r] * cs.rows[r].rhs;
        return s;
    };

    std::vector<double> mu(m, 0.0), wv, theta(n), g(m), cand(m), wv_cand;
    if (!weights_of(mu, wv)) throw InvalidParameters("fit_box_mle_dense requires all counts >= 1");
    double val = dual_value(mu, wv);

    double step = 1.0;
    const long max_iters = 400'000;
    for (long it = 0; it < max_iters; ++it) {
        for (int k = 0; k < n; ++k) theta[k] = std::log(wv[k]);
        double viol = 0.0, comp = 0.0;
        for (int r = 0; r < m; ++r) {
            const double slack =
                [&] {
                    double s = 0.0;
                    for (int k = 0; k < cs.rows[r].nnz; ++k)
                        s += cs.rows[r].coef[k] * theta[cs.rows[r].idx[k]];
                    return s;
                }() -
                cs.rows[r].rhs;
            g[r] = slack;  // gradient of the dual is the constraint slack
            viol = std::max(viol, -slack);
            comp = std::max(comp, std::abs(mu[r] * slack));
        }
        if (viol <= 1e-10 && comp <= 1e-10) break;

        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            double sqdist = 0.0;
            for (int r = 0; r < m; ++r) {
                cand[r] = std::max(0.0, mu[r] - step * g[r]);
                const double d = cand[r] - mu[r];
                sqdist += d * d;
            }
            if (sqdist == 0.0) break;
            if (weights_of(cand, wv_cand)) {
                const double cand_val = dual_value(cand, wv_cand);
                if (cand_val <= val - 0.25 * sqdist / step) {
                    mu = cand;
                    wv = wv_cand;
                    val = cand_val;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!moved) break;
        step *= 1.3;
    }

    Mat<double> out(y.rows(), y.cols());
    for (int k = 0; k < n; ++k) out.data()[k] = std::log(wv[k]);
    return out;
}

}  // namespace totpos::oracle
