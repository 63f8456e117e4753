#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "totpos/matrix.hpp"

namespace totpos {

/// Observation counts Y on an n1 x n2 grid; total() is the sample size N.
class CountGrid {
public:
    explicit CountGrid(Mat<std::int64_t> counts) : counts_(std::move(counts)) {
        if (counts_.rows() < 1 || counts_.cols() < 1)
            throw InvalidParameters("count grid must be at least 1x1");
        for (std::int64_t v : counts_.data()) {
            if (v < 0) throw InvalidParameters("counts must be nonnegative");
            total_ += v;
        }
    }

    int rows() const { return counts_.rows(); }
    int cols() const { return counts_.cols(); }
    std::int64_t operator()(int i, int j) const { return counts_(i, j); }
    const Mat<std::int64_t>& counts() const { return counts_; }
    std::int64_t total() const { return total_; }

private:
    Mat<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

/// Probability mass function on the grid; entries >= 0 and sum within 1e-8 of 1.
/// Zero entries are allowed (empirical frequency matrices contain them).
class PmfGrid {
public:
    static constexpr double kSumTol = 1e-8;

    explicit PmfGrid(Mat<double> mass) : mass_(std::move(mass)) {
        if (mass_.rows() < 1 || mass_.cols() < 1)
            throw InvalidParameters("pmf grid must be at least 1x1");
        double s = 0.0;
        for (double v : mass_.data()) {
            if (!(v >= 0.0)) throw InvalidParameters("pmf entries must be nonnegative");
            s += v;
        }
        if (std::abs(s - 1.0) > kSumTol) throw InvalidParameters("pmf does not sum to 1");
    }

    int rows() const { return mass_.rows(); }
    int cols() const { return mass_.cols(); }
    double operator()(int i, int j) const { return mass_(i, j); }
    const Mat<double>& mass() const { return mass_; }

private:
    Mat<double> mass_;
};

/// Log-PMF theta. Entries may be -inf (zero-mass cells of a fallback result);
/// when flagged normalized, sum(exp(theta)) is within 1e-8 of 1.
class LogPmfGrid {
public:
    explicit LogPmfGrid(Mat<double> theta, bool normalized = false)
        : theta_(std::move(theta)), normalized_(normalized) {
        if (theta_.rows() < 1 || theta_.cols() < 1)
            throw InvalidParameters("log-pmf grid must be at least 1x1");
        if (normalized_) {
            double s = 0.0;
            for (double v : theta_.data()) s += std::exp(v);
            if (std::abs(s - 1.0) > PmfGrid::kSumTol)
                throw InvalidParameters("log-pmf flagged normalized but exp does not sum to 1");
        }
    }

    int rows() const { return theta_.rows(); }
    int cols() const { return theta_.cols(); }
    double operator()(int i, int j) const { return theta_(i, j); }
    const Mat<double>& theta() const { return theta_; }
    bool normalized() const { return normalized_; }

    PmfGrid to_pmf() const {
        Mat<double> p(theta_.rows(), theta_.cols());
        for (std::size_t k = 0; k < theta_.size(); ++k) p.data()[k] = std::exp(theta_.data()[k]);
        return PmfGrid(std::move(p));
    }

private:
    Mat<double> theta_;
    bool normalized_ = false;
};

/// Strictly positive per-entry weights for the weighted Frobenius norm.
class WeightGrid {
public:
    explicit WeightGrid(Mat<double> values) : values_(std::move(values)) {
        for (double v : values_.data())
            if (!(v > 0.0)) throw NonPositiveEntry("weights must be strictly positive");
    }

    int rows() const { return values_.rows(); }
    int cols() const { return values_.cols(); }
    double operator()(int i, int j) const { return values_(i, j); }
    const Mat<double>& values() const { return values_; }

private:
    Mat<double> values_;
};

/// Result of a minor / second-difference scan.
struct MinorReport {
    double min_minor = std::numeric_limits<double>::infinity();
    int arg_row = -1;
    int arg_col = -1;
    bool feasible = true;
};

/// Minimum adjacent second difference of a grid function and its location.
/// Adjacent windows suffice: the second difference over any (i<k, j<l)
/// rectangle is a sum of adjacent ones, so their nonnegativity is equivalent.
/// Grids with fewer than 2 rows or columns have no adjacent minors and report +inf.
inline MinorReport second_difference_report(const Mat<double>& theta) {
    MinorReport r;
    for (int i = 0; i + 1 < theta.rows(); ++i) {
        for (int j = 0; j + 1 < theta.cols(); ++j) {
            const double m = theta(i, j) + theta(i + 1, j + 1) - theta(i, j + 1) - theta(i + 1, j);
            if (m < r.min_minor) {
                r.min_minor = m;
                r.arg_row = i;
                r.arg_col = j;
            }
        }
    }
    return r;
}

inline MinorReport is_supermodular(const Mat<double>& theta, double tol) {
    if (tol < 0) throw InvalidParameters("tolerance must be nonnegative");
    MinorReport r = second_difference_report(theta);
    r.feasible = r.min_minor >= -tol;
    return r;
}

inline MinorReport is_supermodular(const LogPmfGrid& theta, double tol) {
    return is_supermodular(theta.theta(), tol);
}

/// Adjacent 2x2 minors of the PMF itself, p(i,j)p(i+1,j+1) - p(i,j+1)p(i+1,j).
/// Multiplicative form; avoids logs of tiny values.
inline MinorReport is_mtp2(const PmfGrid& p, double tol) {
    if (tol < 0) throw InvalidParameters("tolerance must be nonnegative");
    for (double v : p.mass().data())
        if (!(v > 0.0)) throw NonPositiveEntry("is_mtp2 requires strictly positive entries");
    MinorReport r;
    const auto& m = p.mass();
    for (int i = 0; i + 1 < m.rows(); ++i) {
        for (int j = 0; j + 1 < m.cols(); ++j) {
            const double d = m(i, j) * m(i + 1, j + 1) - m(i, j + 1) * m(i + 1, j);
            if (d < r.min_minor) {
                r.min_minor = d;
                r.arg_row = i;
                r.arg_col = j;
            }
        }
    }
    r.feasible = r.min_minor >= -tol;
    return r;
}

/// Squared Hellinger distance, sum (sqrt(p) - sqrt(q))^2; in [0, 2].
inline double hellinger_sq(const PmfGrid& p, const PmfGrid& q) {
    require_same_shape(p.mass(), q.mass(), "hellinger_sq");
    double s = 0.0;
    for (std::size_t k = 0; k < p.mass().size(); ++k) {
        const double d = std::sqrt(p.mass().data()[k]) - std::sqrt(q.mass().data()[k]);
        s += d * d;
    }
    return s;
}

/// KL divergence sum p log(p/q) with the convention 0 log 0 = 0.
inline double kl_divergence(const PmfGrid& p, const PmfGrid& q) {
    require_same_shape(p.mass(), q.mass(), "kl_divergence");
    double s = 0.0;
    for (std::size_t k = 0; k < p.mass().size(); ++k) {
        const double pv = p.mass().data()[k];
        const double qv = q.mass().data()[k];
        if (pv > 0.0) {
            if (qv <= 0.0) throw SupportViolation("kl_divergence: q vanishes where p is positive");
            s += pv * std::log(pv / qv);
        }
    }
    return s;
}

/// log( p(0,0) p(n1-1,n2-1) / (p(n1-1,0) p(0,n2-1)) ), a seminorm of log p.
inline double corner_ratio_log(const PmfGrid& p) {
    const auto& m = p.mass();
    const double a = m(0, 0);
    const double b = m(m.rows() - 1, m.cols() - 1);
    const double c = m(m.rows() - 1, 0);
    const double d = m(0, m.cols() - 1);
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw NonPositiveEntry("corner_ratio_log requires positive corner entries");
    return std::log(a) + std::log(b) - std::log(c) - std::log(d);
}

/// Max-shifted log-sum-exp over all entries.
inline double log_sum_exp(const Mat<double>& theta) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : theta.data()) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : theta.data()) s += std::exp(v - mx);
    return mx + std::log(s);
}

/// Subtracts log sum(exp(theta)) from every entry. Second differences are
/// unchanged, so supermodularity is preserved.
inline LogPmfGrid normalize_log(const LogPmfGrid& theta_tilde) {
    for (double v : theta_tilde.theta().data())
        if (!std::isfinite(v)) throw InvalidParameters("normalize_log requires finite entries");
    const double lse = log_sum_exp(theta_tilde.theta());
    Mat<double> out = theta_tilde.theta();
    for (double& v : out.data()) v -= lse;
    return LogPmfGrid(std::move(out), /*normalized=*/true);
}

/// Empirical frequency matrix Y/N.
inline PmfGrid empirical_pmf(const CountGrid& y) {
    if (y.total() < 1) throw InvalidParameters("empirical_pmf requires at least one observation");
    Mat<double> p(y.rows(), y.cols());
    const double n = static_cast<double>(y.total());
    for (std::size_t k = 0; k < p.size(); ++k)
        p.data()[k] = static_cast<double>(y.counts().data()[k]) / n;
    return PmfGrid(std::move(p));
}

}  // namespace totpos
