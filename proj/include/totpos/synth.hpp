#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "totpos/density.hpp"
#include "totpos/rng.hpp"

namespace totpos {

/// The ground-truth grid family: theta(i,j) = 1 + log(L) i j / (n-1)^2
/// (0-based), exponentiated and normalized. Supermodular by construction with
/// corner ratio exactly L.
inline PmfGrid make_supermodular_pmf(int n, double corner_ratio) {
    if (n < 2 || !(corner_ratio >= 1.0))
        throw InvalidParameters("make_supermodular_pmf requires n >= 2 and L >= 1");
    const double log_l = std::log(corner_ratio);
    const double denom = static_cast<double>(n - 1) * (n - 1);
    Mat<double> theta(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            theta(i, j) = 1.0 + log_l * static_cast<double>(i) * j / denom;
    return normalize_log(LogPmfGrid(std::move(theta))).to_pmf();
}

/// Walker/Vose alias table; O(K) setup, one uniform per draw.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& probs) {
        const int k = static_cast<int>(probs.size());
        prob_.resize(k);
        alias_.resize(k);
        double total = 0.0;
        for (double p : probs) total += p;
        std::vector<double> scaled(k);
        std::vector<int> small, large;
        for (int i = 0; i < k; ++i) {
            scaled[i] = probs[i] * k / total;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const int s = small.back();
            const int l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (int i : large) {
            prob_[i] = 1.0;
            alias_[i] = i;
        }
        for (int i : small) {
            prob_[i] = 1.0;
            alias_[i] = i;
        }
    }

    int sample(double u01) const {
        const double x = u01 * static_cast<double>(prob_.size());
        int i = static_cast<int>(x);
        if (i >= static_cast<int>(prob_.size())) i = static_cast<int>(prob_.size()) - 1;
        const double frac = x - static_cast<double>(i);
        return frac < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

/// N categorical draws from p aggregated into counts.
inline CountGrid sample_multinomial(const PmfGrid& p, std::int64_t n_draws, SeededRng& rng) {
    if (n_draws < 0) throw InvalidParameters("sample_multinomial requires N >= 0");
    const AliasTable table(p.mass().data());
    Mat<std::int64_t> counts(p.rows(), p.cols(), 0);
    for (std::int64_t k = 0; k < n_draws; ++k) ++counts.data()[table.sample(rng.next_double())];
    return CountGrid(std::move(counts));
}

/// N(mean (0.5, 0.5), cov [[0.2, 0.1], [0.1, 0.2]]) conditioned on [0,1]^2.
struct TruncatedGaussianSpec {
    static constexpr double mean = 0.5;
    static constexpr double var = 0.2;
    static constexpr double cov = 0.1;

    // closed-form Cholesky of the 2x2 covariance
    static double chol_11() { return std::sqrt(var); }
    static double chol_21() { return cov / std::sqrt(var); }
    static double chol_22() { return std::sqrt(var - cov * cov / var); }

    /// Unnormalized Gaussian density on the plane.
    static double unnormalized(double x, double y) {
        const double u = x - mean, v = y - mean;
        const double det = var * var - cov * cov;  // 0.03
        return std::exp(-(10.0 / 3.0) * (u * u + v * v - u * v)) /
               (2.0 * std::numbers::pi * std::sqrt(det));
    }

    /// Mass of [0,1]^2 under the Gaussian, computed once by quadrature.
    static double normalizer() {
        static const double z =
            quad::integrate_rect([](double x, double y) { return unnormalized(x, y); }, 0.0, 1.0,
                                 0.0, 1.0, 1e-11);
        return z;
    }
};

inline AnalyticDensity truncated_gaussian_density() {
    AnalyticDensity d([](double x, double y) { return TruncatedGaussianSpec::unnormalized(x, y); },
                      1e-9);
    d.dmin = TruncatedGaussianSpec::unnormalized(0.0, 1.0) / TruncatedGaussianSpec::normalizer();
    d.dmax = TruncatedGaussianSpec::unnormalized(0.5, 0.5) / TruncatedGaussianSpec::normalizer();
    d.smoothness = {1.0, 1.0};
    return d;
}

/// Rejection sampler: Gaussian pairs via the Cholesky factor, keeping draws
/// that land in [0,1]^2 until N are accepted. When proposals_out is given it
/// receives the number of proposals consumed.
inline SamplePoints sample_truncated_gaussian(std::int64_t n_accept, SeededRng& rng,
                                              std::int64_t* proposals_out = nullptr) {
    if (n_accept < 0) throw InvalidParameters("sample_truncated_gaussian requires N >= 0");
    SamplePoints out;
    out.pts.reserve(static_cast<std::size_t>(n_accept));
    const double l11 = TruncatedGaussianSpec::chol_11();
    const double l21 = TruncatedGaussianSpec::chol_21();
    const double l22 = TruncatedGaussianSpec::chol_22();
    std::int64_t proposals = 0;
    while (static_cast<std::int64_t>(out.pts.size()) < n_accept) {
        const double z1 = rng.next_normal();
        const double z2 = rng.next_normal();
        const double x = TruncatedGaussianSpec::mean + l11 * z1;
        const double y = TruncatedGaussianSpec::mean + l21 * z1 + l22 * z2;
        ++proposals;
        if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) out.pts.push_back({x, y});
    }
    if (proposals_out) *proposals_out = proposals;
    return out;
}

/// Discrete surrogate for the differential total-positivity check: cell
/// averages at grid size n must pass is_mtp2. Used to reject misconfigured
/// ground truths before benchmarking.
inline MinorReport validate_mtp2_generator(const AnalyticDensity& density, int n,
                                           double tol = 1e-9) {
    return is_mtp2(cell_average_density(density, n, 1e-9).cells, tol);
}

}  // namespace totpos
