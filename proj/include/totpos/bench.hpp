#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "totpos/grid_io.hpp"
#include "totpos/synth.hpp"

namespace totpos::bench {

enum class ExperimentKind { GridVaryN, GridVaryn, DensityOracle, DensityFixedScaling, Runtime };
enum class EstimatorKind { Empirical, Mle, Box, LowerBounded };

inline const char* estimator_name(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::Empirical: return "empirical";
        case EstimatorKind::Mle: return "mle";
        case EstimatorKind::Box: return "box";
        case EstimatorKind::LowerBounded: return "lb";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::GridVaryN;
    std::vector<double> sweep;  // N values, or n values for GridVaryn
    int replicates = 5;
    std::uint64_t seed_base = 1;
    SolverOptions solver{};
    std::vector<EstimatorKind> estimators{EstimatorKind::Empirical, EstimatorKind::Mle,
                                          EstimatorKind::Box};
    // grid family parameters
    int grid_n = 16;
    double log_corner_ratio = 2.0;
    double fixed_samples = 1e6;  // N when the sweep runs over n
    // density family parameters
    std::vector<int> oracle_sizes{4, 7, 10, 15, 23, 36};
    double beta = 1.0;
    double scaling_c = 0.0;  // 0 = calibrate from beta
    double quad_tol = 1e-6;
    ExperimentKind runtime_family = ExperimentKind::GridVaryn;
    int threads = 1;

    void validate() const {
        if (sweep.empty()) throw InvalidParameters("experiment sweep must be nonempty");
        if (replicates < 1) throw InvalidParameters("replicates must be >= 1");
        if (threads < 1) throw InvalidParameters("threads must be >= 1");
        for (double v : sweep)
            if (!(v > 0.0)) throw InvalidParameters("sweep values must be positive");
    }
};

struct ExperimentRecord {
    double sweep = 0.0;
    std::string estimator;
    int replicate = 0;  // -1 marks aggregated mean rows
    std::string metric;
    double value = 0.0;
    std::string diagnostics;

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

struct Range {
    double lo;
    double hi;
};

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    Range fit_range{0.0, 0.0};
    double residual_rms = 0.0;
};

/// Ordinary least squares of log y on log x over the points whose x falls in
/// the range (all points when absent).
inline RegressionResult loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                                     std::optional<Range> range = {}) {
    if (xs.size() != ys.size()) throw DimensionMismatch("loglog_slope: xs and ys sizes differ");
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0))
            throw InvalidParameters("loglog_slope requires positive values");
        if (range && (xs[k] < range->lo || xs[k] > range->hi)) continue;
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(ys[k]));
    }
    if (lx.size() < 2) throw DegenerateRegression("need at least 2 points in the fit range");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    if (sxx == 0.0) throw DegenerateRegression("all x values coincide");
    RegressionResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.fit_range = range.value_or(Range{std::exp(*std::min_element(lx.begin(), lx.end())),
                                       std::exp(*std::max_element(lx.begin(), lx.end()))});
    double rss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double e = ly[k] - (r.intercept + r.slope * lx[k]);
        rss += e * e;
    }
    r.residual_rms = std::sqrt(rss / n);
    return r;
}

/// Default regression window: the upper half of the distinct sweep values.
inline Range top_half_range(std::vector<double> sweep) {
    std::sort(sweep.begin(), sweep.end());
    sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
    if (sweep.empty()) throw InvalidParameters("empty sweep");
    return Range{sweep[sweep.size() / 2], sweep.back()};
}

namespace detail {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < count;) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct GridEstimate {
    PmfGrid p;
    std::string diagnostics;
};

inline GridEstimate estimate_grid(EstimatorKind kind, const CountGrid& y,
                                  SolverOptions solver) {
    if (kind == EstimatorKind::Empirical) return {empirical_pmf(y), "ok=1"};
    switch (kind) {
        case EstimatorKind::Mle: solver.variant = Variant::Unconstrained; break;
        case EstimatorKind::Box: solver.variant = Variant::BoxConstrained; break;
        case EstimatorKind::LowerBounded: solver.variant = Variant::LowerBounded; break;
        default: break;
    }
    FitResult fit = fit_mle(y, solver);
    double mass = 0.0;
    for (double v : fit.p_hat.mass().data()) mass += v;
    const bool ok = fit.fell_back_to_empirical ||
                    (fit.final_feasibility <= 1e-4 && std::abs(mass - 1.0) <= 1e-8);
    std::ostringstream diag;
    diag << "outer=" << fit.outer_iters << ";converged=" << fit.converged
         << ";fellback=" << fit.fell_back_to_empirical << ";ok=" << ok;
    return {std::move(fit.p_hat), diag.str()};
}

inline void sort_records(std::vector<ExperimentRecord>& recs) {
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.sweep, a.estimator, a.replicate, a.metric) <
               std::tie(b.sweep, b.estimator, b.replicate, b.metric);
    });
}

inline void append_mean_rows(std::vector<ExperimentRecord>& recs) {
    std::map<std::tuple<double, std::string, std::string>, std::pair<double, int>> acc;
    for (const auto& r : recs) {
        if (r.replicate < 0) continue;
        auto& slot = acc[{r.sweep, r.estimator, r.metric}];
        slot.first += r.value;
        slot.second += 1;
    }
    for (const auto& [key, sum] : acc)
        recs.push_back({std::get<0>(key), std::get<1>(key), -1, std::get<2>(key) + "_mean",
                        sum.first / sum.second, ""});
}

}  // namespace detail

/// Grid-family benchmark: ground truth from the supermodular family, counts
/// sampled per replicate, squared Hellinger to the truth recorded per
/// estimator. Raw rows per replicate plus aggregated mean rows.
inline std::vector<ExperimentRecord> run_grid_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != ExperimentKind::GridVaryN && cfg.kind != ExperimentKind::GridVaryn)
        throw InvalidParameters("run_grid_experiment expects a grid sweep kind");
    const double corner = std::exp(cfg.log_corner_ratio);

    std::vector<PmfGrid> truths;
    truths.reserve(cfg.sweep.size());
    for (double v : cfg.sweep) {
        const int n = cfg.kind == ExperimentKind::GridVaryn ? static_cast<int>(v) : cfg.grid_n;
        truths.push_back(make_supermodular_pmf(n, corner));
    }

    const int tasks = static_cast<int>(cfg.sweep.size()) * cfg.replicates;
    std::vector<std::vector<ExperimentRecord>> slots(tasks);
    detail::parallel_for(tasks, cfg.threads, [&](int t) {
        const int si = t / cfg.replicates;
        const int rep = t % cfg.replicates;
        const PmfGrid& truth = truths[si];
        const auto n_samples = static_cast<std::int64_t>(
            cfg.kind == ExperimentKind::GridVaryN ? cfg.sweep[si] : cfg.fixed_samples);
        SeededRng rng(derive_seed(cfg.seed_base, static_cast<std::uint64_t>(t)));
        const CountGrid y = sample_multinomial(truth, n_samples, rng);
        for (EstimatorKind est : cfg.estimators) {
            ExperimentRecord rec{cfg.sweep[si], estimator_name(est), rep, "h2_truth", 0.0, ""};
            try {
                detail::GridEstimate e = detail::estimate_grid(est, y, cfg.solver);
                rec.value = hellinger_sq(truth, e.p);
                rec.diagnostics = std::move(e.diagnostics);
            } catch (const std::exception& ex) {
                rec.metric = "failed";
                rec.diagnostics = std::string("error=") + ex.what();
            }
            slots[t].push_back(std::move(rec));
        }
    });

    std::vector<ExperimentRecord> recs;
    for (auto& s : slots)
        for (auto& r : s) recs.push_back(std::move(r));
    detail::sort_records(recs);
    detail::append_mean_rows(recs);
    return recs;
}

/// Continuous-family benchmark on the truncated Gaussian. Oracle mode fits at
/// every configured n and keeps the best Hellinger distance to the truth
/// (ties toward smaller n); fixed-scaling mode uses n = ceil(C N^(1/(2b+1)))
/// and records the variance part against the cell-averaged truth.
inline std::vector<ExperimentRecord> run_density_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != ExperimentKind::DensityOracle && cfg.kind != ExperimentKind::DensityFixedScaling)
        throw InvalidParameters("run_density_experiment expects a density sweep kind");
    const AnalyticDensity truth = truncated_gaussian_density();

    const bool oracle = cfg.kind == ExperimentKind::DensityOracle;
    const double scale_c = cfg.scaling_c > 0.0 ? cfg.scaling_c : fixed_scaling_constant(cfg.beta);

    std::vector<int> sizes;                          // per sweep point (fixed scaling)
    std::map<int, PiecewiseConstantDensity> truth_cells;  // fixed scaling variance part
    if (!oracle) {
        for (double v : cfg.sweep) {
            const int n = fixed_scaling_grid_size(static_cast<std::int64_t>(v), cfg.beta, scale_c);
            sizes.push_back(n);
            if (!truth_cells.count(n))
                truth_cells.emplace(n, cell_average_density(truth, n, 1e-7));
        }
    }

    const int tasks = static_cast<int>(cfg.sweep.size()) * cfg.replicates;
    std::vector<std::vector<ExperimentRecord>> slots(tasks);
    detail::parallel_for(tasks, cfg.threads, [&](int t) {
        const int si = t / cfg.replicates;
        const int rep = t % cfg.replicates;
        const auto n_samples = static_cast<std::int64_t>(cfg.sweep[si]);
        SeededRng rng(derive_seed(cfg.seed_base, static_cast<std::uint64_t>(t)));
        const SamplePoints pts = sample_truncated_gaussian(n_samples, rng);
        for (EstimatorKind est : cfg.estimators) {
            ExperimentRecord rec{cfg.sweep[si], estimator_name(est), rep, "", 0.0, ""};
            try {
                if (oracle) {
                    double best = std::numeric_limits<double>::infinity();
                    std::string diag;
                    for (int n : cfg.oracle_sizes) {
                        std::string d = "ok=1";
                        PiecewiseConstantDensity dens = [&] {
                            if (est == EstimatorKind::Empirical) return empirical_density(pts, n);
                            SolverOptions s = cfg.solver;
                            s.variant = est == EstimatorKind::Box ? Variant::BoxConstrained
                                        : est == EstimatorKind::LowerBounded
                                            ? Variant::LowerBounded
                                            : Variant::Unconstrained;
                            DensityFitResult f = fit_density(pts, n, s);
                            std::ostringstream os;
                            os << "outer=" << f.fit.outer_iters
                               << ";fellback=" << f.fit.fell_back_to_empirical;
                            d = os.str();
                            return std::move(f.density);
                        }();
                        const double h2 = hellinger_sq_continuous(dens, truth, cfg.quad_tol);
                        if (h2 < best) {
                            best = h2;
                            diag = "n=" + std::to_string(n) + ";" + d;
                        }
                    }
                    rec.metric = "h2_truth";
                    rec.value = best;
                    rec.diagnostics = diag;
                } else {
                    const int n = sizes[si];
                    PiecewiseConstantDensity dens = [&] {
                        if (est == EstimatorKind::Empirical) return empirical_density(pts, n);
                        SolverOptions s = cfg.solver;
                        s.variant = est == EstimatorKind::Box ? Variant::BoxConstrained
                                    : est == EstimatorKind::LowerBounded ? Variant::LowerBounded
                                                                         : Variant::Unconstrained;
                        return std::move(fit_density(pts, n, s).density);
                    }();
                    rec.metric = "h2_variance_part";
                    rec.value = hellinger_sq_pc(dens, truth_cells.at(n));
                    rec.diagnostics = "n=" + std::to_string(n);
                }
            } catch (const std::exception& ex) {
                rec.metric = "failed";
                rec.value = 0.0;
                rec.diagnostics = std::string("error=") + ex.what();
            }
            slots[t].push_back(std::move(rec));
        }
    });

    std::vector<ExperimentRecord> recs;
    for (auto& s : slots)
        for (auto& r : s) recs.push_back(std::move(r));
    detail::sort_records(recs);
    detail::append_mean_rows(recs);
    return recs;
}

/// Wall-clock solve time per fit (monotonic clock, sampling excluded),
/// averaged over replicates via the usual mean rows. Runtime values carry no
/// determinism guarantee.
inline std::vector<ExperimentRecord> run_runtime_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != ExperimentKind::Runtime)
        throw InvalidParameters("run_runtime_experiment expects the runtime kind");
    const double corner = std::exp(cfg.log_corner_ratio);
    const bool vary_n = cfg.runtime_family == ExperimentKind::GridVaryn;

    std::vector<PmfGrid> truths;
    for (double v : cfg.sweep)
        truths.push_back(make_supermodular_pmf(vary_n ? static_cast<int>(v) : cfg.grid_n, corner));

    const int tasks = static_cast<int>(cfg.sweep.size()) * cfg.replicates;
    std::vector<std::vector<ExperimentRecord>> slots(tasks);
    detail::parallel_for(tasks, cfg.threads, [&](int t) {
        const int si = t / cfg.replicates;
        const int rep = t % cfg.replicates;
        const auto n_samples =
            static_cast<std::int64_t>(vary_n ? cfg.fixed_samples : cfg.sweep[si]);
        SeededRng rng(derive_seed(cfg.seed_base, static_cast<std::uint64_t>(t)));
        const CountGrid y = sample_multinomial(truths[si], n_samples, rng);
        for (EstimatorKind est : cfg.estimators) {
            ExperimentRecord rec{cfg.sweep[si], estimator_name(est), rep, "runtime_seconds", 0.0,
                                 ""};
            try {
                const auto start = std::chrono::steady_clock::now();
                detail::GridEstimate e = detail::estimate_grid(est, y, cfg.solver);
                const auto stop = std::chrono::steady_clock::now();
                rec.value = std::chrono::duration<double>(stop - start).count();
                rec.diagnostics = std::move(e.diagnostics);
            } catch (const std::exception& ex) {
                rec.metric = "failed";
                rec.diagnostics = std::string("error=") + ex.what();
            }
            slots[t].push_back(std::move(rec));
        }
    });

    std::vector<ExperimentRecord> recs;
    for (auto& s : slots)
        for (auto& r : s) recs.push_back(std::move(r));
    detail::sort_records(recs);
    detail::append_mean_rows(recs);
    return recs;
}

inline void emit_csv(const std::vector<ExperimentRecord>& recs, std::ostream& out) {
    out << "sweep,estimator,replicate,metric,value\n";
    for (const auto& r : recs)
        out << totpos::detail::format_double(r.sweep) << ',' << r.estimator << ',' << r.replicate
            << ',' << r.metric << ',' << totpos::detail::format_double(r.value) << '\n';
}

inline nlohmann::json records_json(const std::vector<ExperimentRecord>& recs,
                                   const nlohmann::json& meta = nlohmann::json::object()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : recs)
        rows.push_back({{"sweep", r.sweep},
                        {"estimator", r.estimator},
                        {"replicate", r.replicate},
                        {"metric", r.metric},
                        {"value", r.value},
                        {"diagnostics", r.diagnostics}});
    return nlohmann::json{{"meta", meta}, {"records", rows}};
}

enum class EmitFormat { Csv, Json };

inline void emit(const std::vector<ExperimentRecord>& recs, EmitFormat format,
                 const std::string& path, const nlohmann::json& meta = nlohmann::json::object()) {
    std::ostringstream body;
    if (format == EmitFormat::Csv)
        emit_csv(recs, body);
    else
        body << records_json(recs, meta).dump(2) << '\n';
    write_text_file(body.str(), path);
}

/// Reads back a CSV produced by emit_csv (diagnostics are not round-tripped).
inline std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("record CSV is empty");
    std::vector<ExperimentRecord> recs;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string sweep, estimator, replicate, metric, value;
        if (!std::getline(ls, sweep, ',') || !std::getline(ls, estimator, ',') ||
            !std::getline(ls, replicate, ',') || !std::getline(ls, metric, ',') ||
            !std::getline(ls, value))
            throw IoError("malformed record row: '" + line + "'");
        recs.push_back({totpos::detail::parse_double(sweep), estimator, std::stoi(replicate),
                        metric, totpos::detail::parse_double(value), ""});
    }
    return recs;
}

}  // namespace totpos::bench
