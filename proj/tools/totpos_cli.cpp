// Command-line surface: generators, single fits, raw projections and the
// benchmark harness. Outputs are CSV grids plus JSON metadata/diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "totpos/totpos.hpp"

namespace {

using nlohmann::json;
using namespace totpos;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct GlobalFlags {
    std::uint64_t seed = 1;
    std::string out = "out.csv";
    std::string format = "csv";
    int threads = 1;
    bool paper_scale = false;
};

bench::EmitFormat parse_format(const std::string& f) {
    if (f == "csv") return bench::EmitFormat::Csv;
    if (f == "json") return bench::EmitFormat::Json;
    throw InvalidParameters("unknown format '" + f + "' (expected csv or json)");
}

Variant parse_variant(const std::string& v) {
    if (v == "mle") return Variant::Unconstrained;
    if (v == "box") return Variant::BoxConstrained;
    if (v == "lb") return Variant::LowerBounded;
    throw InvalidParameters("unknown variant '" + v + "' (expected mle, box or lb)");
}

std::vector<bench::EstimatorKind> parse_estimators(const std::string& list) {
    std::vector<bench::EstimatorKind> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "empirical" || tok == "emp")
            out.push_back(bench::EstimatorKind::Empirical);
        else if (tok == "mle")
            out.push_back(bench::EstimatorKind::Mle);
        else if (tok == "box")
            out.push_back(bench::EstimatorKind::Box);
        else if (tok == "lb")
            out.push_back(bench::EstimatorKind::LowerBounded);
        else
            throw InvalidParameters("unknown estimator '" + tok + "'");
    }
    if (out.empty()) throw InvalidParameters("estimator list is empty");
    return out;
}

SamplePoints read_samples_file(const std::string& path) {
    const Mat<double> m = read_csv_matrix_file(path);
    if (m.cols() != 2) throw DimensionMismatch("sample CSV must have two columns");
    SamplePoints pts;
    pts.pts.reserve(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) pts.pts.push_back({m(i, 0), m(i, 1)});
    return pts;
}

void write_json_file(const json& j, const std::string& path) {
    write_text_file(j.dump(2) + "\n", path);
}

std::string sibling_json_path(const std::string& csv_path, const char* suffix) {
    std::filesystem::path q(csv_path);
    q.replace_extension("");
    return q.string() + suffix;
}

json solver_meta(const SolverOptions& opts) {
    return json{{"outer_rel_tol", opts.outer_rel_tol},
                {"max_outer", opts.max_outer},
                {"inner_rel_tol", opts.inner.rel_tol},
                {"max_inner", opts.inner.max_sweeps},
                {"epsilon_floor", opts.epsilon_floor}};
}

json fit_diagnostics(const FitResult& fit) {
    return json{{"outer_iters", fit.outer_iters},
                {"converged", fit.converged},
                {"fell_back_to_empirical", fit.fell_back_to_empirical},
                {"final_feasibility", fit.final_feasibility},
                {"sum_exp_before_normalize", fit.sum_exp_before_normalize},
                {"inner_not_converged", fit.inner_not_converged},
                {"objective_trace", fit.objective_trace}};
}

const AnalyticDensity& registered_truth(const std::string& name) {
    static std::map<std::string, AnalyticDensity> registry = [] {
        std::map<std::string, AnalyticDensity> r;
        r.emplace("truncated-gaussian", truncated_gaussian_density());
        r.emplace("uniform", AnalyticDensity([](double, double) { return 1.0; }));
        return r;
    }();
    const auto it = registry.find(name);
    if (it == registry.end())
        throw InvalidParameters("unknown ground truth '" + name + "' (try truncated-gaussian)");
    return it->second;
}

// ---- gen ----------------------------------------------------------------

int run_gen_grid(const GlobalFlags& g, int n, double log_l, std::int64_t n_samples) {
    const PmfGrid truth = make_supermodular_pmf(n, std::exp(log_l));
    SeededRng rng(g.seed);
    const CountGrid counts = sample_multinomial(truth, n_samples, rng);
    write_csv_file(counts.counts(), g.out);
    write_json_file(json{{"generator", {{"kind", "supermodular-grid"},
                                        {"n", n},
                                        {"logL", log_l},
                                        {"N", n_samples}}},
                         {"seed", g.seed},
                         {"rng", SeededRng::algorithm}},
                    sibling_json_path(g.out, ".meta.json"));
    return kExitOk;
}

int run_gen_points(const GlobalFlags& g, std::int64_t n_samples) {
    SeededRng rng(g.seed);
    const SamplePoints pts = sample_truncated_gaussian(n_samples, rng);
    Mat<double> m(static_cast<int>(pts.pts.size()), 2);
    for (int i = 0; i < m.rows(); ++i) {
        m(i, 0) = pts.pts[i][0];
        m(i, 1) = pts.pts[i][1];
    }
    write_csv_file(m, g.out);
    write_json_file(json{{"generator", {{"kind", "truncated-gaussian"}, {"N", n_samples}}},
                         {"seed", g.seed},
                         {"rng", SeededRng::algorithm}},
                    sibling_json_path(g.out, ".meta.json"));
    return kExitOk;
}

// ---- fit-grid -----------------------------------------------------------

int run_fit_grid(const GlobalFlags& g, const std::string& counts_path, const SolverOptions& opts,
                 const std::string& variant_name, const std::string& diag_path) {
    const CountGrid counts(read_csv_counts_file(counts_path));
    const FitResult fit = fit_mle(counts, opts);
    write_csv_file(fit.p_hat.mass(), g.out);
    json diag = fit_diagnostics(fit);
    diag["variant"] = variant_name;
    diag["solver"] = solver_meta(opts);
    write_json_file(diag, diag_path.empty() ? sibling_json_path(g.out, ".diag.json") : diag_path);
    return kExitOk;
}

// ---- fit-density --------------------------------------------------------

int run_fit_density(const GlobalFlags& g, const std::string& samples_path,
                    const std::string& variant_name, const SolverOptions& opts, int n_flag,
                    const std::vector<double>& auto_n, const std::vector<double>& fixed_scaling,
                    const std::string& truth_name, double quad_tol) {
    const SamplePoints pts = read_samples_file(samples_path);
    const auto n_samples = static_cast<std::int64_t>(pts.pts.size());

    int n = n_flag;
    if (!auto_n.empty()) {
        if (auto_n.size() != 3) throw InvalidParameters("--auto-n needs beta,R,dmin");
        n = select_grid_size(n_samples, auto_n[0], auto_n[1], auto_n[2]);
    } else if (!fixed_scaling.empty()) {
        if (fixed_scaling.size() != 2) throw InvalidParameters("--fixed-scaling needs C,beta");
        const double c =
            fixed_scaling[0] > 0 ? fixed_scaling[0] : fixed_scaling_constant(fixed_scaling[1]);
        n = fixed_scaling_grid_size(n_samples, fixed_scaling[1], c);
    }
    if (n < 1)
        throw InvalidParameters("grid size must be chosen via --n, --auto-n or --fixed-scaling");

    json meta{{"n", n}, {"N", n_samples}, {"variant", variant_name}};
    PiecewiseConstantDensity density = [&] {
        if (variant_name == "empirical") return empirical_density(pts, n);
        DensityFitResult fit = fit_density(pts, n, opts);
        meta["diagnostics"] = fit_diagnostics(fit.fit);
        return std::move(fit.density);
    }();
    write_csv_file(density.cells.mass(), g.out);

    if (!truth_name.empty()) {
        const AnalyticDensity& truth = registered_truth(truth_name);
        meta["truth"] = truth_name;
        meta["H2_to_truth"] = hellinger_sq_continuous(density, truth, quad_tol);
        meta["H2_variance_part"] = hellinger_sq_pc(density, cell_average_density(truth, n, 1e-7));
    }
    write_json_file(meta, sibling_json_path(g.out, ".meta.json"));
    return kExitOk;
}

// ---- project ------------------------------------------------------------

int run_project(const GlobalFlags& g, const std::string& grid_path,
                const std::string& weights_path, const std::string& lower_path,
                const std::string& upper_path, const ProjectionOptions& opts,
                const std::string& diag_path) {
    const Mat<double> y = read_csv_matrix_file(grid_path);
    const WeightGrid w(read_csv_matrix_file(weights_path));
    std::optional<BoxBounds> box;
    if (!lower_path.empty() || !upper_path.empty()) {
        if (lower_path.empty() || upper_path.empty())
            throw InvalidParameters("--lower and --upper must be given together");
        box.emplace(read_csv_matrix_file(lower_path), read_csv_matrix_file(upper_path));
    }
    const DykstraState st = dykstra_project(y, w, box, opts);
    write_csv_file(st.theta, g.out);
    write_json_file(json{{"sweeps", st.sweeps},
                         {"feasibility_gap", st.feasibility_gap},
                         {"rel_change", st.rel_change},
                         {"converged", st.converged}},
                    diag_path.empty() ? sibling_json_path(g.out, ".diag.json") : diag_path);
    return kExitOk;
}

// ---- bench --------------------------------------------------------------

json bench_meta(const bench::ExperimentConfig& cfg, const GlobalFlags& g,
                const std::string& subcommand) {
    json est = json::array();
    for (auto e : cfg.estimators) est.push_back(bench::estimator_name(e));
    return json{{"experiment", subcommand},
                {"sweep", cfg.sweep},
                {"replicates", cfg.replicates},
                {"seed", cfg.seed_base},
                {"rng", SeededRng::algorithm},
                {"estimators", est},
                {"paper_scale", g.paper_scale},
                {"solver", solver_meta(cfg.solver)}};
}

void report_slopes(const std::vector<bench::ExperimentRecord>& recs, const std::string& metric,
                   std::optional<bench::Range> range) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
    for (const auto& r : recs)
        if (r.replicate < 0 && r.metric == metric + "_mean") {
            series[r.estimator].first.push_back(r.sweep);
            series[r.estimator].second.push_back(r.value);
        }
    for (const auto& [est, xy] : series) {
        try {
            const bench::RegressionResult fit = bench::loglog_slope(xy.first, xy.second, range);
            std::fprintf(stderr, "slope[%s] = %.4f (range %.6g..%.6g, residual rms %.3g)\n",
                         est.c_str(), fit.slope, fit.fit_range.lo, fit.fit_range.hi,
                         fit.residual_rms);
        } catch (const DegenerateRegression&) {
            std::fprintf(stderr, "slope[%s] = degenerate\n", est.c_str());
        }
    }
}

void export_density_grids(const bench::ExperimentConfig& cfg, const std::string& dir,
                          int export_n) {
    std::filesystem::create_directories(dir);
    const AnalyticDensity truth = truncated_gaussian_density();
    write_csv_file(cell_average_density(truth, export_n, 1e-7).cells.mass(),
                   dir + "/truth_n" + std::to_string(export_n) + ".csv");
    for (std::size_t si = 0; si < cfg.sweep.size(); ++si) {
        const auto n_samples = static_cast<std::int64_t>(cfg.sweep[si]);
        SeededRng rng(
            derive_seed(cfg.seed_base, static_cast<std::uint64_t>(si) * cfg.replicates));
        const SamplePoints pts = sample_truncated_gaussian(n_samples, rng);
        const std::string tag = "_N" + std::to_string(n_samples) + "_n" + std::to_string(export_n);
        write_csv_file(empirical_density(pts, export_n).cells.mass(),
                       dir + "/empirical" + tag + ".csv");
        SolverOptions opts = cfg.solver;
        opts.variant = Variant::Unconstrained;
        write_csv_file(fit_density(pts, export_n, opts).density.cells.mass(),
                       dir + "/mle" + tag + ".csv");
    }
}

std::vector<double> log10_sweep(double lo, double hi) {
    std::vector<double> v;
    for (double x = lo; x <= hi * 1.0000001; x *= 10.0) v.push_back(x);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Totally positive (MTP2) distribution estimation on grids and [0,1]^2"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--seed", g.seed, "base seed for all randomness");
    app.add_option("--out", g.out, "output path for the primary artifact");
    app.add_option("--format", g.format, "bench output format: csv or json");
    app.add_option("--threads", g.threads, "worker threads for bench sweeps");
    app.add_flag("--paper-scale", g.paper_scale,
                 "full-size experiment settings instead of desk-scale defaults");

    // gen
    auto* gen = app.add_subcommand("gen", "synthetic data generators");
    gen->require_subcommand(1);
    auto* gen_grid = gen->add_subcommand("grid", "multinomial counts from the supermodular family");
    int gg_n = 16;
    double gg_logl = 2.0;
    double gg_samples = 1e5;
    gen_grid->add_option("--n", gg_n, "grid size");
    gen_grid->add_option("--logL", gg_logl, "log corner ratio of the ground truth");
    gen_grid->add_option("--N", gg_samples, "number of observations");
    auto* gen_points = gen->add_subcommand("points", "truncated-Gaussian samples on [0,1]^2");
    double gp_samples = 1e4;
    gen_points->add_option("--N", gp_samples, "number of samples");

    // fit-grid
    auto* fit_grid = app.add_subcommand("fit-grid", "maximum-likelihood fit of a count grid");
    std::string fg_counts, fg_variant = "box", fg_diag;
    SolverOptions fg_opts;
    fit_grid->add_option("--counts", fg_counts, "counts CSV")->required();
    fit_grid->add_option("--variant", fg_variant, "mle, box or lb");
    fit_grid->add_option("--epsilon", fg_opts.epsilon_floor, "mass floor for the lb variant");
    fit_grid->add_option("--inner-tol", fg_opts.inner.rel_tol, "projection relative tolerance");
    fit_grid->add_option("--outer-tol", fg_opts.outer_rel_tol, "Newton relative tolerance");
    fit_grid->add_option("--max-inner", fg_opts.inner.max_sweeps, "projection sweep cap");
    fit_grid->add_option("--max-outer", fg_opts.max_outer, "Newton iteration cap");
    fit_grid->add_flag("--prob-init", fg_opts.init_probability_scale,
                       "initialize on the probability scale instead of log");
    fit_grid->add_option("--diag", fg_diag, "diagnostics JSON path");

    // fit-density
    auto* fit_dens = app.add_subcommand("fit-density", "piecewise-constant density fit");
    std::string fd_samples, fd_variant = "mle", fd_truth;
    int fd_n = 0;
    std::vector<double> fd_auto_n, fd_fixed;
    double fd_quad_tol = 1e-7;
    SolverOptions fd_opts;
    fit_dens->add_option("--samples", fd_samples, "two-column sample CSV")->required();
    fit_dens->add_option("--variant", fd_variant, "mle, box, lb or empirical");
    fit_dens->add_option("--n", fd_n, "grid size");
    fit_dens->add_option("--auto-n", fd_auto_n, "beta,R,dmin for the bias-variance choice")
        ->expected(3)
        ->delimiter(',');
    fit_dens->add_option("--fixed-scaling", fd_fixed, "C,beta (C = 0 calibrates C from beta)")
        ->expected(2)
        ->delimiter(',');
    fit_dens->add_option("--truth", fd_truth, "registered ground truth for error metrics");
    fit_dens->add_option("--quad-tol", fd_quad_tol, "quadrature tolerance for H2 metrics");
    fit_dens->add_option("--inner-tol", fd_opts.inner.rel_tol, "projection relative tolerance");
    fit_dens->add_option("--outer-tol", fd_opts.outer_rel_tol, "Newton relative tolerance");
    fit_dens->add_option("--epsilon", fd_opts.epsilon_floor, "mass floor for the lb variant");

    // project
    auto* project = app.add_subcommand("project", "weighted projection onto the constraint set");
    std::string pj_grid, pj_weights, pj_lower, pj_upper, pj_diag;
    ProjectionOptions pj_opts;
    project->add_option("--grid", pj_grid, "input grid CSV")->required();
    project->add_option("--weights", pj_weights, "weight grid CSV")->required();
    project->add_option("--lower", pj_lower, "lower bound CSV");
    project->add_option("--upper", pj_upper, "upper bound CSV");
    project->add_option("--rel-tol", pj_opts.rel_tol, "relative tolerance");
    project->add_option("--max-sweeps", pj_opts.max_sweeps, "sweep cap");
    project->add_option("--diag", pj_diag, "diagnostics JSON path");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "experiment harness");
    bench_cmd->require_subcommand(1);
    std::vector<double> b_sweep;
    int b_replicates = 0;
    std::string b_estimators;
    double b_logl = std::numeric_limits<double>::quiet_NaN();
    int b_grid_n = 16;
    double b_fixed_samples = 0.0;
    std::vector<int> b_oracle_sizes;
    double b_beta = 1.0, b_scaling_c = 0.0, b_quad_tol = 1e-6;
    std::string b_vary = "n", b_export_dir;
    int b_export_n = 16;
    bool b_report_slopes = false;
    std::vector<double> b_fit_range;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--sweep", b_sweep, "sweep values (N or n)")->delimiter(',');
        sub->add_option("--replicates", b_replicates, "independent replicates per sweep value");
        sub->add_option("--estimators", b_estimators, "comma list: empirical,mle,box,lb");
        sub->add_flag("--report-slopes", b_report_slopes, "print log-log slopes to stderr");
        sub->add_option("--fit-range", b_fit_range, "slope fit range lo,hi (default top half)")
            ->expected(2)
            ->delimiter(',');
    };
    auto* bench_grid_n = bench_cmd->add_subcommand("grid-n", "grid family, sweep over N");
    add_common(bench_grid_n);
    bench_grid_n->add_option("--n", b_grid_n, "grid size");
    bench_grid_n->add_option("--logL", b_logl, "log corner ratio");
    auto* bench_grid_size = bench_cmd->add_subcommand("grid-size", "grid family, sweep over n");
    add_common(bench_grid_size);
    bench_grid_size->add_option("--N", b_fixed_samples, "fixed sample count");
    bench_grid_size->add_option("--logL", b_logl, "log corner ratio");
    auto* bench_do =
        bench_cmd->add_subcommand("density-oracle", "continuous family, best n per replicate");
    add_common(bench_do);
    bench_do->add_option("--n-list", b_oracle_sizes, "candidate grid sizes")->delimiter(',');
    bench_do->add_option("--quad-tol", b_quad_tol, "quadrature tolerance");
    bench_do->add_option("--export-grids", b_export_dir, "directory for heat-map cell grids");
    bench_do->add_option("--export-n", b_export_n, "grid size for exported heat maps");
    auto* bench_ds =
        bench_cmd->add_subcommand("density-scaling", "continuous family, fixed n scaling");
    add_common(bench_ds);
    bench_ds->add_option("--beta", b_beta, "smoothness used for the scaling");
    bench_ds->add_option("--C", b_scaling_c, "scaling constant (0 = calibrated)");
    auto* bench_rt = bench_cmd->add_subcommand("runtime", "wall-clock per fit");
    add_common(bench_rt);
    bench_rt->add_option("--vary", b_vary, "sweep dimension: n or N");
    bench_rt->add_option("--n", b_grid_n, "grid size when varying N");
    bench_rt->add_option("--N", b_fixed_samples, "sample count when varying n");
    bench_rt->add_option("--logL", b_logl, "log corner ratio");

    try {
        app.parse(argc, argv);

        if (gen_grid->parsed())
            return run_gen_grid(g, gg_n, gg_logl, static_cast<std::int64_t>(gg_samples));
        if (gen_points->parsed()) return run_gen_points(g, static_cast<std::int64_t>(gp_samples));
        if (fit_grid->parsed()) {
            fg_opts.variant = parse_variant(fg_variant);
            return run_fit_grid(g, fg_counts, fg_opts, fg_variant, fg_diag);
        }
        if (fit_dens->parsed()) {
            if (fd_variant != "empirical") fd_opts.variant = parse_variant(fd_variant);
            return run_fit_density(g, fd_samples, fd_variant, fd_opts, fd_n, fd_auto_n, fd_fixed,
                                   fd_truth, fd_quad_tol);
        }
        if (project->parsed())
            return run_project(g, pj_grid, pj_weights, pj_lower, pj_upper, pj_opts, pj_diag);

        bench::ExperimentConfig cfg;
        cfg.seed_base = g.seed;
        cfg.threads = g.threads;
        std::string subname;
        std::string metric = "h2_truth";
        if (bench_grid_n->parsed()) {
            subname = "grid-n";
            cfg.kind = bench::ExperimentKind::GridVaryN;
            cfg.grid_n = b_grid_n;
            cfg.log_corner_ratio = std::isnan(b_logl) ? 2.0 : b_logl;
            cfg.sweep = b_sweep.empty() ? log10_sweep(1e3, g.paper_scale ? 1e8 : 1e6) : b_sweep;
            cfg.replicates = b_replicates ? b_replicates : (g.paper_scale ? 20 : 5);
            cfg.estimators =
                parse_estimators(b_estimators.empty() ? "empirical,mle,box" : b_estimators);
        } else if (bench_grid_size->parsed()) {
            subname = "grid-size";
            cfg.kind = bench::ExperimentKind::GridVaryn;
            cfg.fixed_samples = b_fixed_samples > 0 ? b_fixed_samples : (g.paper_scale ? 1e7 : 1e6);
            cfg.log_corner_ratio = std::isnan(b_logl) ? 0.2 : b_logl;
            cfg.sweep = b_sweep.empty() ? (g.paper_scale ? std::vector<double>{8, 16, 32, 64, 128}
                                                         : std::vector<double>{8, 16, 32, 64})
                                        : b_sweep;
            cfg.replicates = b_replicates ? b_replicates : (g.paper_scale ? 20 : 5);
            cfg.estimators =
                parse_estimators(b_estimators.empty() ? "empirical,mle" : b_estimators);
        } else if (bench_do->parsed()) {
            subname = "density-oracle";
            cfg.kind = bench::ExperimentKind::DensityOracle;
            cfg.sweep = b_sweep.empty() ? log10_sweep(1e3, g.paper_scale ? 1e8 : 1e6) : b_sweep;
            cfg.replicates = b_replicates ? b_replicates : (g.paper_scale ? 20 : 3);
            cfg.oracle_sizes =
                !b_oracle_sizes.empty()
                    ? b_oracle_sizes
                    : (g.paper_scale ? std::vector<int>{4, 7, 10, 15, 23, 36, 55, 84, 130, 201}
                                     : std::vector<int>{4, 7, 10, 15, 23, 36});
            cfg.quad_tol = b_quad_tol;
            cfg.estimators =
                parse_estimators(b_estimators.empty() ? "empirical,mle" : b_estimators);
        } else if (bench_ds->parsed()) {
            subname = "density-scaling";
            metric = "h2_variance_part";
            cfg.kind = bench::ExperimentKind::DensityFixedScaling;
            cfg.sweep = b_sweep.empty() ? log10_sweep(1e4, g.paper_scale ? 1e8 : 1e6) : b_sweep;
            cfg.replicates = b_replicates ? b_replicates : (g.paper_scale ? 20 : 3);
            cfg.beta = b_beta;
            cfg.scaling_c = b_scaling_c;
            cfg.estimators = parse_estimators(b_estimators.empty() ? "mle" : b_estimators);
        } else if (bench_rt->parsed()) {
            subname = "runtime";
            metric = "runtime_seconds";
            cfg.kind = bench::ExperimentKind::Runtime;
            cfg.runtime_family = b_vary == "N" ? bench::ExperimentKind::GridVaryN
                                               : bench::ExperimentKind::GridVaryn;
            cfg.grid_n = b_grid_n;
            cfg.log_corner_ratio = std::isnan(b_logl) ? 2.0 : b_logl;
            cfg.fixed_samples = b_fixed_samples > 0 ? b_fixed_samples : 1e5;
            cfg.sweep = b_sweep.empty()
                            ? (b_vary == "N"
                                   ? log10_sweep(1e2, g.paper_scale ? 1e8 : 1e5)
                                   : (g.paper_scale ? std::vector<double>{8, 16, 32, 64, 128}
                                                    : std::vector<double>{8, 16, 32, 48}))
                            : b_sweep;
            cfg.replicates = b_replicates ? b_replicates : (g.paper_scale ? 20 : 3);
            cfg.estimators = parse_estimators(b_estimators.empty() ? "mle" : b_estimators);
        }

        const std::vector<bench::ExperimentRecord> recs =
            cfg.kind == bench::ExperimentKind::Runtime
                ? bench::run_runtime_experiment(cfg)
                : (cfg.kind == bench::ExperimentKind::GridVaryN ||
                   cfg.kind == bench::ExperimentKind::GridVaryn)
                      ? bench::run_grid_experiment(cfg)
                      : bench::run_density_experiment(cfg);
        bench::emit(recs, parse_format(g.format), g.out, bench_meta(cfg, g, subname));
        if (!b_export_dir.empty() && bench_do->parsed())
            export_density_grids(cfg, b_export_dir, b_export_n);
        if (b_report_slopes) {
            const auto range = b_fit_range.empty()
                                   ? bench::top_half_range(cfg.sweep)
                                   : bench::Range{b_fit_range[0], b_fit_range[1]};
            report_slopes(recs, metric, range);
        }
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}
