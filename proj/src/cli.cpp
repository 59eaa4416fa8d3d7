#include "coxsusie/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "coxsusie/bayes_factors.hpp"
#include "coxsusie/metrics.hpp"
#include "coxsusie/simulate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coxsusie {

namespace {

constexpr double kLog10E = 0.43429448190325176;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> default_names(Eigen::Index p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("v" + std::to_string(j + 1));
    return names;
}

int resolve_threads(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

} // namespace

int run_fit(const RunConfig& cfg) {
    const NamedMatrix geno = read_matrix(cfg.genotypes);
    const SurvivalOutcome outcome = read_phenotypes(cfg.phenotypes);
    if (geno.values.rows() != outcome.n())
        throw DimensionError("genotype rows (" + std::to_string(geno.values.rows()) +
                             ") do not match phenotype rows (" +
                             std::to_string(outcome.n()) + ")");
    outcome.validate();

    Eigen::VectorXd offsets;
    if (!cfg.covariates.empty()) {
        const NamedMatrix cov = read_matrix(cfg.covariates);
        if (cov.values.rows() != outcome.n())
            throw DimensionError("covariate rows do not match phenotype rows");
        const MultivariateFit cov_fit = fit_multivariate(cov.values, outcome);
        offsets = cov_fit.linear_predictor;
    }

    SusieOptions opts;
    opts.max_iter = cfg.max_iter;
    opts.tol = cfg.tol;
    opts.rho = cfg.rho;
    opts.purity_threshold = cfg.purity;
    opts.threads = cfg.threads;

    const Eigen::Index p = geno.values.cols();
    const Eigen::VectorXd pi = uniform_prior_weights(p);
    const Eigen::VectorXd sigma0 = Eigen::VectorXd::Constant(cfg.L, cfg.sigma0);
    const SusieFit fit =
        fit_susie(geno.values, outcome, cfg.L, pi, sigma0, offsets, opts);

    FitSettings settings;
    settings.L = cfg.L;
    settings.rho = cfg.rho;
    settings.purity_threshold = cfg.purity;
    settings.tol = cfg.tol;
    settings.max_iter = cfg.max_iter;
    settings.sigma0_init = sigma0;
    write_fit_json(cfg.out, fit, geno.names, settings);
    return kExitOk;
}

int run_simulate(const RunConfig& cfg) {
    SimulationSpec spec;
    spec.p1 = cfg.causal;
    spec.effect_mean = cfg.effect_mean;
    spec.effect_variance = cfg.effect_variance;
    spec.baseline = cfg.baseline;
    spec.censoring_level = cfg.censoring;
    spec.maf = cfg.maf;
    spec.seed = cfg.seed;

    Eigen::MatrixXd X;
    std::vector<std::string> names;
    if (!cfg.genotypes.empty()) {
        NamedMatrix geno = read_matrix(cfg.genotypes);
        X = std::move(geno.values);
        names = std::move(geno.names);
        spec.n = X.rows();
        spec.p = X.cols();
    } else {
        spec.n = cfg.n;
        spec.p = cfg.p;
        X = simulate_genotypes(spec.n, spec.p, spec.maf, spec.seed);
        names = default_names(spec.p);
    }

    const SimulatedDataset data = simulate_tte(std::move(X), spec);
    write_matrix(cfg.out + ".genotypes.tsv", names, data.X);
    write_phenotypes(cfg.out + ".phenotypes.tsv", data.outcome);
    write_truth(cfg.out + ".truth.tsv", names, data.causal_indices,
                data.true_coefficients);
    return kExitOk;
}

std::vector<BfCompareRow> bf_compare_grid(const BfGridParams& params) {
    struct Cell {
        double maf;
        double censoring;
        int replicate;
        std::uint64_t stream;
    };
    std::vector<Cell> cells;
    std::uint64_t stream = 0;
    for (double maf : params.maf_grid)
        for (double cens : params.censoring_grid)
            for (int rep = 0; rep < params.replicates; ++rep)
                cells.push_back({maf, cens, rep + 1, stream++});

    std::vector<BfCompareRow> rows(cells.size());
    const QuadratureRule rule = hermite_rule(params.nodes);
    const QuadratureRule rule1 = hermite_rule(1);
    const int threads = resolve_threads(params.threads);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        SimulationSpec spec;
        spec.n = params.n;
        spec.p = 1;
        spec.p1 = 1;
        spec.effect_mean = params.effect;
        spec.effect_variance = 0.0;
        spec.censoring_level = cell.censoring;
        spec.maf = cell.maf;
        spec.seed = params.seed + 0x1000 * cell.stream;

        const Eigen::MatrixXd x =
            simulate_genotypes(spec.n, 1, cell.maf, spec.seed);
        const SimulatedDataset data = simulate_tte(x, spec);

        BfCompareRow row;
        row.maf = cell.maf;
        row.censoring = cell.censoring;
        row.replicate = cell.replicate;

        const Eigen::VectorXd no_offsets;
        const RiskSetOrder order(data.outcome);
        const UnivariateFit fit =
            fit_univariate(data.X.col(0), no_offsets, data.outcome, order);
        if (fit.converged && std::isfinite(fit.se)) {
            row.log10_laplace = kLog10E * log_laplace_bf(fit, params.sigma0);
            row.log10_abf = kLog10E * log_abf(fit.bhat, fit.se, params.sigma0);
            const double mu1 = posterior_mean(fit.bhat, fit.se, params.sigma0);
            const double s1sq = posterior_variance(fit.se, params.sigma0);
            const auto profile = [&](double t) {
                return partial_loglik_ratio(t, data.X.col(0), no_offsets, data.outcome,
                                            order);
            };
            row.log10_quadrature =
                kLog10E * log_quadrature_bf(profile, mu1, s1sq, params.sigma0, rule);
            row.log10_quadrature_1node =
                kLog10E * log_quadrature_bf(profile, mu1, s1sq, params.sigma0, rule1);
        }
        rows[i] = row;
    }
    return rows;
}

int run_bf_compare(const RunConfig& cfg) {
    BfGridParams params;
    params.n = cfg.n > 0 ? cfg.n : 10000;
    params.effect = cfg.effect;
    params.sigma0 = cfg.sigma0;
    params.maf_grid = cfg.maf_grid;
    params.censoring_grid = cfg.censoring_grid;
    params.replicates = cfg.replicates;
    params.nodes = cfg.nodes;
    params.seed = cfg.seed;
    params.threads = cfg.threads;

    const auto rows = bf_compare_grid(params);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        values.row(static_cast<Eigen::Index>(i)) << r.maf, r.censoring,
            static_cast<double>(r.replicate), r.log10_laplace, r.log10_abf,
            r.log10_quadrature, r.log10_quadrature_1node;
    }
    write_delimited(cfg.out,
                    {"maf", "censoring", "replicate", "log10_laplace_bf", "log10_abf",
                     "log10_quadrature_bf", "log10_quadrature_bf_1node"},
                    values);
    return kExitOk;
}

int run_evaluate(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const std::string suffix = ".fit.json";

    std::vector<std::string> stems;
    if (!fs::is_directory(cfg.input_dir))
        throw ParseError(cfg.input_dir + ": not a directory");
    for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(stems.begin(), stems.end());

    std::vector<ReplicateResult> results;
    for (const auto& stem : stems) {
        const std::string fit_path = (fs::path(cfg.input_dir) / (stem + suffix)).string();
        const std::string truth_path =
            (fs::path(cfg.input_dir) / (stem + ".truth.tsv")).string();
        if (!fs::exists(truth_path))
            throw ParseError(fit_path + ": no matching truth file " + truth_path);

        const FitDocument doc = read_fit_json(fit_path);
        const TruthTable truth = read_truth(truth_path);
        if (static_cast<Eigen::Index>(truth.names.size()) != doc.fit.pips.size())
            throw DimensionError(truth_path + ": variable count does not match fit");

        ReplicateResult r;
        r.pips = doc.fit.pips;
        r.credible_sets = doc.fit.credible_sets;
        r.causal_indices = truth.causal_indices;
        r.replicate_id = stem;
        results.push_back(std::move(r));
    }

    const auto table = calibration_table(results, cfg.bins);
    Eigen::MatrixXd cal(static_cast<Eigen::Index>(table.size()), 6);
    for (std::size_t i = 0; i < table.size(); ++i)
        cal.row(static_cast<Eigen::Index>(i))
            << table[i].bin_lower, table[i].bin_upper, table[i].mean_pip,
            table[i].causal_fraction, static_cast<double>(table[i].count),
            table[i].low_count ? 1.0 : 0.0;
    write_delimited(cfg.out + ".calibration.tsv",
                    {"bin_lower", "bin_upper", "mean_pip", "causal_fraction", "count",
                     "low_count"},
                    cal);

    std::vector<double> thresholds;
    for (int i = 0; i <= 100; ++i) thresholds.push_back(i / 100.0);
    const auto curve = power_fdr_curve(results, thresholds);
    Eigen::MatrixXd pf(static_cast<Eigen::Index>(curve.size()), 6);
    for (std::size_t i = 0; i < curve.size(); ++i)
        pf.row(static_cast<Eigen::Index>(i))
            << curve[i].threshold, curve[i].fdr, curve[i].power,
            static_cast<double>(curve[i].tp), static_cast<double>(curve[i].fp),
            static_cast<double>(curve[i].fn);
    write_delimited(cfg.out + ".power_fdr.tsv",
                    {"threshold", "fdr", "power", "tp", "fp", "fn"}, pf);

    const CsSummary summary = cs_summary(results);
    std::ofstream out(cfg.out + ".cs_summary.tsv");
    if (!out) throw ParseError(cfg.out + ".cs_summary.tsv: cannot open for writing");
    out << "n_cs\tcoverage\tpower\tmedian_purity\tmedian_mas\tmean_size\n";
    out << summary.n_cs << '\t'
        << (summary.coverage ? format_double(*summary.coverage) : "NA") << '\t'
        << format_double(summary.power) << '\t' << format_double(summary.median_purity)
        << '\t' << format_double(summary.median_mas) << '\t'
        << format_double(summary.mean_size) << '\n';
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Bayesian variable selection for censored time-to-event outcomes"};
    app.set_config("--config");
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")
            ->envname("COXSUSIE_THREADS");
        cmd->add_option("--seed", cfg.seed, "Random seed")->envname("COXSUSIE_SEED");
        cmd->add_option("--out", cfg.out, "Output path or prefix")
            ->required()
            ->envname("COXSUSIE_OUT");
    };

    CLI::App* fit = app.add_subcommand("fit", "Fit the variable-selection model");
    fit->add_option("--genotypes", cfg.genotypes, "Genotype/covariate matrix (n x p)")
        ->required()
        ->envname("COXSUSIE_GENOTYPES");
    fit->add_option("--phenotypes", cfg.phenotypes,
                    "Phenotype table with columns time, status")
        ->required()
        ->envname("COXSUSIE_PHENOTYPES");
    fit->add_option("--covariates", cfg.covariates,
                    "Optional covariate matrix absorbed into offsets")
        ->envname("COXSUSIE_COVARIATES");
    fit->add_option("--L", cfg.L, "Number of single effects")->envname("COXSUSIE_L");
    fit->add_option("--rho", cfg.rho, "Credible-set target coverage")
        ->envname("COXSUSIE_RHO");
    fit->add_option("--purity", cfg.purity, "Credible-set purity threshold")
        ->envname("COXSUSIE_PURITY");
    fit->add_option("--sigma0", cfg.sigma0, "Initial prior variance per effect")
        ->envname("COXSUSIE_SIGMA0");
    fit->add_option("--max-iter", cfg.max_iter, "Maximum outer iterations")
        ->envname("COXSUSIE_MAX_ITER");
    fit->add_option("--tol", cfg.tol, "Convergence tolerance on total effect change")
        ->envname("COXSUSIE_TOL");
    add_common(fit);

    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim->add_option("--n", cfg.n, "Sample count (ignored with --genotypes)");
    sim->add_option("--p", cfg.p, "Variable count (ignored with --genotypes)");
    sim->add_option("--genotypes", cfg.genotypes,
                    "Optional existing genotype matrix to reuse");
    sim->add_option("--causal", cfg.causal, "Number of causal variables");
    sim->add_option("--effect-mean", cfg.effect_mean, "Mean of causal effects");
    sim->add_option("--effect-variance", cfg.effect_variance,
                    "Variance of causal effects");
    sim->add_option("--baseline", cfg.baseline, "Baseline event rate");
    sim->add_option("--censoring", cfg.censoring, "Target censoring rate in [0, 1)");
    sim->add_option("--maf", cfg.maf, "Minor allele frequency for synthetic genotypes");
    add_common(sim);

    CLI::App* bf = app.add_subcommand("bf-compare",
                                      "Compare Bayes factor approximations on a grid");
    bf->add_option("--n", cfg.n, "Samples per replicate (default 10000)");
    bf->add_option("--effect", cfg.effect, "True effect size");
    bf->add_option("--sigma0", cfg.sigma0, "Prior variance");
    bf->add_option("--maf-grid", cfg.maf_grid, "Minor allele frequencies");
    bf->add_option("--censoring-grid", cfg.censoring_grid, "Censoring rates");
    bf->add_option("--replicates", cfg.replicates, "Replicates per grid cell");
    bf->add_option("--nodes", cfg.nodes, "Quadrature nodes")->envname("COXSUSIE_NODES");
    add_common(bf);

    CLI::App* eval = app.add_subcommand("evaluate",
                                        "Summarize fit results against ground truth");
    eval->add_option("--in", cfg.input_dir, "Directory of *.fit.json + *.truth.tsv pairs")
        ->required();
    eval->add_option("--bins", cfg.bins, "Calibration bins");
    add_common(eval);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit->parsed()) return run_fit(cfg);
        if (sim->parsed()) return run_simulate(cfg);
        if (bf->parsed()) return run_bf_compare(cfg);
        if (eval->parsed()) return run_evaluate(cfg);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDimension;
    } catch (const DegenerateDataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const SingularDesignError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSingular;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}

} // namespace coxsusie
