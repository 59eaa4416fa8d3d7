#ifndef COXSUSIE_CLI_HPP
#define COXSUSIE_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "coxsusie/io.hpp"

namespace coxsusie {

// Exit codes: distinct classes so batch drivers can tell input
// problems apart from data problems.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       // invalid argument / internal
inline constexpr int kExitParse = 2;       // malformed input file
inline constexpr int kExitDimension = 3;   // mismatched shapes
inline constexpr int kExitDegenerate = 4;  // unusable data (e.g. no events)
inline constexpr int kExitSingular = 5;    // rank-deficient covariate design
inline constexpr int kExitUsage = 64;      // command-line usage error

struct RunConfig {
    // shared
    std::string genotypes;
    std::string phenotypes;
    std::string covariates;
    std::string out;
    int L = 5;
    double rho = 0.95;
    double purity = 0.5;
    double sigma0 = 1.0;
    int max_iter = 100;
    double tol = 1e-4;
    int nodes = 32;
    int threads = 0;  // 0 = all available
    std::uint64_t seed = 1;

    // simulate
    long n = 0;
    long p = 0;
    long causal = 1;
    double effect_mean = 0.0;
    double effect_variance = 0.0;
    double baseline = 1.0;
    double censoring = 0.0;
    double maf = 0.1;

    // bf-compare
    std::vector<double> maf_grid{0.01, 0.1, 0.25};
    std::vector<double> censoring_grid{0.2, 0.6, 0.9};
    int replicates = 20;
    double effect = 0.1;

    // evaluate
    std::string input_dir;
    int bins = 10;
};

int run_fit(const RunConfig& cfg);
int run_simulate(const RunConfig& cfg);
int run_bf_compare(const RunConfig& cfg);
int run_evaluate(const RunConfig& cfg);

// One row of the Bayes-factor comparison grid; all BFs in log base 10.
struct BfCompareRow {
    double maf = 0.0;
    double censoring = 0.0;
    int replicate = 0;
    double log10_laplace = 0.0;
    double log10_abf = 0.0;
    double log10_quadrature = 0.0;
    double log10_quadrature_1node = 0.0;
};

struct BfGridParams {
    long n = 10000;
    double effect = 0.1;
    double sigma0 = 1.0;
    std::vector<double> maf_grid;
    std::vector<double> censoring_grid;
    int replicates = 20;
    int nodes = 32;
    std::uint64_t seed = 1;
    int threads = 0;
};

// Simulates single-variant datasets over the grid and evaluates all
// three Bayes factor estimates per replicate.
std::vector<BfCompareRow> bf_compare_grid(const BfGridParams& params);

// Parses argv, dispatches to the subcommand runner, and maps
// exceptions to the exit codes above.
int run_cli(int argc, char** argv);

} // namespace coxsusie

#endif
