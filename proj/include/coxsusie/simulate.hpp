#ifndef COXSUSIE_SIMULATE_HPP
#define COXSUSIE_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "coxsusie/survival.hpp"

namespace coxsusie {

// Deterministic stream splitting: every (seed, stream) pair gets an
// independent engine, so per-column and per-replicate generation can
// run in parallel without losing reproducibility.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

struct SimulationSpec {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Eigen::Index p1 = 0;            // number of causal variables
    double effect_mean = 0.0;
    double effect_variance = 0.0;   // 0 makes every causal effect equal the mean
    double baseline = 1.0;          // baseline event rate b0
    double censoring_level = 0.0;   // target censoring rate r in [0, 1)
    double maf = 0.1;               // minor allele frequency for synthetic genotypes
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulatedDataset {
    Eigen::MatrixXd X;
    SurvivalOutcome outcome;
    std::vector<int> causal_indices;      // ascending
    Eigen::VectorXd true_coefficients;    // nonzero exactly on causal indices
    double realized_censoring_rate = 0.0;
};

// n x p genotype dosage matrix with i.i.d. Binomial(2, maf) entries.
Eigen::MatrixXd simulate_genotypes(Eigen::Index n, Eigen::Index p, double maf,
                                   std::uint64_t seed);

// Censored time-to-event outcomes on a fixed design matrix: event
// times are exponential with per-sample rate baseline + x_i' b, and
// the censoring rate lambda_c = r * mean(rate) / (1 - r) targets an
// overall censoring fraction r. Coefficient vectors producing a
// non-positive rate are redrawn (up to 100 attempts).
SimulatedDataset simulate_tte(Eigen::MatrixXd X, const SimulationSpec& spec);

// Monte Carlo estimate of Pr(X > Y) for X ~ Exp(lambda), Y ~ Exp(mu);
// the closed form is mu / (mu + lambda).
double exponential_race_check(double lambda, double mu, long trials,
                              std::uint64_t seed);

} // namespace coxsusie

#endif
