#ifndef COXSUSIE_GIBSS_HPP
#define COXSUSIE_GIBSS_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "coxsusie/ser.hpp"

namespace coxsusie {

// Level-rho credible set for one single effect: the smallest
// greedily-built set of variables whose inclusion mass reaches rho.
struct CredibleSet {
    int effect_index = -1;
    std::vector<int> members;  // descending alpha; ties by ascending index
    double coverage_mass = 0.0;
    double purity = 1.0;          // min |pairwise correlation| of member columns
    double mean_abs_corr = 1.0;   // mean |pairwise correlation| (singleton: 1)
    int sentinel = -1;            // member with the largest alpha
};

struct SusieOptions {
    int max_iter = 100;
    double tol = 1e-4;             // on max change of the total effect vector
    double rho = 0.95;
    double purity_threshold = 0.5;
    double sigma0_inactive = 1e-9; // effects whose sigma0^2 falls below are
                                   // excluded from credible-set emission
    int threads = 0;
};

struct SusieFit {
    std::vector<SingleEffectPosterior> effects;     // L entries
    std::vector<Eigen::VectorXd> posterior_means;   // alpha_l .* mu_l per effect
    Eigen::VectorXd offsets;                        // final offsets c
    Eigen::VectorXd pips;
    std::vector<CredibleSet> credible_sets;
    std::vector<char> effect_active;
    int iterations = 0;
    bool converged = false;
    std::vector<double> max_delta_history;     // convergence statistic per iteration
    std::vector<long> fit_counts;              // univariate fits per iteration
    double max_offset_residual = 0.0;          // worst bookkeeping drift observed
};

// Iterative stepwise fit of the L-effect model: each pass removes one
// effect from the offsets, refits its single-effect posterior, updates
// its prior variance by the EM rule, and folds the new posterior mean
// back into the offsets. Stops when the total posterior-mean effect
// vector changes by less than tol (max norm) or after max_iter passes.
SusieFit fit_susie(const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const SurvivalOutcome& outcome, int L,
                   const Eigen::Ref<const Eigen::VectorXd>& pi,
                   const Eigen::Ref<const Eigen::VectorXd>& sigma0_init,
                   const Eigen::Ref<const Eigen::VectorXd>& covariate_offset,
                   const SusieOptions& opts = {});

// PIP_j = 1 - prod_l (1 - alpha_lj).
Eigen::VectorXd compute_pips(const SusieFit& fit);

// Greedy credible set at level rho for one inclusion-probability
// vector; returns nothing when the set's purity falls below the
// threshold.
std::optional<CredibleSet> credible_set(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                        double rho,
                                        const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        double purity_threshold);

} // namespace coxsusie

#endif
