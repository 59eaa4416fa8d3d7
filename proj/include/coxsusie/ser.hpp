#ifndef COXSUSIE_SER_HPP
#define COXSUSIE_SER_HPP

#include <Eigen/Dense>

#include "coxsusie/bayes_factors.hpp"
#include "coxsusie/survival.hpp"

namespace coxsusie {

// Uniform prior inclusion weights 1/p.
Eigen::VectorXd uniform_prior_weights(Eigen::Index p);

// Throws unless pi is non-negative and sums to 1 (within 1e-12).
void validate_prior_weights(const Eigen::Ref<const Eigen::VectorXd>& pi);

// Posterior of the single-effect regression: exactly one of p
// covariates carries a nonzero coefficient, with prior N(0, sigma0^2)
// on that coefficient and inclusion probabilities pi over covariates.
struct SingleEffectPosterior {
    Eigen::VectorXd alpha;      // posterior inclusion probabilities, sums to 1
    Eigen::VectorXd mu1;        // posterior mean of the effect given inclusion
    Eigen::VectorXd sigma1_sq;  // posterior variance given inclusion
    Eigen::VectorXd log_bf;     // per-variable log Bayes factor vs. b = 0
    double prior_variance = 1.0;
    double log_bf_ser = 0.0;    // log sum_j pi_j BF_j

    // Cached per-column summaries from the univariate fits.
    Eigen::VectorXd bhat;
    Eigen::VectorXd se;
    Eigen::VectorXd log_lr;
    std::vector<char> degenerate;   // per column: constant or failed fit
    bool all_degenerate = false;
};

struct SerOptions {
    int threads = 0;  // 0 = all available; column fits run in parallel
};

// Fits one univariate CoxPH model per column of X against the fixed
// offsets, converts each to a Laplace Bayes factor, and normalizes
// pi_j * BF_j in log space. Degenerate columns contribute log BF = 0
// so alpha stays a proper distribution over all p variables.
SingleEffectPosterior fit_ser(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SurvivalOutcome& outcome,
                              const Eigen::Ref<const Eigen::VectorXd>& offsets,
                              const Eigen::Ref<const Eigen::VectorXd>& pi,
                              double sigma0_sq, const SerOptions& opts = {});
SingleEffectPosterior fit_ser(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SurvivalOutcome& outcome,
                              const Eigen::Ref<const Eigen::VectorXd>& offsets,
                              const Eigen::Ref<const Eigen::VectorXd>& pi,
                              double sigma0_sq, const RiskSetOrder& order,
                              const SerOptions& opts = {});

// Normalized inclusion probabilities softmax(log pi + log BF); exact
// zeros in pi stay exactly zero.
Eigen::VectorXd posterior_inclusion_weights(const Eigen::Ref<const Eigen::VectorXd>& pi,
                                            const Eigen::Ref<const Eigen::VectorXd>& log_bf);

// Posterior mean effect vector alpha .* mu1.
Eigen::VectorXd posterior_mean_effect(const SingleEffectPosterior& ser);

// EM update of the prior variance: sum_j alpha_j (mu1_j^2 + sigma1_j^2).
double update_prior_variance(const SingleEffectPosterior& ser);

// Approximate SER log evidence log sum_j pi_j BF_j(sigma0_sq) computed
// from cached per-column summaries; the EM cycle ascends this quantity.
double ser_log_evidence(const Eigen::Ref<const Eigen::VectorXd>& pi,
                        const SingleEffectPosterior& ser, double sigma0_sq);

// Standalone SER with the prior variance estimated by EM: alternates
// posterior computation and the update above until the change in
// sigma0^2 falls below tol. The per-column fits are done once; only
// the closed-form posterior recomputation iterates.
SingleEffectPosterior fit_ser_em(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const SurvivalOutcome& outcome,
                                 const Eigen::Ref<const Eigen::VectorXd>& offsets,
                                 const Eigen::Ref<const Eigen::VectorXd>& pi,
                                 double sigma0_init, int max_iter = 100,
                                 double tol = 1e-8, const SerOptions& opts = {});

} // namespace coxsusie

#endif
