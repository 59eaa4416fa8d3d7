#ifndef COXSUSIE_BAYES_FACTORS_HPP
#define COXSUSIE_BAYES_FACTORS_HPP

#include <Eigen/Dense>
#include <functional>

#include "coxsusie/survival.hpp"

namespace coxsusie {

// Gauss-Hermite nodes (zeros of the physicists' Hermite polynomial)
// and weights; weights sum to sqrt(pi).
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Golub-Welsch construction: eigenvalues of the symmetric tridiagonal
// Jacobi matrix with off-diagonal sqrt(i/2) are the nodes, and
// sqrt(pi) times the squared first eigenvector components are the
// weights. Valid for 1 <= k <= 200.
QuadratureRule hermite_rule(int k);

// Wakefield-style asymptotic Bayes factor against b = 0 for a normal
// prior N(0, prior_variance), given the MLE and its standard error:
//   log ABF = 0.5 * log(s^2/(s0^2+s^2)) + (z^2/2) * s0^2/(s0^2+s^2).
double log_abf(double bhat, double se, double prior_variance);

// Laplace-style Bayes factor: replaces the likelihood by its quadratic
// expansion at the MLE but keeps the exact likelihood ratio,
//   log BF = log ABF - z^2/2 + log_lr.
double log_laplace_bf(double bhat, double se, double log_lr, double prior_variance);

// Convenience overload; a degenerate (non-converged) fit carries no
// evidence and returns log BF = 0.
double log_laplace_bf(const UnivariateFit& fit, double prior_variance);

// A 1-d log-likelihood-ratio profile t -> log L(t) - log L(0).
using LogLikRatioFn = std::function<double(double)>;

// Quadrature estimate of log[ integral L(t) p(t | prior_variance) dt / L(0) ],
// the single-variable Bayes factor, with the rule recentered at
// (center_mean, center_var) following the posterior-matched
// reparameterization t_i = mu + sqrt(2) * sigma * r_i. Summed in
// log-sum-exp form; safe for very large likelihood ratios.
double log_quadrature_bf(const LogLikRatioFn& log_lik_ratio, double center_mean,
                         double center_var, double prior_variance,
                         const QuadratureRule& rule);

struct QuadratureBf {
    double log_bf = 0.0;
    bool degenerate = false;  // MLE fit failed; fell back to BF = 1
};

// Data-level quadrature Bayes factor: fits the single-covariate model,
// centers the rule at the approximate posterior mean/variance implied
// by (bhat, se, prior_variance), and integrates the exact partial
// likelihood. Newton options are exposed so precision studies can
// drive the score below its default stopping slack.
QuadratureBf log_quadrature_bf(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& offsets,
                               const SurvivalOutcome& outcome, double prior_variance,
                               int k, const NewtonOptions& newton = {});

// Posterior moments of the effect under the quadratic likelihood
// approximation and a N(0, prior_variance) prior:
//   sigma1^2 = 1 / (1/s^2 + 1/s0^2),  mu1 = (sigma1^2 / s^2) * bhat.
// An infinite se (no information) returns the prior itself.
double posterior_variance(double se, double prior_variance);
double posterior_mean(double bhat, double se, double prior_variance);

} // namespace coxsusie

#endif
