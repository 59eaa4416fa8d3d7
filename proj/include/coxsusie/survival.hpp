#ifndef COXSUSIE_SURVIVAL_HPP
#define COXSUSIE_SURVIVAL_HPP

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

#include "coxsusie/errors.hpp"

namespace coxsusie {

// Observed times y_i = min(T_i, C_i) and censoring indicators
// (status 1 = event observed, 0 = censored).
struct SurvivalOutcome {
    Eigen::VectorXd times;
    Eigen::VectorXi status;

    Eigen::Index n() const { return times.size(); }
    int n_events() const { return status.sum(); }
    double censoring_rate() const {
        return static_cast<double>(n() - n_events()) / static_cast<double>(n());
    }

    // Throws InvalidArgumentError / DimensionError / DegenerateDataError
    // when the invariants (n >= 2, finite non-negative times, binary
    // status, at least one event) do not hold.
    void validate() const;
};

// Risk-set bookkeeping shared by every likelihood evaluation on one
// outcome: sample indices sorted by descending time, grouped by tied
// times. Sorting once and sweeping forward adds samples to the risk
// set as the time threshold decreases; all members of a tied group
// enter before its events are scored (Breslow convention, with risk
// sets R(t) = {j : y_j >= t}).
class RiskSetOrder {
public:
    explicit RiskSetOrder(const SurvivalOutcome& outcome);

    const std::vector<int>& order() const { return order_; }
    // group_begin_[g], group_begin_[g+1]) delimit tied-time group g in order_.
    const std::vector<int>& group_begin() const { return group_begin_; }
    const Eigen::VectorXi& status() const { return status_; }
    Eigen::Index n() const { return static_cast<Eigen::Index>(order_.size()); }

private:
    std::vector<int> order_;
    std::vector<int> group_begin_;
    Eigen::VectorXi status_;
};

// Result of a single-covariate maximum partial-likelihood fit.
struct UnivariateFit {
    double bhat = 0.0;
    double se = std::numeric_limits<double>::infinity();
    double log_lr = 0.0;   // log L(bhat) - log L(0)
    bool converged = false;
    int iterations = 0;
};

struct MultivariateFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd linear_predictor;  // Z * coefficients, per sample
    bool converged = false;
    int iterations = 0;
};

struct NewtonOptions {
    double tol = 1e-8;      // relative score tolerance
    int max_iter = 25;
    int max_halvings = 10;
};

// Cox partial log-likelihood at coefficient b for covariate x with
// fixed per-sample offsets (empty offsets mean zero). Breslow handling
// of tied event times.
double partial_loglik(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const SurvivalOutcome& outcome);
double partial_loglik(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const SurvivalOutcome& outcome, const RiskSetOrder& order);

// log L(b) - log L(0) accumulated as per-event differences in a single
// sweep. Equivalent to two partial_loglik calls but avoids cancelling
// two large sums, which matters when likelihood ratios near machine
// precision are compared downstream.
double partial_loglik_ratio(double b, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& offsets,
                            const SurvivalOutcome& outcome, const RiskSetOrder& order);

// First and second derivative of the partial log-likelihood in b.
// The Hessian is <= 0 everywhere (the objective is concave).
std::pair<double, double> partial_score_hessian(
    double b, const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& offsets, const SurvivalOutcome& outcome);
std::pair<double, double> partial_score_hessian(
    double b, const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& offsets, const SurvivalOutcome& outcome,
    const RiskSetOrder& order);

// Newton fit of the single-covariate model from b = 0 with step
// halving. A constant covariate (or one carrying no information at
// b = 0) yields a degenerate fit: bhat = 0, log_lr = 0, se = +inf,
// converged = false. Divergence past max_iter returns the last iterate
// flagged non-converged.
UnivariateFit fit_univariate(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& offsets,
                             const SurvivalOutcome& outcome,
                             const NewtonOptions& opts = {});
UnivariateFit fit_univariate(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& offsets,
                             const SurvivalOutcome& outcome, const RiskSetOrder& order,
                             const NewtonOptions& opts = {});

// Multi-covariate Newton fit (no offsets); used to absorb nuisance
// covariates into per-sample offsets before variable selection.
// Throws SingularDesignError when the centered design is rank deficient.
MultivariateFit fit_multivariate(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                 const SurvivalOutcome& outcome,
                                 const NewtonOptions& opts = {});

} // namespace coxsusie

#endif
