#include "coxsusie/bayes_factors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace coxsusie {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kLogPi = 1.1447298858494001741;

void check_prior_variance(double prior_variance) {
    if (!(prior_variance > 0.0) || !std::isfinite(prior_variance))
        throw InvalidArgumentError("prior variance must be positive and finite");
}

double log_normal_density(double t, double mean, double var) {
    const double d = t - mean;
    return -0.5 * (std::log(var) + d * d / var) - 0.5 * std::log(2.0 * M_PI);
}

} // namespace

QuadratureRule hermite_rule(int k) {
    if (k < 1 || k > 200)
        throw InvalidArgumentError("hermite_rule: order must be in [1, 200]");

    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i < k; ++i) {
        const double beta = std::sqrt(0.5 * i);
        jacobi(i, i - 1) = beta;
        jacobi(i - 1, i) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);

    QuadratureRule rule;
    rule.nodes = es.eigenvalues();  // ascending
    rule.weights = kSqrtPi * es.eigenvectors().row(0).array().square();
    // The rule is symmetric about zero; fold mirrored pairs to make the
    // symmetry exact rather than eigensolver-approximate.
    for (int i = 0, j = k - 1; i < j; ++i, --j) {
        const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -node;
        rule.nodes[j] = node;
        const double weight = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = weight;
        rule.weights[j] = weight;
    }
    if (k % 2 == 1) rule.nodes[k / 2] = 0.0;
    return rule;
}

double log_abf(double bhat, double se, double prior_variance) {
    check_prior_variance(prior_variance);
    if (!std::isfinite(bhat) || !(se > 0.0))
        throw InvalidArgumentError("log_abf: bhat must be finite and se positive");
    if (std::isinf(se)) return 0.0;
    const double s2 = se * se;
    const double z = bhat / se;
    const double shrink = prior_variance / (prior_variance + s2);
    return 0.5 * std::log(s2 / (prior_variance + s2)) + 0.5 * z * z * shrink;
}

double log_laplace_bf(double bhat, double se, double log_lr, double prior_variance) {
    check_prior_variance(prior_variance);
    if (!std::isfinite(bhat) || !(se > 0.0) || !std::isfinite(log_lr))
        throw InvalidArgumentError("log_laplace_bf: invalid inputs");
    if (std::isinf(se)) return 0.0;
    const double z = bhat / se;
    return log_abf(bhat, se, prior_variance) - 0.5 * z * z + log_lr;
}

double log_laplace_bf(const UnivariateFit& fit, double prior_variance) {
    if (!fit.converged || !std::isfinite(fit.se)) return 0.0;
    return log_laplace_bf(fit.bhat, fit.se, fit.log_lr, prior_variance);
}

double posterior_variance(double se, double prior_variance) {
    check_prior_variance(prior_variance);
    const double inv_s2 = std::isinf(se) ? 0.0 : 1.0 / (se * se);
    return 1.0 / (inv_s2 + 1.0 / prior_variance);
}

double posterior_mean(double bhat, double se, double prior_variance) {
    if (std::isinf(se)) return 0.0;
    return posterior_variance(se, prior_variance) / (se * se) * bhat;
}

double log_quadrature_bf(const LogLikRatioFn& log_lik_ratio, double center_mean,
                         double center_var, double prior_variance,
                         const QuadratureRule& rule) {
    check_prior_variance(prior_variance);
    if (!(center_var > 0.0) || !std::isfinite(center_var) || !std::isfinite(center_mean))
        throw InvalidArgumentError("log_quadrature_bf: invalid centering");

    const double sigma = std::sqrt(center_var);
    const int k = static_cast<int>(rule.nodes.size());
    Eigen::VectorXd log_terms(k);
    for (int i = 0; i < k; ++i) {
        const double t = center_mean + std::sqrt(2.0) * sigma * rule.nodes[i];
        log_terms[i] = std::log(rule.weights[i]) + log_lik_ratio(t) +
                       log_normal_density(t, 0.0, prior_variance) -
                       log_normal_density(t, center_mean, center_var);
    }
    const double m = log_terms.maxCoeff();
    return m + std::log((log_terms.array() - m).exp().sum()) - 0.5 * kLogPi;
}

QuadratureBf log_quadrature_bf(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& offsets,
                               const SurvivalOutcome& outcome, double prior_variance,
                               int k, const NewtonOptions& newton) {
    check_prior_variance(prior_variance);
    const RiskSetOrder order(outcome);
    const UnivariateFit fit = fit_univariate(x, offsets, outcome, order, newton);

    QuadratureBf result;
    if (!fit.converged || !std::isfinite(fit.se)) {
        result.degenerate = true;  // no usable centering; report BF = 1
        return result;
    }
    const QuadratureRule rule = hermite_rule(k);
    const double mu1 = posterior_mean(fit.bhat, fit.se, prior_variance);
    const double sigma1_sq = posterior_variance(fit.se, prior_variance);
    const auto profile = [&](double t) {
        return partial_loglik_ratio(t, x, offsets, outcome, order);
    };
    result.log_bf = log_quadrature_bf(profile, mu1, sigma1_sq, prior_variance, rule);
    return result;
}

} // namespace coxsusie
