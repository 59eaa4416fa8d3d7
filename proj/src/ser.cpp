#include "coxsusie/ser.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coxsusie {

Eigen::VectorXd uniform_prior_weights(Eigen::Index p) {
    return Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
}

void validate_prior_weights(const Eigen::Ref<const Eigen::VectorXd>& pi) {
    if (pi.size() == 0) throw InvalidArgumentError("prior weights are empty");
    if ((pi.array() < 0.0).any() || !pi.allFinite())
        throw InvalidArgumentError("prior weights must be non-negative and finite");
    if (std::abs(pi.sum() - 1.0) > 1e-12)
        throw InvalidArgumentError("prior weights must sum to 1");
}

Eigen::VectorXd posterior_inclusion_weights(const Eigen::Ref<const Eigen::VectorXd>& pi,
                                            const Eigen::Ref<const Eigen::VectorXd>& log_bf) {
    validate_prior_weights(pi);
    if (pi.size() != log_bf.size())
        throw DimensionError("prior weights and log BF lengths differ");
    const Eigen::Index p = pi.size();

    Eigen::VectorXd log_w(p);
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j) {
        log_w[j] = pi[j] > 0.0 ? std::log(pi[j]) + log_bf[j]
                               : -std::numeric_limits<double>::infinity();
        m = std::max(m, log_w[j]);
    }
    Eigen::VectorXd alpha(p);
    double total = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        alpha[j] = pi[j] > 0.0 ? std::exp(log_w[j] - m) : 0.0;
        total += alpha[j];
    }
    alpha /= total;
    return alpha;
}

namespace {

int resolve_threads(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

// Recompute (alpha, mu1, sigma1_sq, log_bf, evidence) for a new prior
// variance from the cached per-column summaries. The univariate fits
// do not depend on sigma0^2, so EM iterations reuse them.
void refresh_posterior(SingleEffectPosterior& ser,
                       const Eigen::Ref<const Eigen::VectorXd>& pi, double sigma0_sq) {
    const Eigen::Index p = ser.bhat.size();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (ser.degenerate[j]) {
            ser.log_bf[j] = 0.0;
            ser.mu1[j] = 0.0;
            ser.sigma1_sq[j] = sigma0_sq;  // no information: posterior = prior
        } else {
            ser.log_bf[j] =
                log_laplace_bf(ser.bhat[j], ser.se[j], ser.log_lr[j], sigma0_sq);
            ser.sigma1_sq[j] = posterior_variance(ser.se[j], sigma0_sq);
            ser.mu1[j] = posterior_mean(ser.bhat[j], ser.se[j], sigma0_sq);
        }
    }
    ser.prior_variance = sigma0_sq;
    ser.alpha = posterior_inclusion_weights(pi, ser.log_bf);
    ser.log_bf_ser = ser_log_evidence(pi, ser, sigma0_sq);
}

} // namespace

SingleEffectPosterior fit_ser(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SurvivalOutcome& outcome,
                              const Eigen::Ref<const Eigen::VectorXd>& offsets,
                              const Eigen::Ref<const Eigen::VectorXd>& pi,
                              double sigma0_sq, const RiskSetOrder& order,
                              const SerOptions& opts) {
    validate_prior_weights(pi);
    if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq))
        throw InvalidArgumentError("prior variance must be positive and finite");
    if (X.cols() != pi.size())
        throw DimensionError("design matrix columns do not match prior weight length");
    if (X.rows() != outcome.n())
        throw DimensionError("design matrix rows do not match outcome length");

    const Eigen::Index p = X.cols();
    SingleEffectPosterior ser;
    ser.bhat.resize(p);
    ser.se.resize(p);
    ser.log_lr.resize(p);
    ser.log_bf.resize(p);
    ser.mu1.resize(p);
    ser.sigma1_sq.resize(p);
    ser.degenerate.assign(p, 0);

    // Column fits are independent; each writes only its own slot, so
    // the result is identical for any thread count.
    const int threads = resolve_threads(opts.threads);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (Eigen::Index j = 0; j < p; ++j) {
        const UnivariateFit fit = fit_univariate(X.col(j), offsets, outcome, order);
        ser.bhat[j] = fit.bhat;
        ser.se[j] = fit.se;
        ser.log_lr[j] = fit.log_lr;
        ser.degenerate[j] = (!fit.converged || !std::isfinite(fit.se)) ? 1 : 0;
    }

    ser.all_degenerate = true;
    for (Eigen::Index j = 0; j < p; ++j)
        if (!ser.degenerate[j]) ser.all_degenerate = false;

    refresh_posterior(ser, pi, sigma0_sq);
    return ser;
}

SingleEffectPosterior fit_ser(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const SurvivalOutcome& outcome,
                              const Eigen::Ref<const Eigen::VectorXd>& offsets,
                              const Eigen::Ref<const Eigen::VectorXd>& pi,
                              double sigma0_sq, const SerOptions& opts) {
    const RiskSetOrder order(outcome);
    return fit_ser(X, outcome, offsets, pi, sigma0_sq, order, opts);
}

Eigen::VectorXd posterior_mean_effect(const SingleEffectPosterior& ser) {
    return ser.alpha.cwiseProduct(ser.mu1);
}

double update_prior_variance(const SingleEffectPosterior& ser) {
    return (ser.alpha.array() *
            (ser.mu1.array().square() + ser.sigma1_sq.array()))
        .sum();
}

double ser_log_evidence(const Eigen::Ref<const Eigen::VectorXd>& pi,
                        const SingleEffectPosterior& ser, double sigma0_sq) {
    const Eigen::Index p = pi.size();
    Eigen::VectorXd log_w(p);
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double lbf =
            ser.degenerate[j]
                ? 0.0
                : log_laplace_bf(ser.bhat[j], ser.se[j], ser.log_lr[j], sigma0_sq);
        log_w[j] = pi[j] > 0.0 ? std::log(pi[j]) + lbf
                               : -std::numeric_limits<double>::infinity();
        m = std::max(m, log_w[j]);
    }
    return m + std::log((log_w.array() - m).exp().sum());
}

SingleEffectPosterior fit_ser_em(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const SurvivalOutcome& outcome,
                                 const Eigen::Ref<const Eigen::VectorXd>& offsets,
                                 const Eigen::Ref<const Eigen::VectorXd>& pi,
                                 double sigma0_init, int max_iter, double tol,
                                 const SerOptions& opts) {
    SingleEffectPosterior ser = fit_ser(X, outcome, offsets, pi, sigma0_init, opts);
    if (ser.all_degenerate) return ser;
    for (int it = 0; it < max_iter; ++it) {
        const double next = update_prior_variance(ser);
        if (!(next > 0.0)) break;
        const bool done = std::abs(next - ser.prior_variance) <= tol;
        refresh_posterior(ser, pi, next);
        if (done) break;
    }
    return ser;
}

} // namespace coxsusie
